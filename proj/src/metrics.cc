// Copyright 2026 The mtasr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtasr/metrics.h"

#include <cstdio>
#include <fstream>
#include <limits>

#include "mtasr/tensor.h"

namespace mtasr {

double ErrorReport::rate() const {
  if (reference_length == 0) {
    return distance() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(distance()) / static_cast<double>(reference_length);
}

ErrorReport edit_distance(const std::vector<std::string>& hyp,
                          const std::vector<std::string>& ref) {
  const std::size_t m = hyp.size();
  const std::size_t n = ref.size();
  std::vector<std::size_t> d((m + 1) * (n + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (n + 1) + j]; };
  for (std::size_t i = 0; i <= m; ++i) at(i, 0) = i;  // consume hyp: insertions
  for (std::size_t j = 0; j <= n; ++j) at(0, j) = j;  // consume ref: deletions
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      std::size_t sub = at(i - 1, j - 1) + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      std::size_t ins = at(i - 1, j) + 1;
      std::size_t del = at(i, j - 1) + 1;
      at(i, j) = std::min({sub, ins, del});
    }
  }

  ErrorReport report;
  report.reference_length = n;
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (hyp[i - 1] == ref[j - 1] ? 0 : 1)) {
      if (hyp[i - 1] != ref[j - 1]) ++report.substitutions;
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++report.insertions;
      --i;
    } else {
      ++report.deletions;
      --j;
    }
  }
  return report;
}

std::vector<std::string> tokenize(const std::string& text, ScoreUnit unit) {
  std::vector<std::string> out;
  if (unit == ScoreUnit::kWord) {
    std::string word;
    for (char c : text) {
      if (c == ' ') {
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
      } else {
        word += c;
      }
    }
    if (!word.empty()) out.push_back(std::move(word));
    return out;
  }
  out.reserve(text.size());
  for (char c : text) out.emplace_back(1, c);
  return out;
}

double corpus_error_rate(const std::vector<std::pair<std::string, std::string>>& pairs,
                         ScoreUnit unit) {
  std::size_t errors = 0;
  std::size_t ref_total = 0;
  for (const auto& [hyp, ref] : pairs) {
    ErrorReport r = edit_distance(tokenize(hyp, unit), tokenize(ref, unit));
    errors += r.distance();
    ref_total += r.reference_length;
  }
  if (ref_total == 0) throw Error("corpus_error_rate: empty reference corpus");
  return static_cast<double>(errors) / static_cast<double>(ref_total);
}

void write_score_csv(const std::string& path, const std::vector<UttScore>& scores) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write score report " + path);
  out << "id,sub,del,ins,ref_len,rate\n";
  char buf[64];
  for (const UttScore& s : scores) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.report.rate());
    out << s.id << "," << s.report.substitutions << "," << s.report.deletions << ","
        << s.report.insertions << "," << s.report.reference_length << "," << buf << "\n";
  }
}

}  // namespace mtasr
