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

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mtasr {

struct ErrorReport {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;

  std::size_t distance() const { return substitutions + deletions + insertions; }
  double rate() const;
};

/// Unit-cost Levenshtein alignment; backtrace ties prefer substitution over
/// insertion over deletion. Insertions are hypothesis tokens with no
/// reference counterpart, deletions the reverse.
ErrorReport edit_distance(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

enum class ScoreUnit { kChar, kWord };

/// kWord splits on single spaces; kChar scores every character, spaces
/// included.
std::vector<std::string> tokenize(const std::string& text, ScoreUnit unit);

/// Pooled error rate: sum of errors over sum of reference lengths (not a
/// per-utterance average). Pairs are (hypothesis, reference) texts.
double corpus_error_rate(const std::vector<std::pair<std::string, std::string>>& pairs,
                         ScoreUnit unit);

struct UttScore {
  std::string id;
  ErrorReport report;
};

/// CSV rows: id,sub,del,ins,ref_len,rate
void write_score_csv(const std::string& path, const std::vector<UttScore>& scores);

}  // namespace mtasr
