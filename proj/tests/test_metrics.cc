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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "mtasr/metrics.h"
#include "mtasr/rng.h"
#include "mtasr/tensor.h"

using namespace mtasr;

namespace {

std::vector<std::string> chars_of(const std::string& s) {
  std::vector<std::string> out;
  for (char c : s) out.emplace_back(1, c);
  return out;
}

// memoized textbook recursion, independent of the DP + backtrace path
std::size_t recursive_distance(const std::vector<std::string>& a,
                               const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> rec = [&](std::size_t i,
                                                                 std::size_t j) -> std::size_t {
    if (i == 0) return j;
    if (j == 0) return i;
    auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::size_t best = rec(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1);
    best = std::min(best, rec(i - 1, j) + 1);
    best = std::min(best, rec(i, j - 1) + 1);
    memo[key] = best;
    return best;
  };
  return rec(a.size(), b.size());
}

}  // namespace

TEST_CASE("identical sequences have zero distance") {
  ErrorReport r = edit_distance(chars_of("abcab"), chars_of("abcab"));
  CHECK(r.distance() == 0);
  CHECK(r.rate() == 0.0);
}

TEST_CASE("kitten vs sitting needs three edits") {
  ErrorReport r = edit_distance(chars_of("kitten"), chars_of("sitting"));
  CHECK(r.distance() == 3);
  CHECK(r.reference_length == 7);
}

TEST_CASE("an empty hypothesis is all deletions") {
  ErrorReport r = edit_distance({}, chars_of("abcd"));
  CHECK(r.deletions == 4);
  CHECK(r.substitutions == 0);
  CHECK(r.insertions == 0);
  CHECK(r.rate() == 1.0);
}

TEST_CASE("an empty reference is all insertions") {
  ErrorReport r = edit_distance(chars_of("xy"), {});
  CHECK(r.insertions == 2);
  CHECK(std::isinf(r.rate()));
}

TEST_CASE("distance agrees with the recursive oracle on 500 random pairs") {
  Rng rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    std::string a, b;
    std::size_t la = rng.index(9), lb = rng.index(9);  // lengths <= 8
    for (std::size_t i = 0; i < la; ++i) a += static_cast<char>('a' + rng.index(3));
    for (std::size_t i = 0; i < lb; ++i) b += static_cast<char>('a' + rng.index(3));
    ErrorReport r = edit_distance(chars_of(a), chars_of(b));
    CHECK(r.distance() == recursive_distance(chars_of(a), chars_of(b)));
    CHECK(r.distance() == r.substitutions + r.deletions + r.insertions);
    CHECK(r.substitutions + r.deletions <= r.reference_length + r.insertions);
  }
}

TEST_CASE("swapping hypothesis and reference swaps insertions and deletions") {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    std::string a, b;
    for (std::size_t i = 0; i < rng.index(8); ++i) a += static_cast<char>('a' + rng.index(3));
    for (std::size_t i = 0; i < rng.index(8); ++i) b += static_cast<char>('a' + rng.index(3));
    ErrorReport fwd = edit_distance(chars_of(a), chars_of(b));
    ErrorReport rev = edit_distance(chars_of(b), chars_of(a));
    CHECK(fwd.distance() == rev.distance());
    CHECK(fwd.substitutions == rev.substitutions);
    CHECK(fwd.insertions == rev.deletions);
    CHECK(fwd.deletions == rev.insertions);
  }
}

TEST_CASE("triangle inequality and length bound") {
  Rng rng(44);
  auto rand_str = [&]() {
    std::string s;
    for (std::size_t i = 0; i < rng.index(7); ++i) s += static_cast<char>('a' + rng.index(3));
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::string x = rand_str(), y = rand_str(), z = rand_str();
    std::size_t xy = edit_distance(chars_of(x), chars_of(y)).distance();
    std::size_t yz = edit_distance(chars_of(y), chars_of(z)).distance();
    std::size_t xz = edit_distance(chars_of(x), chars_of(z)).distance();
    CHECK(xz <= xy + yz);
    CHECK(xz <= std::max(x.size(), z.size()));
  }
}

TEST_CASE("backtrace prefers substitution over insertion over deletion") {
  // "ab" vs "cd": two substitutions, never ins+del pairs
  ErrorReport r = edit_distance(chars_of("ab"), chars_of("cd"));
  CHECK(r.substitutions == 2);
  CHECK(r.insertions == 0);
  CHECK(r.deletions == 0);
}

TEST_CASE("corpus rates pool errors over reference lengths") {
  std::vector<std::pair<std::string, std::string>> perfect = {{"abc", "abc"}, {"xy", "xy"}};
  CHECK(corpus_error_rate(perfect, ScoreUnit::kChar) == 0.0);

  // (1 error / 10) and (3 errors / 10) pool to 0.2
  std::vector<std::pair<std::string, std::string>> mixed = {
      {"aaaaaaaaab", "aaaaaaaaaa"}, {"bbbaaaaaaa", "aaaaaaaaaa"}};
  CHECK(corpus_error_rate(mixed, ScoreUnit::kChar) == doctest::Approx(0.2).epsilon(1e-12));

  std::vector<std::pair<std::string, std::string>> single = {{"ab", "ax"}};
  CHECK(corpus_error_rate(single, ScoreUnit::kChar) == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<std::pair<std::string, std::string>> empty_ref = {{"a", ""}};
  CHECK_THROWS_AS(corpus_error_rate(empty_ref, ScoreUnit::kChar), Error);
}

TEST_CASE("word mode splits on single spaces") {
  std::vector<std::string> words = tokenize("the cat  sat", ScoreUnit::kWord);
  CHECK(words == std::vector<std::string>{"the", "cat", "sat"});
  std::vector<std::string> chars = tokenize("a b", ScoreUnit::kChar);
  CHECK(chars.size() == 3);  // space scores as a character

  std::vector<std::pair<std::string, std::string>> pairs = {{"the cat sat", "the cat sat down"}};
  CHECK(corpus_error_rate(pairs, ScoreUnit::kWord) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("score csv round-trips through disk") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "mtasr_scores_test.csv";
  std::vector<UttScore> scores = {{"u1", {1, 2, 0, 10}}, {"u2", {0, 0, 0, 5}}};
  write_score_csv(path.string(), scores);
  std::ifstream in(path);
  std::string header, l1, l2;
  std::getline(in, header);
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(header == "id,sub,del,ins,ref_len,rate");
  CHECK(l1.rfind("u1,1,2,0,10,", 0) == 0);
  CHECK(l2.rfind("u2,0,0,0,5,0", 0) == 0);
  fs::remove(path);
}
