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

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mtasr {

inline constexpr const char* kSosSymbol = "<sos>";
inline constexpr const char* kEosSymbol = "<eos>";
inline constexpr const char* kBlankSymbol = "<blank>";
// Rendered as a literal space when joining symbols into text.
inline constexpr const char* kSpaceSymbol = "<spc>";

/// Indexed symbol inventory. Line number == index in the on-disk format.
struct Vocabulary {
  std::string name;
  std::vector<std::string> symbols;
  std::unordered_map<std::string, int> index;
  std::optional<int> sos;
  std::optional<int> eos;
  std::optional<int> blank;

  static Vocabulary from_symbols(std::string name, std::vector<std::string> symbols);
  static Vocabulary load(const std::string& path, std::string name);
  void save(const std::string& path) const;

  std::size_t size() const { return symbols.size(); }
  int lookup(const std::string& symbol) const;
  int require_sos() const;
  int require_eos() const;
  int require_blank() const;

  /// Joins token symbols into display text; kSpaceSymbol becomes ' '.
  std::string to_text(const std::vector<int>& tokens) const;
};

/// Symbol index sequence over a named vocabulary. SOS/EOS are never stored;
/// decoding and loss operations add them.
struct TokenSequence {
  std::string vocab;
  std::vector<int> tokens;
};

}  // namespace mtasr
