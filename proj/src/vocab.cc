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

#include "mtasr/vocab.h"

#include <fstream>

#include "mtasr/tensor.h"

namespace mtasr {

namespace {

std::optional<int> find_once(const Vocabulary& v, const std::string& symbol) {
  std::optional<int> found;
  for (std::size_t i = 0; i < v.symbols.size(); ++i) {
    if (v.symbols[i] == symbol) {
      if (found) throw Error("vocabulary " + v.name + ": duplicate reserved symbol " + symbol);
      found = static_cast<int>(i);
    }
  }
  return found;
}

}  // namespace

Vocabulary Vocabulary::from_symbols(std::string name, std::vector<std::string> symbols) {
  Vocabulary v;
  v.name = std::move(name);
  v.symbols = std::move(symbols);
  for (std::size_t i = 0; i < v.symbols.size(); ++i) {
    auto [it, inserted] = v.index.emplace(v.symbols[i], static_cast<int>(i));
    if (!inserted) throw Error("vocabulary " + v.name + ": duplicate symbol " + v.symbols[i]);
  }
  v.sos = find_once(v, kSosSymbol);
  v.eos = find_once(v, kEosSymbol);
  v.blank = find_once(v, kBlankSymbol);
  return v;
}

Vocabulary Vocabulary::load(const std::string& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file " + path);
  std::vector<std::string> symbols;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    symbols.push_back(line);
  }
  if (symbols.empty()) throw IoError("empty vocabulary file " + path);
  return from_symbols(std::move(name), std::move(symbols));
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file " + path);
  for (const std::string& s : symbols) out << s << "\n";
}

int Vocabulary::lookup(const std::string& symbol) const {
  auto it = index.find(symbol);
  if (it == index.end()) throw Error("vocabulary " + name + ": unknown symbol '" + symbol + "'");
  return it->second;
}

int Vocabulary::require_sos() const {
  if (!sos) throw Error("vocabulary " + name + " has no " + kSosSymbol);
  return *sos;
}

int Vocabulary::require_eos() const {
  if (!eos) throw Error("vocabulary " + name + " has no " + kEosSymbol);
  return *eos;
}

int Vocabulary::require_blank() const {
  if (!blank) throw Error("vocabulary " + name + " has no " + kBlankSymbol);
  return *blank;
}

std::string Vocabulary::to_text(const std::vector<int>& tokens) const {
  std::string out;
  for (int t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= symbols.size()) {
      throw Error("vocabulary " + name + ": token index " + std::to_string(t) + " out of range");
    }
    const std::string& s = symbols[static_cast<std::size_t>(t)];
    out += (s == kSpaceSymbol) ? " " : s;
  }
  return out;
}

}  // namespace mtasr
