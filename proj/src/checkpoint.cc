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

#include "mtasr/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>

namespace mtasr {

namespace {

constexpr char kMagic[8] = {'M', 'T', 'L', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw IoError("truncated checkpoint " + path);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_tensor(std::ostream& out, const std::string& name, const Tensor& t) {
  write_u64(out, name.size());
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u64(out, t.rank());
  for (std::size_t d : t.shape()) write_u64(out, d);
  for (double v : t.data()) {
    float f = static_cast<float>(v);
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<char*>(&f), 4);
  }
}

std::pair<std::string, Tensor> read_tensor(std::istream& in, const std::string& path) {
  std::uint64_t name_len = read_u64(in, path);
  if (name_len > 4096) throw IoError("implausible tensor name length in " + path);
  std::string name(name_len, '\0');
  in.read(name.data(), static_cast<std::streamsize>(name_len));
  std::uint64_t rank = read_u64(in, path);
  if (rank == 0 || rank > 4) throw IoError("bad tensor rank in " + path);
  std::vector<std::size_t> shape(rank);
  std::uint64_t numel = 1;
  for (auto& d : shape) {
    d = read_u64(in, path);
    numel *= d;
    if (numel > (1ull << 32)) throw IoError("tensor too large in " + path);
  }
  std::vector<float> raw(numel);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(numel * 4));
  if (in.gcount() != static_cast<std::streamsize>(numel * 4)) {
    throw IoError("truncated checkpoint " + path);
  }
  Tensor t(shape);
  for (std::size_t i = 0; i < raw.size(); ++i) t.at(i) = static_cast<double>(raw[i]);
  return {std::move(name), std::move(t)};
}

Tensor text_tensor(const std::string& text) {
  Tensor t({std::max<std::size_t>(text.size(), 1)});
  for (std::size_t i = 0; i < text.size(); ++i) {
    t.at(i) = static_cast<double>(static_cast<unsigned char>(text[i]));
  }
  return t;
}

std::string tensor_text(const Tensor& t) {
  std::string out;
  out.reserve(t.numel());
  for (double v : t.data()) out += static_cast<char>(static_cast<unsigned char>(v));
  return out;
}

std::string join_symbols(const Vocabulary& v) {
  std::string out;
  for (const std::string& s : v.symbols) {
    out += s;
    out += '\n';
  }
  return out;
}

Vocabulary vocab_from_text(const std::string& text, const std::string& name) {
  std::vector<std::string> symbols;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      symbols.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return Vocabulary::from_symbols(name, std::move(symbols));
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const AdamState& adam,
                     std::uint64_t update_counter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out.write(kMagic, 8);

  std::uint64_t n = model.params.size() + 1;  // + chars vocab
  bool has_phones = model.phones.size() > 0;
  bool has_states = model.states.size() > 0;
  if (has_phones) ++n;
  if (has_states) ++n;
  write_u64(out, n);
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    write_tensor(out, model.params.names()[i], model.params.at_index(i));
  }
  write_tensor(out, "meta.vocab.chars", text_tensor(join_symbols(model.chars)));
  if (has_phones) write_tensor(out, "meta.vocab.phones", text_tensor(join_symbols(model.phones)));
  if (has_states) write_tensor(out, "meta.vocab.states", text_tensor(join_symbols(model.states)));

  write_u64(out, update_counter);

  write_u64(out, 2 + adam.m.size() + adam.v.size());
  write_tensor(out, "adam.t", Tensor({1}, {static_cast<double>(adam.t)}));
  write_tensor(out, "adam.lr", Tensor({1}, {adam.lr}));
  for (const std::string& name : model.params.names()) {
    auto mit = adam.m.find(name);
    if (mit != adam.m.end()) write_tensor(out, "adam.m." + name, mit->second);
    auto vit = adam.v.find(name);
    if (vit != adam.v.end()) write_tensor(out, "adam.v." + name, vit->second);
  }
  if (!out) throw IoError("write failed for checkpoint " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad magic in checkpoint " + path);

  LoadedCheckpoint ck;
  std::uint64_t n = read_u64(in, path);
  std::string chars_text, phones_text, states_text;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto [name, tensor] = read_tensor(in, path);
    if (name == "meta.vocab.chars") {
      chars_text = tensor_text(tensor);
    } else if (name == "meta.vocab.phones") {
      phones_text = tensor_text(tensor);
    } else if (name == "meta.vocab.states") {
      states_text = tensor_text(tensor);
    } else {
      ck.model.params.add(name, std::move(tensor));
    }
  }
  if (chars_text.empty()) throw IoError("checkpoint " + path + " lacks a character vocabulary");
  ck.model.chars = vocab_from_text(chars_text, "chars");
  if (!phones_text.empty()) ck.model.phones = vocab_from_text(phones_text, "phones");
  else ck.model.phones.name = "phones";
  if (!states_text.empty()) ck.model.states = vocab_from_text(states_text, "states");
  else ck.model.states.name = "states";

  ck.update_counter = read_u64(in, path);

  std::uint64_t m = read_u64(in, path);
  for (std::uint64_t i = 0; i < m; ++i) {
    auto [name, tensor] = read_tensor(in, path);
    if (name == "adam.t") {
      ck.adam.t = static_cast<std::uint64_t>(tensor.at(0));
    } else if (name == "adam.lr") {
      ck.adam.lr = tensor.at(0);
    } else if (name.rfind("adam.m.", 0) == 0) {
      ck.adam.m.emplace(name.substr(7), std::move(tensor));
    } else if (name.rfind("adam.v.", 0) == 0) {
      ck.adam.v.emplace(name.substr(7), std::move(tensor));
    } else {
      throw IoError("unexpected optimizer entry '" + name + "' in " + path);
    }
  }

  ck.model.cfg = infer_config(ck.model.params);
  ck.model.cfg.char_vocab = ck.model.chars.size();
  return ck;
}

}  // namespace mtasr
