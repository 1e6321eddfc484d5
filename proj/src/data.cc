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

#include "mtasr/data.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "mtasr/rng.h"

namespace mtasr {

namespace {

constexpr char kFeatureMagic[4] = {'F', 'B', '0', '1'};

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

Tensor read_feature_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kFeatureMagic, 4) != 0) {
    throw IoError("bad magic in feature file " + path);
  }
  std::uint32_t t = read_u32(in);
  std::uint32_t d = read_u32(in);
  if (!in) throw IoError("truncated feature file " + path);
  if (t == 0 || d == 0 || static_cast<std::uint64_t>(t) * d > (1u << 28)) {
    throw IoError("dimension overflow in feature file " + path);
  }
  std::vector<float> raw(static_cast<std::size_t>(t) * d);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (in.gcount() != static_cast<std::streamsize>(raw.size() * 4)) {
    throw IoError("truncated feature file " + path);
  }
  Tensor out({t, d});
  for (std::size_t i = 0; i < raw.size(); ++i) out.at(i) = static_cast<double>(raw[i]);
  return out;
}

void write_feature_matrix(const std::string& path, const Tensor& features) {
  if (features.rank() != 2) throw Error("write_feature_matrix: features must be [T, D]");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature file " + path);
  out.write(kFeatureMagic, 4);
  write_u32(out, static_cast<std::uint32_t>(features.rows()));
  write_u32(out, static_cast<std::uint32_t>(features.cols()));
  for (double v : features.data()) {
    float f = static_cast<float>(v);
    out.write(reinterpret_cast<char*>(&f), 4);
  }
  if (!out) throw IoError("write failed for feature file " + path);
}

void cmvn(std::span<Utterance> speaker_utterances) {
  if (speaker_utterances.empty()) return;
  const std::size_t dim = speaker_utterances.front().features.cols();
  std::vector<double> mean(dim, 0.0), sq(dim, 0.0);
  std::size_t frames = 0;
  for (const Utterance& u : speaker_utterances) {
    for (std::size_t t = 0; t < u.features.rows(); ++t) {
      for (std::size_t d = 0; d < dim; ++d) {
        double v = u.features.at(t, d);
        mean[d] += v;
        sq[d] += v * v;
      }
    }
    frames += u.features.rows();
  }
  for (std::size_t d = 0; d < dim; ++d) {
    mean[d] /= static_cast<double>(frames);
    double var = sq[d] / static_cast<double>(frames) - mean[d] * mean[d];
    double stddev = std::sqrt(std::max(var, 0.0));
    sq[d] = std::max(stddev, 1e-8);
  }
  for (Utterance& u : speaker_utterances) {
    for (std::size_t t = 0; t < u.features.rows(); ++t) {
      for (std::size_t d = 0; d < dim; ++d) {
        u.features.at(t, d) = (u.features.at(t, d) - mean[d]) / sq[d];
      }
    }
  }
}

void cmvn_by_speaker(std::vector<Utterance>& utterances) {
  // Group in place: stable sort by speaker would reorder the corpus, so work
  // over index runs per speaker instead.
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    groups[utterances[i].speaker].push_back(i);
  }
  for (auto& [speaker, idx] : groups) {
    std::vector<Utterance> tmp;
    tmp.reserve(idx.size());
    for (std::size_t i : idx) tmp.push_back(std::move(utterances[i]));
    cmvn(tmp);
    for (std::size_t j = 0; j < idx.size(); ++j) utterances[idx[j]] = std::move(tmp[j]);
  }
}

Tensor add_deltas(const Tensor& base) {
  if (base.rank() != 2) throw Error("add_deltas: features must be [T, D]");
  const std::size_t T = base.rows();
  const std::size_t D = base.cols();
  Tensor out({T, 2 * D});
  auto clamp = [&](long t) -> std::size_t {
    if (t < 0) return 0;
    if (t >= static_cast<long>(T)) return T - 1;
    return static_cast<std::size_t>(t);
  };
  const double denom = 2.0 * (1.0 + 4.0);  // 2 * sum(n^2), n = 1..2
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t d = 0; d < D; ++d) {
      out.at(t, d) = base.at(t, d);
      double num = 0.0;
      for (long n = 1; n <= 2; ++n) {
        num += static_cast<double>(n) *
               (base.at(clamp(static_cast<long>(t) + n), d) -
                base.at(clamp(static_cast<long>(t) - n), d));
      }
      out.at(t, D + d) = num / denom;
    }
  }
  return out;
}

std::vector<Utterance> cap_duplicate_transcripts(std::vector<Utterance> utterances,
                                                 std::size_t threshold) {
  if (threshold < 1) throw Error("cap_duplicate_transcripts: threshold must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  std::vector<Utterance> out;
  out.reserve(utterances.size());
  for (Utterance& u : utterances) {
    std::string key;
    for (int tok : u.chars.tokens) key += std::to_string(tok) + ",";
    if (++counts[key] <= threshold) out.push_back(std::move(u));
  }
  return out;
}

std::vector<Batch> make_batches(const std::vector<Utterance>& utterances, std::size_t size,
                                std::uint64_t seed) {
  if (size < 1) throw Error("make_batches: batch size must be >= 1");
  std::vector<std::size_t> order(utterances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    std::size_t j = i + rng.index(order.size() - i);
    std::swap(order[i], order[j]);
  }

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += size) {
    Batch batch;
    std::size_t end = std::min(start + size, order.size());
    std::size_t max_len = 0;
    for (std::size_t i = start; i < end; ++i) {
      max_len = std::max(max_len, utterances[order[i]].frames());
    }
    for (std::size_t i = start; i < end; ++i) {
      const Utterance& u = utterances[order[i]];
      Tensor padded({max_len, u.features.cols()});
      std::copy(u.features.data().begin(), u.features.data().end(), padded.data().begin());
      batch.items.push_back(BatchItem{order[i], std::move(padded), u.frames()});
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

namespace {

std::unordered_map<std::string, std::vector<std::string>> read_label_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file " + path);
  std::unordered_map<std::string, std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw IoError("label line without tab in " + path);
    std::string id = line.substr(0, tab);
    std::istringstream rest(line.substr(tab + 1));
    std::vector<std::string> symbols;
    std::string tok;
    while (rest >> tok) symbols.push_back(tok);
    out[id] = std::move(symbols);
  }
  return out;
}

TokenSequence to_tokens(const std::vector<std::string>& symbols, const Vocabulary& vocab) {
  TokenSequence seq;
  seq.vocab = vocab.name;
  seq.tokens.reserve(symbols.size());
  for (const std::string& s : symbols) seq.tokens.push_back(vocab.lookup(s));
  return seq;
}

}  // namespace

Dataset load_dataset(const std::string& root, const std::string& split,
                     std::size_t duplicate_cap) {
  namespace fs = std::filesystem;
  Dataset ds;
  ds.chars = Vocabulary::load((fs::path(root) / "vocab.chars.txt").string(), "chars");
  ds.phones = Vocabulary::load((fs::path(root) / "vocab.phones.txt").string(), "phones");
  fs::path states_vocab = fs::path(root) / "vocab.states.txt";
  if (fs::exists(states_vocab)) {
    ds.states = Vocabulary::load(states_vocab.string(), "states");
  } else {
    ds.states.name = "states";
  }

  fs::path manifest = fs::path(root) / ("manifest." + split + ".jsonl");
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());

  std::unordered_map<std::string, std::unordered_map<std::string, std::vector<std::string>>>
      label_cache;
  auto labels_for = [&](const std::string& rel) -> const auto& {
    auto it = label_cache.find(rel);
    if (it == label_cache.end()) {
      it = label_cache.emplace(rel, read_label_file((fs::path(root) / rel).string())).first;
    }
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("manifest " + manifest.string() + " line " + std::to_string(line_no) + ": " +
                    e.what());
    }
    Utterance u;
    u.id = j.at("id").get<std::string>();
    u.speaker = j.at("speaker").get<std::string>();
    Tensor base = read_feature_matrix((fs::path(root) / j.at("features").get<std::string>()).string());
    u.features = add_deltas(base);

    const auto& char_labels = labels_for(j.at("chars").get<std::string>());
    auto cit = char_labels.find(u.id);
    if (cit == char_labels.end()) throw IoError("no character labels for utterance " + u.id);
    u.chars = to_tokens(cit->second, ds.chars);

    const auto& phone_labels = labels_for(j.at("phones").get<std::string>());
    auto pit = phone_labels.find(u.id);
    if (pit == phone_labels.end()) throw IoError("no phone labels for utterance " + u.id);
    u.phones = to_tokens(pit->second, ds.phones);

    if (j.contains("states") && !j.at("states").is_null()) {
      const auto& state_labels = labels_for(j.at("states").get<std::string>());
      auto sit = state_labels.find(u.id);
      if (sit == state_labels.end()) throw IoError("no state labels for utterance " + u.id);
      StateAlignment align;
      align.states.reserve(sit->second.size());
      for (const std::string& s : sit->second) align.states.push_back(std::stoi(s));
      if (align.states.size() != u.frames()) {
        throw IoError("state alignment length " + std::to_string(align.states.size()) +
                      " != frame count " + std::to_string(u.frames()) + " for utterance " + u.id);
      }
      for (int s : align.states) {
        if (s < 0 || (ds.states.size() > 0 && static_cast<std::size_t>(s) >= ds.states.size())) {
          throw IoError("state label out of range for utterance " + u.id);
        }
      }
      u.states = std::move(align);
    }
    ds.utterances.push_back(std::move(u));
  }
  if (ds.utterances.empty()) throw IoError("manifest " + manifest.string() + " lists no utterances");

  if (duplicate_cap > 0) {
    ds.utterances = cap_duplicate_transcripts(std::move(ds.utterances), duplicate_cap);
  }
  cmvn_by_speaker(ds.utterances);
  return ds;
}

}  // namespace mtasr
