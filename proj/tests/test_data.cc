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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mtasr/data.h"
#include "mtasr/rng.h"
#include "mtasr/toy.h"

using namespace mtasr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Utterance make_utt(std::string id, std::string speaker, Tensor feats, std::vector<int> chars) {
  Utterance u;
  u.id = std::move(id);
  u.speaker = std::move(speaker);
  u.features = std::move(feats);
  u.chars = {"chars", std::move(chars)};
  u.phones = {"phones", {0}};
  return u;
}

}  // namespace

TEST_CASE("feature files round-trip losslessly") {
  fs::path dir = temp_dir("mtasr_feat_test");
  Rng rng(1);
  Tensor m({5, 3});
  for (double& v : m.data()) v = static_cast<double>(static_cast<float>(rng.uniform(-4.0, 4.0)));
  write_feature_matrix((dir / "a.fb").string(), m);
  Tensor back = read_feature_matrix((dir / "a.fb").string());
  REQUIRE(back.shape() == m.shape());
  for (std::size_t i = 0; i < m.numel(); ++i) CHECK(back.at(i) == m.at(i));
}

TEST_CASE("feature reader rejects bad magic and truncation") {
  fs::path dir = temp_dir("mtasr_feat_bad");
  {
    std::ofstream empty(dir / "empty.fb", std::ios::binary);
  }
  CHECK_THROWS_AS(read_feature_matrix((dir / "empty.fb").string()), IoError);

  {
    std::ofstream junk(dir / "junk.fb", std::ios::binary);
    junk << "NOPE1234";
  }
  CHECK_THROWS_AS(read_feature_matrix((dir / "junk.fb").string()), IoError);

  {
    // header says 3x2 but only 5 floats follow
    std::ofstream trunc(dir / "trunc.fb", std::ios::binary);
    trunc << "FB01";
    std::uint32_t t = 3, d = 2;
    trunc.write(reinterpret_cast<char*>(&t), 4);
    trunc.write(reinterpret_cast<char*>(&d), 4);
    float f = 1.0f;
    for (int i = 0; i < 5; ++i) trunc.write(reinterpret_cast<char*>(&f), 4);
  }
  CHECK_THROWS_AS(read_feature_matrix((dir / "trunc.fb").string()), IoError);
}

TEST_CASE("cmvn zeroes constant columns and standardizes the rest") {
  Rng rng(2);
  std::vector<Utterance> utts;
  for (int i = 0; i < 3; ++i) {
    Tensor f({4, 2});
    for (std::size_t t = 0; t < 4; ++t) {
      f.at(t, 0) = 7.5;  // constant column
      f.at(t, 1) = rng.uniform(-3.0, 3.0);
    }
    utts.push_back(make_utt("u" + std::to_string(i), "spk", std::move(f), {0}));
  }
  cmvn(utts);

  double mean = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const Utterance& u : utts) {
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(u.features.at(t, 0) == 0.0);
      mean += u.features.at(t, 1);
      sq += u.features.at(t, 1) * u.features.at(t, 1);
      ++n;
    }
  }
  mean /= n;
  CHECK(std::fabs(mean) < 1e-6);
  CHECK(std::fabs(sq / n - mean * mean - 1.0) < 1e-4);
}

TEST_CASE("cmvn on a single frame gives zeros") {
  std::vector<Utterance> utts;
  utts.push_back(make_utt("u0", "spk", Tensor({1, 3}, {4.0, -2.0, 9.0}), {0}));
  cmvn(utts);
  for (std::size_t d = 0; d < 3; ++d) CHECK(utts[0].features.at(0, d) == 0.0);
}

TEST_CASE("cmvn is idempotent up to the variance floor") {
  Rng rng(3);
  std::vector<Utterance> utts;
  for (int i = 0; i < 2; ++i) {
    Tensor f({6, 3});
    for (double& v : f.data()) v = rng.uniform(-5.0, 5.0);
    utts.push_back(make_utt("u" + std::to_string(i), "spk", std::move(f), {0}));
  }
  cmvn(utts);
  std::vector<Utterance> once;
  for (const Utterance& u : utts) once.push_back(u);
  cmvn(utts);
  for (std::size_t i = 0; i < utts.size(); ++i) {
    for (std::size_t c = 0; c < utts[i].features.numel(); ++c) {
      CHECK(std::fabs(utts[i].features.at(c) - once[i].features.at(c)) < 1e-5);
    }
  }
}

TEST_CASE("delta features: constants, single frames, and ramps") {
  Tensor flat = Tensor::full({5, 2}, 3.25);
  Tensor with = add_deltas(flat);
  REQUIRE(with.shape() == std::vector<std::size_t>{5, 4});
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(with.at(t, 2) == 0.0);
    CHECK(with.at(t, 3) == 0.0);
  }

  Tensor one = add_deltas(Tensor({1, 2}, {1.0, -1.0}));
  CHECK(one.at(0, 2) == 0.0);
  CHECK(one.at(0, 3) == 0.0);

  Tensor ramp({7, 1});
  for (std::size_t t = 0; t < 7; ++t) ramp.at(t, 0) = static_cast<double>(t);
  Tensor d = add_deltas(ramp);
  // interior frames: (1*2 + 2*4) / 10 = 1
  for (std::size_t t = 2; t <= 4; ++t) CHECK(d.at(t, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("duplicate transcripts are capped in corpus order") {
  std::vector<Utterance> utts;
  for (int i = 0; i < 5; ++i) {
    utts.push_back(make_utt("dup" + std::to_string(i), "spk", Tensor({1, 2}), {1, 2}));
  }
  utts.push_back(make_utt("uniq", "spk", Tensor({1, 2}), {3}));
  std::vector<Utterance> capped = cap_duplicate_transcripts(std::move(utts), 3);
  REQUIRE(capped.size() == 4);
  CHECK(capped[0].id == "dup0");
  CHECK(capped[1].id == "dup1");
  CHECK(capped[2].id == "dup2");
  CHECK(capped[3].id == "uniq");

  std::vector<Utterance> unique;
  for (int i = 0; i < 4; ++i) {
    unique.push_back(make_utt("u" + std::to_string(i), "spk", Tensor({1, 2}), {i}));
  }
  CHECK(cap_duplicate_transcripts(std::move(unique), 300).size() == 4);
}

TEST_CASE("batching shuffles by seed, chunks, and zero-pads") {
  Rng rng(4);
  std::vector<Utterance> utts;
  for (int i = 0; i < 130; ++i) {
    Tensor f({1 + rng.index(9), 2});
    for (double& v : f.data()) v = rng.uniform(-1.0, 1.0);
    utts.push_back(make_utt("u" + std::to_string(i), "spk", std::move(f), {0}));
  }
  std::vector<Batch> batches = make_batches(utts, 64, 9);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].items.size() == 64);
  CHECK(batches[1].items.size() == 64);
  CHECK(batches[2].items.size() == 2);

  std::vector<Batch> again = make_batches(utts, 64, 9);
  for (std::size_t b = 0; b < batches.size(); ++b) {
    for (std::size_t i = 0; i < batches[b].items.size(); ++i) {
      CHECK(batches[b].items[i].utt_index == again[b].items[i].utt_index);
    }
  }

  std::size_t max_len = 0;
  for (const BatchItem& item : batches[0].items) max_len = std::max(max_len, item.true_len);
  for (const BatchItem& item : batches[0].items) {
    REQUIRE(item.features.rows() == max_len);
    const Utterance& u = utts[item.utt_index];
    CHECK(item.true_len == u.frames());
    for (std::size_t t = 0; t < max_len; ++t) {
      for (std::size_t d = 0; d < 2; ++d) {
        double expect = t < u.frames() ? u.features.at(t, d) : 0.0;
        CHECK(item.features.at(t, d) == expect);
      }
    }
  }
}

TEST_CASE("toy corpora regenerate bit-identically and validate on load") {
  fs::path a = temp_dir("mtasr_toy_a");
  fs::path b = temp_dir("mtasr_toy_b");
  ToySpec spec;
  spec.n_train = 6;
  spec.n_dev = 3;
  generate_toy_corpus(spec, a.string(), 42);
  generate_toy_corpus(spec, b.string(), 42);

  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    fs::path rel = fs::relative(entry.path(), a);
    std::ifstream fa(entry.path(), std::ios::binary);
    std::ifstream fb(b / rel, std::ios::binary);
    REQUIRE(fb.good());
    std::string da((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string db((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(da == db);
  }

  Dataset train = load_dataset(a.string(), "train");
  CHECK(train.utterances.size() == 6);
  for (const Utterance& u : train.utterances) {
    REQUIRE(u.states.has_value());
    CHECK(u.states->states.size() == u.frames());
    CHECK(u.features.cols() == 32);  // 16 base + 16 deltas
    CHECK(!u.chars.tokens.empty());
    CHECK(!u.phones.tokens.empty());
    CHECK(u.frames() == u.phones.tokens.size() * spec.frames_per_phone);
  }
  CHECK(train.chars.require_sos() >= 0);
  CHECK(train.phones.require_blank() == 0);
}

TEST_CASE("noiseless toy features repeat the phone templates exactly") {
  fs::path dir = temp_dir("mtasr_toy_clean");
  ToySpec spec;
  spec.n_train = 4;
  spec.n_dev = 1;
  spec.noise_sigma = 0.0;
  generate_toy_corpus(spec, dir.string(), 7);

  // raw features (no deltas/cmvn): every phone's frames must be identical
  std::ifstream manifest(dir / "manifest.train.jsonl");
  std::string line;
  std::getline(manifest, line);
  auto pos = line.find("feats/");
  REQUIRE(pos != std::string::npos);
  std::string rel = line.substr(pos, line.find(".fb", pos) + 3 - pos);
  Tensor raw = read_feature_matrix((dir / rel).string());
  REQUIRE(raw.rows() % spec.frames_per_phone == 0);
  for (std::size_t p = 0; p < raw.rows() / spec.frames_per_phone; ++p) {
    std::size_t base = p * spec.frames_per_phone;
    for (std::size_t f = 1; f < spec.frames_per_phone; ++f) {
      for (std::size_t d = 0; d < raw.cols(); ++d) {
        CHECK(raw.at(base + f, d) == raw.at(base, d));
      }
    }
  }
}

TEST_CASE("dataset loading rejects undefined symbols") {
  fs::path dir = temp_dir("mtasr_toy_badlabel");
  ToySpec spec;
  spec.n_train = 2;
  spec.n_dev = 1;
  generate_toy_corpus(spec, dir.string(), 3);
  {
    std::ofstream chars(dir / "labels.train.chars.txt", std::ios::binary);
    chars << "train-0\tq q q\n";  // 'q' is outside the 10-letter vocabulary
    chars << "train-1\ta b\n";
  }
  CHECK_THROWS_AS(load_dataset(dir.string(), "train"), Error);
}
