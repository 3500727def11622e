/* Copyright 2026 The tacrec Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthetic.hpp"
#include "tacrec/corpus.hpp"
#include "tacrec/ngram.hpp"
#include "tacrec/predictor.hpp"
#include "tacrec/script_parser.hpp"
#include "tacrec/trainer.hpp"
#include "tacrec/transformer.hpp"

namespace {

using namespace tacrec;

// All fixture scripts concatenated into one buffer.
std::string fixture_text() {
  std::string all;
  for (const auto& e : std::filesystem::directory_iterator(TACREC_FIXTURES_DIR "/scripts")) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    all += buf.str() + "\n";
  }
  return all;
}

void BM_ExtractProofs(benchmark::State& state) {
  const std::string text = fixture_text();
  for (auto _ : state) benchmark::DoNotOptimize(extract_proofs(text, "benchScript.sml"));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ExtractProofs);

Checkpoint default_checkpoint(std::size_t regular) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < regular; ++i) names.push_back(testing::tactic_name(i));
  Checkpoint ck;
  ck.vocab = Vocabulary(names);
  ck.params = tf_init<float>(ck.config, ck.vocab.size());
  return ck;
}

void BM_Forward(benchmark::State& state) {
  const Checkpoint ck = default_checkpoint(165);
  const std::vector<TokenId> ctx = {3, 4, 5, 6, 7};
  const std::vector<TokenId> ids = encode_ids(ctx, ck.config.window);
  for (auto _ : state) benchmark::DoNotOptimize(tf_forward(ck.params, ids));
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMicrosecond);

void BM_RecommendTransformer(benchmark::State& state) {
  const TransformerPredictor p(default_checkpoint(165));
  const std::vector<TokenId> ctx = {3, 4, 5};
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(predict_topn(p, ctx, 10, k));
}
BENCHMARK(BM_RecommendTransformer)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_TrainEpoch(benchmark::State& state) {
  const Dataset d = build_dataset(testing::order2_corpus(1, 100, 5, 15), BuildOptions{});
  ModelConfig c;
  c.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(tf_train(c, d.split.train, d.split.test, d.vocab));
  state.counters["pairs"] = static_cast<double>(d.split.train.size());
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_NgramFit(benchmark::State& state) {
  const auto pairs = build_pairs(testing::random_corpus(1, 2000, 3, 40, 150), 3, 1);
  const Vocabulary vocab = build_vocab(pairs);
  for (auto _ : state) benchmark::DoNotOptimize(ngram_fit(pairs, vocab, 3));
  state.counters["pairs"] = static_cast<double>(pairs.size());
}
BENCHMARK(BM_NgramFit)->Unit(benchmark::kMillisecond);

void BM_NgramRecommend(benchmark::State& state) {
  const auto pairs = build_pairs(testing::random_corpus(1, 2000, 3, 40, 150), 3, 1);
  const Vocabulary vocab = build_vocab(pairs);
  const NgramPredictor p(ngram_fit(pairs, vocab, 3));
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(predict_topn(p, pairs[17].context, 10, k));
}
BENCHMARK(BM_NgramRecommend)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
