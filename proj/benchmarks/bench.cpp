#include <benchmark/benchmark.h>

#include <random>

#include "relex/dataset.hpp"
#include "relex/embeddings.hpp"
#include "relex/evaluation.hpp"
#include "relex/model.hpp"
#include "relex/ops.hpp"

using namespace relex;

namespace {

WordEmbeddingTable make_table(std::size_t vocab_size, std::size_t d_w) {
  std::vector<std::string> words = {Vocabulary::kOovToken};
  for (std::size_t i = 0; i < vocab_size; ++i) words.push_back("w" + std::to_string(i));
  return WordEmbeddingTable::random(Vocabulary::from_words(words, 0), d_w, 1);
}

SentenceInstance make_sentence(const Vocabulary& vocab, std::size_t length, std::uint64_t uid,
                               std::mt19937_64& rng) {
  SentenceInstance s;
  s.uid = uid;
  const std::size_t n = vocab.size() - 1;
  for (std::size_t i = 0; i < length; ++i) s.tokens.push_back("w" + std::to_string(rng() % n));
  s.token_ids.resize(length);
  for (std::size_t i = 0; i < length; ++i) s.token_ids[i] = vocab.index_of(s.tokens[i]);
  s.e1_spans = {{0, 1}};
  s.e2_spans = {{static_cast<int>(length) - 1, static_cast<int>(length)}};
  s.dist_e1 = position_features(length, s.e1_spans);
  s.dist_e2 = position_features(length, s.e2_spans);
  return s;
}

ModelConfig bench_config() {
  ModelConfig cfg;
  cfg.d_w = 50;
  cfg.d_pos = 5;
  cfg.n_filters = 32;
  cfg.d_s = 32;
  cfg.h_exist = 32;
  cfg.h_attn = 16;
  cfg.h_out = 32;
  cfg.n_relations = 5;
  return cfg;
}

void bm_sentence_forward(benchmark::State& state) {
  const WordEmbeddingTable table = make_table(100, 50);
  Model model(bench_config(), &table);
  model.init_params(2);
  std::mt19937_64 rng(3);
  const SentenceInstance sent =
      make_sentence(table.vocab(), static_cast<std::size_t>(state.range(0)), 1, rng);
  for (auto _ : state) {
    const SentenceForward fwd = model.forward_sentence(sent, ForwardMode{});
    benchmark::DoNotOptimize(fwd.p);
  }
}
BENCHMARK(bm_sentence_forward)->Arg(10)->Arg(30)->Arg(60);

void bm_bag_forward_backward(benchmark::State& state) {
  const WordEmbeddingTable table = make_table(100, 50);
  const ModelConfig cfg = bench_config();
  Model model(cfg, &table);
  model.init_params(2);
  std::mt19937_64 rng(3);
  Bag bag;
  bag.labels.assign(cfg.n_relations, 0);
  bag.labels[0] = 1;
  for (int j = 0; j < state.range(0); ++j)
    bag.sentences.push_back(make_sentence(table.vocab(), 20, static_cast<std::uint64_t>(j), rng));
  Vec m(50, 0.1);
  const AttentionConfig att{WeightScheme::kSigmoid, Pooling::kMax};
  for (auto _ : state) {
    model.params().zero_grads();
    const BagForward fwd = model.forward_bag(bag, m, att, ForwardMode{});
    Vec dprobs(fwd.probs.size());
    for (std::size_t k = 0; k < fwd.probs.size(); ++k)
      dprobs[k] = ops::bce_grad(fwd.probs[k], bag.labels[k] ? 1.0 : 0.0);
    model.backward_bag(bag, fwd, dprobs, 1.0);
    benchmark::DoNotOptimize(model.params().grad_norm());
  }
}
BENCHMARK(bm_bag_forward_backward)->Arg(1)->Arg(4)->Arg(16);

void bm_attend_and_pool(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const std::size_t n = static_cast<std::size_t>(state.range(0)), d = 230;
  std::vector<Vec> S(n, Vec(d));
  Vec U(n);
  for (auto& row : S)
    for (double& x : row) x = normal(rng);
  for (double& x : U) x = normal(rng);
  const AttentionConfig att{WeightScheme::kSigmoid, Pooling::kMax};
  for (auto _ : state) {
    const Vec g = attend_and_pool(S, U, att);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(bm_attend_and_pool)->Arg(2)->Arg(8)->Arg(32);

void bm_pr_curve(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<PredictionRecord> recs;
  for (int i = 0; i < state.range(0); ++i)
    recs.push_back({"p" + std::to_string(i), i % 5, unif(rng), unif(rng) < 0.1 ? 1 : 0});
  for (auto _ : state) {
    const double auc = auc_at_recall(pr_curve(recs), 0.4);
    benchmark::DoNotOptimize(auc);
  }
}
BENCHMARK(bm_pr_curve)->Arg(1000)->Arg(10000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
