#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relex/dataset.hpp"
#include "relex/ops.hpp"
#include "relex/tensor.hpp"

namespace relex {

enum class WeightScheme { kUniform, kSoftmax, kSigmoid };
enum class Pooling { kAverage, kMax };

struct AttentionConfig {
  WeightScheme weights = WeightScheme::kSigmoid;
  Pooling pooling = Pooling::kMax;
};

std::string to_string(WeightScheme w);
std::string to_string(Pooling p);
WeightScheme parse_weight_scheme(const std::string& s);
Pooling parse_pooling(const std::string& s);

struct ModelConfig {
  std::size_t d_w = 300;        // word-vector dimension (frozen)
  std::size_t d_pos = 5;        // distance-embedding dimension
  std::size_t n_filters = 230;  // filters per size
  std::size_t d_s = 230;        // sentence encoding dimension
  std::size_t h_exist = 64;     // existence-head hidden width
  std::size_t h_attn = 64;      // attention-head hidden width
  std::size_t h_out = 64;       // output-layer hidden width
  std::size_t n_relations = 0;
  double dropout = 0.1;
  std::vector<int> filter_sizes = {2, 3, 4, 5};

  std::size_t input_dim() const { return d_w + 2 * d_pos; }
  std::size_t n_distance_rows() const { return 2 * kMaxDistance + 1; }  // 61
};

struct ForwardMode {
  bool train = false;
  std::uint64_t run_seed = 0;
  std::uint64_t step = 0;  // optimizer step, part of the dropout stream
};

struct SentenceForward {
  std::vector<Vec> inputs;  // post-dropout [w_i; d_i^e1; d_i^e2]
  std::vector<Vec> mask;    // dropout multipliers, same geometry
  std::vector<ops::ConvCache> conv;
  Vec concat;               // pooled filter responses, all sizes
  Vec encoding;             // s
  Vec exist_pre, exist_h;   // existence head hidden layer
  double p_logit = 0.0, p = 0.5;
  Vec attn_pre, attn_h;     // attention head hidden layer
  double u = 0.0;
};

struct AttendCache {
  AttentionConfig cfg;
  Vec weights;              // effective per-sentence weight (a_j, sigma(u_j), or 1/n)
  std::vector<int> argmax;  // winning sentence per dimension (max pooling)
  std::size_t n = 0;
};

struct BagForward {
  std::vector<SentenceForward> sentences;
  AttendCache attend;
  Vec g;        // bag encoding
  Vec m;        // entity-pair vector
  Vec gm;       // [g; m]
  Vec out_pre;  // pre-ReLU hidden
  Vec out_h;    // t
  Vec logits;
  Vec probs;    // independent per-relation sigmoids
};

// Standalone attention pooling over sentence encodings, all six variants.
Vec attend_and_pool(const std::vector<Vec>& encodings, const Vec& logits,
                    const AttentionConfig& cfg, AttendCache* cache = nullptr);
void attend_and_pool_backward(const std::vector<Vec>& encodings, const Vec& logits,
                              const AttendCache& cache, const Vec& dg,
                              std::vector<Vec>& dencodings, Vec& dlogits);

// m = e1 (.) e2. Throws on dimension mismatch.
Vec entity_pair_vector(const Vec& e1, const Vec& e2);

class Model {
 public:
  Model(ModelConfig cfg, const WordEmbeddingTable* words);

  void init_params(std::uint64_t seed);
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const ModelConfig& config() const { return cfg_; }
  const WordEmbeddingTable* words() const { return words_; }

  // Input representation: v_i = [w_i; d_i^e1; d_i^e2] with train-mode dropout.
  std::vector<Vec> input_repr(const SentenceInstance& sent, const ForwardMode& mode,
                              std::vector<Vec>* mask = nullptr) const;

  SentenceForward forward_sentence(const SentenceInstance& sent, const ForwardMode& mode) const;

  // dp: dLoss/dp from direct supervision. Accumulates weight * gradients.
  void backward_sentence(const SentenceInstance& sent, const SentenceForward& fwd, double dp,
                         double weight);

  BagForward forward_bag(const Bag& bag, const Vec& entity_pair, const AttentionConfig& att,
                         const ForwardMode& mode) const;

  // dprobs: dLoss/dprobs over relations. Accumulates weight * gradients.
  void backward_bag(const Bag& bag, const BagForward& fwd, const Vec& dprobs, double weight);

 private:
  // Shared tail of the sentence backward: ds into the encoder, du into the
  // attention head, dp_direct straight into the existence probability.
  void backward_sentence_core(const SentenceInstance& sent, const SentenceForward& fwd,
                              const Vec& ds, double du, double dp_direct, double weight);

  ModelConfig cfg_;
  const WordEmbeddingTable* words_;
  ParameterSet params_;
};

}  // namespace relex
