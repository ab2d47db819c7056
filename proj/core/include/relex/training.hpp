#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "relex/evaluation.hpp"
#include "relex/model.hpp"

namespace relex {

enum class SupervisionMode { kDistSup, kDistSupPlusDirectAsBags, kMultiTask };

std::string to_string(SupervisionMode m);
SupervisionMode parse_supervision_mode(const std::string& s);

struct TrainConfig {
  SupervisionMode mode = SupervisionMode::kDistSup;
  AttentionConfig attention;
  double lambda = 1.0;  // >= 0, only used by kMultiTask
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 3;
  double split_fraction = 0.9;
  double grad_clip_norm = 5.0;
  double auc_cutoff = 0.4;
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  ops::AdamConfig adam;
};

// Sum over relations of per-relation binary cross-entropy.
double distsup_loss(const Vec& probs, const std::vector<std::uint8_t>& labels);
// Sum over the batch of binary cross-entropy on the existence probability.
double directsup_loss(const Vec& probs, const std::vector<int>& labels);
// 1/(lambda+1) * distsup + lambda/(lambda+1) * directsup (convex combination).
double combined_loss(double distsup, double directsup, double lambda);

// Raised when the training loss goes non-finite.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EpochLog {
  std::size_t epoch = 0;
  double dist_loss = 0.0;    // mean per bag over the epoch
  double direct_loss = 0.0;  // mean per direct sentence (MultiTask only)
  double val_auc = 0.0;
  double wall_seconds = 0.0;
};

struct Checkpoint {
  int version = 1;
  ModelConfig model_cfg;
  AttentionConfig attention;
  SupervisionMode mode = SupervisionMode::kDistSup;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double val_auc = 0.0;
  ParameterSet params;
  ops::AdamState adam;
  // Frozen word table, stored so a checkpoint is self-contained.
  std::vector<std::string> vocab_words;
  std::vector<Vec> word_rows;

  WordEmbeddingTable make_table() const;
  Model make_model(const WordEmbeddingTable& table) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

struct TrainData {
  std::vector<Bag> train_bags;
  std::vector<Bag> val_bags;
  std::vector<DirectExample> direct;
  RelationInventory inventory;
};

struct TrainResult {
  std::uint64_t seed = 0;
  Checkpoint best;  // parameters at the best validation epoch
  std::vector<EpochLog> log;
  double best_val_auc = 0.0;
  std::size_t best_epoch = 0;
};

// Precomputed m = e1 (.) e2 for each bag.
std::vector<Vec> bag_entity_vectors(const std::vector<Bag>& bags,
                                    const WordEmbeddingTable& table,
                                    const PretrainedVectors& pretrained);

// Direct examples as singleton bags: relation labels restored when present
// and in the inventory, negative otherwise.
std::vector<Bag> direct_as_bags(const std::vector<DirectExample>& direct,
                                const RelationInventory& inventory);

TrainResult train_one_seed(const TrainConfig& cfg, const ModelConfig& model_cfg,
                           const TrainData& data, const WordEmbeddingTable& table,
                           const PretrainedVectors& pretrained, std::uint64_t seed);

// Runs every seed in cfg.seeds; returns all results, best-validation first
// position reported separately.
struct MultiSeedResult {
  std::vector<TrainResult> runs;
  std::size_t best_index = 0;
};
MultiSeedResult train(const TrainConfig& cfg, const ModelConfig& model_cfg, const TrainData& data,
                      const WordEmbeddingTable& table, const PretrainedVectors& pretrained);

}  // namespace relex
