#pragma once

#include <string>
#include <vector>

#include "relex/training.hpp"

namespace relex {

// Evaluates a checkpoint on a test set. Bags are re-indexed against the
// checkpoint's vocabulary, so pass them unindexed or indexed alike.
double test_auc(const Checkpoint& ckpt, std::vector<Bag> test_bags,
                const PretrainedVectors& pretrained, double cutoff = 0.4);

struct GridCell {
  SupervisionMode mode;
  WeightScheme weights;
  Pooling pooling;
  double mean_auc = 0.0;
  double stddev_auc = 0.0;
  std::vector<double> per_seed_auc;
  bool failed = false;
  std::string error;
};

// The full 3 supervision modes x 3 weight schemes x 2 poolings grid, each
// cell mean +- stddev of test AUC over the configured seeds. A failing cell
// is marked and the remaining cells still run.
std::vector<GridCell> ablation_grid(const TrainConfig& base, const ModelConfig& model_cfg,
                                    const TrainData& data, const std::vector<Bag>& test_bags,
                                    const WordEmbeddingTable& table,
                                    const PretrainedVectors& pretrained);

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> grid = {0, 0.5, 1, 2, 4, 8, 16, 32, 64};
  return grid;
}

struct SweepPoint {
  double lambda = 0.0;
  double mean_auc = 0.0;
  std::vector<double> per_seed_auc;
};

// Multitask training at each lambda, mean test AUC over seeds.
std::vector<SweepPoint> lambda_sweep(const std::vector<double>& values, const TrainConfig& base,
                                     const ModelConfig& model_cfg, const TrainData& data,
                                     const std::vector<Bag>& test_bags,
                                     const WordEmbeddingTable& table,
                                     const PretrainedVectors& pretrained);

struct SentenceInspection {
  std::string text;
  double p = 0.0;       // existence probability
  double u = 0.0;       // unnormalized attention logit
  double weight = 0.0;  // effective weight under the checkpoint's scheme
};

// Per-sentence attention report for one bag under one checkpoint. For the
// softmax scheme the weight is the normalized a_j; for sigmoid it is
// sigma(u_j); uniform reports the constant weight.
std::vector<SentenceInspection> inspect_bag(const Bag& bag, const Checkpoint& ckpt,
                                            const PretrainedVectors& pretrained);

double mean(const std::vector<double>& xs);
double stddev(const std::vector<double>& xs);  // population stddev

}  // namespace relex
