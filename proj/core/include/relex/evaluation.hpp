#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "relex/model.hpp"

namespace relex {

// One (entity pair, relation) prediction; every bag emits |R| of these.
struct PredictionRecord {
  std::string pair_id;
  int relation = 0;
  double confidence = 0.0;
  int gold = 0;
};

struct PRPoint {
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;
};

struct PRCurve {
  std::vector<PRPoint> points;  // rank order, recall nondecreasing
  std::size_t total_positives = 0;
};

// Sorts by confidence descending (ties: pair id, then relation index) and
// walks the ranking. Throws when there are no gold positives.
PRCurve pr_curve(std::vector<PredictionRecord> records);

// Area under precision over recall on [0, cutoff]; the crossing segment is
// linearly interpolated. Result is at most cutoff.
double auc_at_recall(const PRCurve& curve, double cutoff = 0.4);

// Eval-mode predictions for every (bag, relation). entity_pairs[i] is the
// precomputed m vector for bags[i].
std::vector<PredictionRecord> collect_records(const Model& model, const std::vector<Bag>& bags,
                                              const std::vector<Vec>& entity_pairs,
                                              const AttentionConfig& att);

double evaluate_auc(const Model& model, const std::vector<Bag>& bags,
                    const std::vector<Vec>& entity_pairs, const AttentionConfig& att,
                    double cutoff = 0.4);

}  // namespace relex
