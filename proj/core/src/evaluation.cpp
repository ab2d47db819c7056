#include "relex/evaluation.hpp"

#include <algorithm>
#include <stdexcept>

namespace relex {

PRCurve pr_curve(std::vector<PredictionRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const PredictionRecord& a, const PredictionRecord& b) {
              if (a.confidence != b.confidence) return a.confidence > b.confidence;
              if (a.pair_id != b.pair_id) return a.pair_id < b.pair_id;
              return a.relation < b.relation;
            });
  PRCurve curve;
  for (const PredictionRecord& r : records)
    if (r.gold) ++curve.total_positives;
  if (curve.total_positives == 0)
    throw std::invalid_argument("PR curve undefined: no gold positives");

  std::size_t tp = 0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (records[k].gold) ++tp;
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(k + 1),
                            static_cast<double>(tp) / static_cast<double>(curve.total_positives),
                            records[k].confidence});
  }
  return curve;
}

double auc_at_recall(const PRCurve& curve, double cutoff) {
  double auc = 0.0;
  double prev_recall = 0.0;
  for (const PRPoint& pt : curve.points) {
    if (pt.recall > prev_recall) {
      if (pt.recall <= cutoff) {
        auc += pt.precision * (pt.recall - prev_recall);
      } else if (prev_recall < cutoff) {
        auc += pt.precision * (cutoff - prev_recall);  // interpolated crossing
      }
      prev_recall = pt.recall;
    }
    if (prev_recall >= cutoff) break;
  }
  return auc;
}

std::vector<PredictionRecord> collect_records(const Model& model, const std::vector<Bag>& bags,
                                              const std::vector<Vec>& entity_pairs,
                                              const AttentionConfig& att) {
  if (bags.size() != entity_pairs.size())
    throw std::invalid_argument("bags and entity-pair vectors differ in length");
  std::vector<PredictionRecord> records;
  records.reserve(bags.size() * model.config().n_relations);
  ForwardMode eval_mode;  // train=false
  for (std::size_t i = 0; i < bags.size(); ++i) {
    const BagForward fwd = model.forward_bag(bags[i], entity_pairs[i], att, eval_mode);
    for (std::size_t r = 0; r < fwd.probs.size(); ++r)
      records.push_back({bags[i].pair_id, static_cast<int>(r), fwd.probs[r],
                         bags[i].labels[r] ? 1 : 0});
  }
  return records;
}

double evaluate_auc(const Model& model, const std::vector<Bag>& bags,
                    const std::vector<Vec>& entity_pairs, const AttentionConfig& att,
                    double cutoff) {
  return auc_at_recall(pr_curve(collect_records(model, bags, entity_pairs, att)), cutoff);
}

}  // namespace relex
