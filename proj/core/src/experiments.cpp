#include "relex/experiments.hpp"

#include <cmath>

namespace relex {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

double test_auc(const Checkpoint& ckpt, std::vector<Bag> test_bags,
                const PretrainedVectors& pretrained, double cutoff) {
  const WordEmbeddingTable table = ckpt.make_table();
  const Model model = ckpt.make_model(table);
  index_tokens(test_bags, table.vocab());
  const std::vector<Vec> m = bag_entity_vectors(test_bags, table, pretrained);
  return evaluate_auc(model, test_bags, m, ckpt.attention, cutoff);
}

std::vector<GridCell> ablation_grid(const TrainConfig& base, const ModelConfig& model_cfg,
                                    const TrainData& data, const std::vector<Bag>& test_bags,
                                    const WordEmbeddingTable& table,
                                    const PretrainedVectors& pretrained) {
  static const SupervisionMode kModes[] = {SupervisionMode::kDistSup,
                                           SupervisionMode::kDistSupPlusDirectAsBags,
                                           SupervisionMode::kMultiTask};
  static const WeightScheme kSchemes[] = {WeightScheme::kUniform, WeightScheme::kSoftmax,
                                          WeightScheme::kSigmoid};
  static const Pooling kPoolings[] = {Pooling::kAverage, Pooling::kMax};

  std::vector<GridCell> grid;
  for (SupervisionMode mode : kModes) {
    for (WeightScheme scheme : kSchemes) {
      for (Pooling pooling : kPoolings) {
        GridCell cell;
        cell.mode = mode;
        cell.weights = scheme;
        cell.pooling = pooling;
        TrainConfig cfg = base;
        cfg.mode = mode;
        cfg.attention = {scheme, pooling};
        try {
          const MultiSeedResult res = train(cfg, model_cfg, data, table, pretrained);
          for (const TrainResult& run : res.runs)
            cell.per_seed_auc.push_back(test_auc(run.best, test_bags, pretrained, cfg.auc_cutoff));
          cell.mean_auc = mean(cell.per_seed_auc);
          cell.stddev_auc = stddev(cell.per_seed_auc);
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = e.what();
        }
        grid.push_back(std::move(cell));
      }
    }
  }
  return grid;
}

std::vector<SweepPoint> lambda_sweep(const std::vector<double>& values, const TrainConfig& base,
                                     const ModelConfig& model_cfg, const TrainData& data,
                                     const std::vector<Bag>& test_bags,
                                     const WordEmbeddingTable& table,
                                     const PretrainedVectors& pretrained) {
  std::vector<SweepPoint> out;
  for (double lambda : values) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    TrainConfig cfg = base;
    cfg.mode = SupervisionMode::kMultiTask;
    cfg.lambda = lambda;
    SweepPoint pt;
    pt.lambda = lambda;
    const MultiSeedResult res = train(cfg, model_cfg, data, table, pretrained);
    for (const TrainResult& run : res.runs)
      pt.per_seed_auc.push_back(test_auc(run.best, test_bags, pretrained, cfg.auc_cutoff));
    pt.mean_auc = mean(pt.per_seed_auc);
    out.push_back(std::move(pt));
  }
  return out;
}

std::vector<SentenceInspection> inspect_bag(const Bag& bag, const Checkpoint& ckpt,
                                            const PretrainedVectors& pretrained) {
  const WordEmbeddingTable table = ckpt.make_table();
  const Model model = ckpt.make_model(table);
  std::vector<Bag> bags = {bag};
  index_tokens(bags, table.vocab());
  const std::vector<Vec> m = bag_entity_vectors(bags, table, pretrained);
  const BagForward fwd = model.forward_bag(bags[0], m[0], ckpt.attention, ForwardMode{});

  std::vector<SentenceInspection> out;
  for (std::size_t j = 0; j < bags[0].sentences.size(); ++j) {
    SentenceInspection ins;
    ins.text = bags[0].sentences[j].text();
    ins.p = fwd.sentences[j].p;
    ins.u = fwd.sentences[j].u;
    ins.weight = fwd.attend.weights[j];
    out.push_back(std::move(ins));
  }
  return out;
}

}  // namespace relex
