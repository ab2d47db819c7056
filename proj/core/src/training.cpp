#include "relex/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "relex/rng.hpp"

namespace relex {

using nlohmann::json;

std::string to_string(SupervisionMode m) {
  switch (m) {
    case SupervisionMode::kDistSup: return "distsup";
    case SupervisionMode::kDistSupPlusDirectAsBags: return "distsup+direct";
    case SupervisionMode::kMultiTask: return "multitask";
  }
  return "?";
}

SupervisionMode parse_supervision_mode(const std::string& s) {
  if (s == "distsup") return SupervisionMode::kDistSup;
  if (s == "distsup+direct") return SupervisionMode::kDistSupPlusDirectAsBags;
  if (s == "multitask") return SupervisionMode::kMultiTask;
  throw std::invalid_argument("unknown supervision mode: " + s);
}

double distsup_loss(const Vec& probs, const std::vector<std::uint8_t>& labels) {
  if (probs.size() != labels.size())
    throw std::invalid_argument("prediction/label length mismatch");
  double loss = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k)
    loss += ops::bce(probs[k], labels[k] ? 1.0 : 0.0);
  return loss;
}

double directsup_loss(const Vec& probs, const std::vector<int>& labels) {
  if (probs.size() != labels.size())
    throw std::invalid_argument("prediction/label length mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    loss += ops::bce(probs[i], static_cast<double>(labels[i]));
  return loss;
}

double combined_loss(double distsup, double directsup, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (lambda == 0.0) return distsup;  // bitwise DistSupLoss at lambda = 0
  return distsup / (lambda + 1.0) + directsup * (lambda / (lambda + 1.0));
}

std::vector<Vec> bag_entity_vectors(const std::vector<Bag>& bags,
                                    const WordEmbeddingTable& table,
                                    const PretrainedVectors& pretrained) {
  std::vector<Vec> out;
  out.reserve(bags.size());
  for (const Bag& bag : bags) {
    const Vec e1 = table.entity_embedding(bag.e1_surfaces, pretrained);
    const Vec e2 = table.entity_embedding(bag.e2_surfaces, pretrained);
    out.push_back(entity_pair_vector(e1, e2));
  }
  return out;
}

std::vector<Bag> direct_as_bags(const std::vector<DirectExample>& direct,
                                const RelationInventory& inventory) {
  std::vector<Bag> out;
  out.reserve(direct.size());
  std::size_t serial = 0;
  for (const DirectExample& ex : direct) {
    Bag bag;
    bag.pair_id = "direct#" + std::to_string(serial++);
    bag.e1_id = bag.pair_id + "/e1";
    bag.e2_id = bag.pair_id + "/e2";
    // surfaces: the mention tokens themselves
    for (const Span& sp : ex.sentence.e1_spans) {
      std::string surface;
      for (int t = sp.start; t < sp.end; ++t) {
        if (!surface.empty()) surface += ' ';
        surface += ex.sentence.tokens[static_cast<std::size_t>(t)];
      }
      bag.e1_surfaces.push_back(surface);
    }
    for (const Span& sp : ex.sentence.e2_spans) {
      std::string surface;
      for (int t = sp.start; t < sp.end; ++t) {
        if (!surface.empty()) surface += ' ';
        surface += ex.sentence.tokens[static_cast<std::size_t>(t)];
      }
      bag.e2_surfaces.push_back(surface);
    }
    bag.labels.assign(inventory.size(), 0);
    if (ex.label == 1) {
      for (const std::string& rel : ex.relations) {
        const int r = inventory.index_of(rel);
        if (r >= 0) bag.labels[static_cast<std::size_t>(r)] = 1;
      }
      // a positive example whose relation is outside the inventory stays a
      // negative singleton bag
    }
    bag.sentences.push_back(ex.sentence);
    out.push_back(std::move(bag));
  }
  return out;
}

WordEmbeddingTable Checkpoint::make_table() const {
  return WordEmbeddingTable::from_rows(Vocabulary::from_words(vocab_words, 0), word_rows);
}

Model Checkpoint::make_model(const WordEmbeddingTable& table) const {
  Model model(model_cfg, &table);
  ParameterSet& dst = model.params();
  if (dst.count() != params.count())
    throw std::runtime_error("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < dst.count(); ++i) {
    if (dst.name(i) != params.name(i) || dst.tensor(i).size() != params.tensor(i).size())
      throw std::runtime_error("checkpoint parameter mismatch at " + params.name(i));
    dst.tensor(i).v = params.tensor(i).v;
  }
  return model;
}

TrainResult train_one_seed(const TrainConfig& cfg, const ModelConfig& model_cfg,
                           const TrainData& data, const WordEmbeddingTable& table,
                           const PretrainedVectors& pretrained, std::uint64_t seed) {
  if (cfg.patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (cfg.mode == SupervisionMode::kMultiTask && data.direct.empty())
    throw std::invalid_argument("multitask mode requires direct-supervision examples");

  std::vector<Bag> train_bags = data.train_bags;
  if (cfg.mode == SupervisionMode::kDistSupPlusDirectAsBags) {
    std::vector<Bag> extra = direct_as_bags(data.direct, data.inventory);
    train_bags.insert(train_bags.end(), extra.begin(), extra.end());
  }
  if (train_bags.empty()) throw std::invalid_argument("no training bags");

  const std::vector<Vec> train_m = bag_entity_vectors(train_bags, table, pretrained);
  const std::vector<Vec> val_m = bag_entity_vectors(data.val_bags, table, pretrained);

  Model model(model_cfg, &table);
  model.init_params(seed);
  ops::AdamState adam;
  adam.init(model.params());

  const bool multitask = cfg.mode == SupervisionMode::kMultiTask;
  const double w_dist = multitask ? 1.0 / (cfg.lambda + 1.0) : 1.0;
  const double w_direct = multitask ? cfg.lambda / (cfg.lambda + 1.0) : 0.0;

  // sentences of negative train bags, the label-0 half of the direct batches
  std::vector<std::pair<std::size_t, std::size_t>> neg_pool;
  for (std::size_t i = 0; i < train_bags.size(); ++i)
    if (!train_bags[i].positive())
      for (std::size_t j = 0; j < train_bags[i].sentences.size(); ++j) neg_pool.emplace_back(i, j);

  std::mt19937_64 direct_rng = make_rng(seed, "direct-stream");
  std::mt19937_64 neg_rng = make_rng(seed, "negative-stream");
  std::vector<std::size_t> direct_order(data.direct.size());
  std::iota(direct_order.begin(), direct_order.end(), 0);
  std::size_t direct_pos = direct_order.size();  // forces a shuffle on first use

  auto next_direct = [&]() -> std::size_t {
    if (direct_pos >= direct_order.size()) {
      std::shuffle(direct_order.begin(), direct_order.end(), direct_rng);
      direct_pos = 0;
    }
    return direct_order[direct_pos++];
  };

  TrainResult result;
  result.seed = seed;
  double best_auc = -1.0;
  std::size_t epochs_since_best = 0;
  ParameterSet best_params;
  ops::AdamState best_adam;
  std::size_t best_epoch = 0;
  std::uint64_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(train_bags.size());
    std::iota(order.begin(), order.end(), 0);
    {
      std::mt19937_64 rng = make_rng(seed, "shuffle", epoch);
      std::shuffle(order.begin(), order.end(), rng);
    }

    double epoch_dist = 0.0, epoch_direct = 0.0;
    std::size_t n_direct_terms = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      model.params().zero_grads();
      ++step;
      const ForwardMode mode{true, seed, step};

      double batch_dist = 0.0;
      for (std::size_t bi = start; bi < end; ++bi) {
        const Bag& bag = train_bags[order[bi]];
        const BagForward fwd = model.forward_bag(bag, train_m[order[bi]], cfg.attention, mode);
        batch_dist += distsup_loss(fwd.probs, bag.labels);
        Vec dprobs(fwd.probs.size());
        for (std::size_t k = 0; k < fwd.probs.size(); ++k)
          dprobs[k] = ops::bce_grad(fwd.probs[k], bag.labels[k] ? 1.0 : 0.0);
        model.backward_bag(bag, fwd, dprobs, w_dist);
      }
      epoch_dist += batch_dist;

      double batch_direct = 0.0;
      if (multitask) {
        // one direct minibatch per step: half gold direct examples, half
        // sentences sampled from distantly-supervised negative bags
        const std::size_t n_gold = neg_pool.empty() ? cfg.batch_size : cfg.batch_size / 2;
        const std::size_t n_neg = cfg.batch_size - n_gold;
        std::vector<std::pair<const SentenceInstance*, int>> batch;
        for (std::size_t i = 0; i < n_gold; ++i) {
          const DirectExample& ex = data.direct[next_direct()];
          batch.emplace_back(&ex.sentence, ex.label);
        }
        for (std::size_t i = 0; i < n_neg; ++i) {
          const auto& [bi, si] = neg_pool[neg_rng() % neg_pool.size()];
          batch.emplace_back(&train_bags[bi].sentences[si], 0);
        }
        if (w_direct > 0.0) {
          for (const auto& [sent, label] : batch) {
            const SentenceForward sf = model.forward_sentence(*sent, mode);
            batch_direct += ops::bce(sf.p, static_cast<double>(label));
            model.backward_sentence(*sent, sf,
                                    ops::bce_grad(sf.p, static_cast<double>(label)), w_direct);
          }
          epoch_direct += batch_direct;
          n_direct_terms += batch.size();
        }
      }

      if (!std::isfinite(batch_dist) || !std::isfinite(batch_direct))
        throw DivergenceError("non-finite training loss at step " + std::to_string(step));

      const double norm = model.params().grad_norm();
      if (cfg.grad_clip_norm > 0.0 && norm > cfg.grad_clip_norm)
        model.params().scale_grads(cfg.grad_clip_norm / norm);
      ops::adam_step(model.params(), adam, cfg.adam);
    }

    double val_auc = 0.0;
    if (!data.val_bags.empty()) {
      try {
        val_auc = evaluate_auc(model, data.val_bags, val_m, cfg.attention, cfg.auc_cutoff);
      } catch (const std::invalid_argument&) {
        val_auc = 0.0;  // validation split without gold positives
      }
    }

    EpochLog log;
    log.epoch = epoch;
    log.dist_loss = epoch_dist / static_cast<double>(train_bags.size());
    log.direct_loss =
        n_direct_terms ? epoch_direct / static_cast<double>(n_direct_terms) : 0.0;
    log.val_auc = val_auc;
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    result.log.push_back(log);

    if (val_auc > best_auc) {
      best_auc = val_auc;
      best_epoch = epoch;
      best_params = model.params();
      best_adam = adam;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) break;
    }
  }

  result.best_val_auc = best_auc;
  result.best_epoch = best_epoch;
  Checkpoint& ckpt = result.best;
  ckpt.model_cfg = model_cfg;
  ckpt.attention = cfg.attention;
  ckpt.mode = cfg.mode;
  ckpt.lambda = cfg.lambda;
  ckpt.seed = seed;
  ckpt.epoch = best_epoch;
  ckpt.val_auc = best_auc;
  ckpt.params = best_params;
  ckpt.adam = best_adam;
  for (std::size_t i = 0; i < table.size(); ++i) {
    ckpt.vocab_words.push_back(table.vocab().word_at(i));
    ckpt.word_rows.push_back(table.row(i));
  }
  return result;
}

MultiSeedResult train(const TrainConfig& cfg, const ModelConfig& model_cfg, const TrainData& data,
                      const WordEmbeddingTable& table, const PretrainedVectors& pretrained) {
  if (cfg.seeds.empty()) throw std::invalid_argument("no seeds configured");
  MultiSeedResult out;
  double best = -1.0;
  for (std::uint64_t seed : cfg.seeds) {
    out.runs.push_back(train_one_seed(cfg, model_cfg, data, table, pretrained, seed));
    if (out.runs.back().best_val_auc > best) {
      best = out.runs.back().best_val_auc;
      out.best_index = out.runs.size() - 1;
    }
  }
  return out;
}

// ---- checkpoint serialization ------------------------------------------------

namespace {
json tensor_json(const std::string& name, const Tensor& t) {
  return {{"name", name}, {"shape", t.shape}, {"values", t.v}};
}
}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json j;
  j["format"] = "relex-checkpoint";
  j["version"] = ckpt.version;
  j["seed"] = ckpt.seed;
  j["epoch"] = ckpt.epoch;
  j["val_auc"] = ckpt.val_auc;
  j["mode"] = to_string(ckpt.mode);
  j["lambda"] = ckpt.lambda;
  j["attention"] = {{"weights", to_string(ckpt.attention.weights)},
                    {"pooling", to_string(ckpt.attention.pooling)}};
  const ModelConfig& m = ckpt.model_cfg;
  j["model"] = {{"d_w", m.d_w},         {"d_pos", m.d_pos},   {"n_filters", m.n_filters},
                {"d_s", m.d_s},         {"h_exist", m.h_exist}, {"h_attn", m.h_attn},
                {"h_out", m.h_out},     {"n_relations", m.n_relations},
                {"dropout", m.dropout}, {"filter_sizes", m.filter_sizes}};
  json tensors = json::array();
  for (std::size_t i = 0; i < ckpt.params.count(); ++i)
    tensors.push_back(tensor_json(ckpt.params.name(i), ckpt.params.tensor(i)));
  j["params"] = std::move(tensors);
  j["adam"] = {{"step", ckpt.adam.step}, {"m", ckpt.adam.m}, {"v", ckpt.adam.v}};
  j["vocab"] = ckpt.vocab_words;
  j["word_rows"] = ckpt.word_rows;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump();
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": bad checkpoint JSON: " + e.what());
  }
  if (j.value("format", "") != "relex-checkpoint" || j.value("version", 0) != 1)
    throw std::runtime_error(path + ": unsupported checkpoint format/version");

  Checkpoint ckpt;
  ckpt.seed = j.at("seed").get<std::uint64_t>();
  ckpt.epoch = j.at("epoch").get<std::size_t>();
  ckpt.val_auc = j.at("val_auc").get<double>();
  ckpt.mode = parse_supervision_mode(j.at("mode").get<std::string>());
  ckpt.lambda = j.at("lambda").get<double>();
  ckpt.attention.weights = parse_weight_scheme(j.at("attention").at("weights").get<std::string>());
  ckpt.attention.pooling = parse_pooling(j.at("attention").at("pooling").get<std::string>());
  const json& m = j.at("model");
  ckpt.model_cfg.d_w = m.at("d_w").get<std::size_t>();
  ckpt.model_cfg.d_pos = m.at("d_pos").get<std::size_t>();
  ckpt.model_cfg.n_filters = m.at("n_filters").get<std::size_t>();
  ckpt.model_cfg.d_s = m.at("d_s").get<std::size_t>();
  ckpt.model_cfg.h_exist = m.at("h_exist").get<std::size_t>();
  ckpt.model_cfg.h_attn = m.at("h_attn").get<std::size_t>();
  ckpt.model_cfg.h_out = m.at("h_out").get<std::size_t>();
  ckpt.model_cfg.n_relations = m.at("n_relations").get<std::size_t>();
  ckpt.model_cfg.dropout = m.at("dropout").get<double>();
  ckpt.model_cfg.filter_sizes = m.at("filter_sizes").get<std::vector<int>>();
  for (const json& tj : j.at("params")) {
    Tensor& t = ckpt.params.add(tj.at("name").get<std::string>(),
                                tj.at("shape").get<std::vector<std::size_t>>());
    t.v = tj.at("values").get<Vec>();
    if (t.v.size() != t.g.size())
      throw std::runtime_error(path + ": tensor size mismatch for " +
                               tj.at("name").get<std::string>());
  }
  ckpt.adam.step = j.at("adam").at("step").get<std::int64_t>();
  ckpt.adam.m = j.at("adam").at("m").get<std::vector<Vec>>();
  ckpt.adam.v = j.at("adam").at("v").get<std::vector<Vec>>();
  ckpt.vocab_words = j.at("vocab").get<std::vector<std::string>>();
  ckpt.word_rows = j.at("word_rows").get<std::vector<Vec>>();
  return ckpt;
}

}  // namespace relex
