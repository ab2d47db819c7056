#include "relex/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "relex/rng.hpp"

namespace relex {

std::string to_string(WeightScheme w) {
  switch (w) {
    case WeightScheme::kUniform: return "uniform";
    case WeightScheme::kSoftmax: return "softmax";
    case WeightScheme::kSigmoid: return "sigmoid";
  }
  return "?";
}

std::string to_string(Pooling p) {
  return p == Pooling::kAverage ? "average" : "max";
}

WeightScheme parse_weight_scheme(const std::string& s) {
  if (s == "uniform") return WeightScheme::kUniform;
  if (s == "softmax") return WeightScheme::kSoftmax;
  if (s == "sigmoid") return WeightScheme::kSigmoid;
  throw std::invalid_argument("unknown weight scheme: " + s);
}

Pooling parse_pooling(const std::string& s) {
  if (s == "average") return Pooling::kAverage;
  if (s == "max") return Pooling::kMax;
  throw std::invalid_argument("unknown pooling: " + s);
}

Vec entity_pair_vector(const Vec& e1, const Vec& e2) {
  if (e1.size() != e2.size())
    throw std::invalid_argument("entity embedding dimensions differ: " +
                                std::to_string(e1.size()) + " vs " + std::to_string(e2.size()));
  Vec m(e1.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = e1[i] * e2[i];
  return m;
}

Vec attend_and_pool(const std::vector<Vec>& encodings, const Vec& logits,
                    const AttentionConfig& cfg, AttendCache* cache) {
  const std::size_t n = encodings.size();
  if (n == 0) throw std::invalid_argument("attend_and_pool over an empty bag");
  const std::size_t d = encodings[0].size();

  Vec weights(n);
  switch (cfg.weights) {
    case WeightScheme::kUniform:
      // weight 1 under max pooling (plain cross-sentence max), 1/n under average
      std::fill(weights.begin(), weights.end(),
                cfg.pooling == Pooling::kMax ? 1.0 : 1.0 / static_cast<double>(n));
      break;
    case WeightScheme::kSoftmax:
      weights = ops::softmax(logits);
      break;
    case WeightScheme::kSigmoid:
      for (std::size_t j = 0; j < n; ++j) weights[j] = ops::sigmoid(logits[j]);
      break;
  }

  Vec g(d, 0.0);
  std::vector<int> argmax;
  if (cfg.pooling == Pooling::kAverage) {
    // sigmoid weights are additionally 1/n-normalized so the magnitude does
    // not grow with bag size
    const double norm = cfg.weights == WeightScheme::kSigmoid ? 1.0 / static_cast<double>(n) : 1.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < d; ++k) g[k] += norm * weights[j] * encodings[j][k];
  } else {
    argmax.assign(d, 0);
    for (std::size_t k = 0; k < d; ++k) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        const double val = weights[j] * encodings[j][k];
        if (val > best) {  // first maximizer wins on ties
          best = val;
          argmax[k] = static_cast<int>(j);
        }
      }
      g[k] = best;
    }
  }
  if (cache) {
    cache->cfg = cfg;
    cache->weights = weights;
    cache->argmax = std::move(argmax);
    cache->n = n;
  }
  return g;
}

void attend_and_pool_backward(const std::vector<Vec>& encodings, const Vec& logits,
                              const AttendCache& cache, const Vec& dg,
                              std::vector<Vec>& dencodings, Vec& dlogits) {
  const std::size_t n = encodings.size();
  const std::size_t d = encodings[0].size();
  dencodings.assign(n, Vec(d, 0.0));
  dlogits.assign(n, 0.0);
  const AttentionConfig& cfg = cache.cfg;
  const Vec& w = cache.weights;

  Vec dweights(n, 0.0);
  if (cfg.pooling == Pooling::kAverage) {
    const double norm = cfg.weights == WeightScheme::kSigmoid ? 1.0 / static_cast<double>(n) : 1.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < d; ++k) {
        dencodings[j][k] += norm * w[j] * dg[k];
        dweights[j] += norm * encodings[j][k] * dg[k];
      }
  } else {
    for (std::size_t k = 0; k < d; ++k) {
      const auto j = static_cast<std::size_t>(cache.argmax[k]);
      dencodings[j][k] += w[j] * dg[k];
      dweights[j] += encodings[j][k] * dg[k];
    }
  }

  switch (cfg.weights) {
    case WeightScheme::kUniform:
      break;  // weights are constants
    case WeightScheme::kSoftmax:
      dlogits = ops::softmax_backward(w, dweights);
      break;
    case WeightScheme::kSigmoid:
      for (std::size_t j = 0; j < n; ++j) dlogits[j] = ops::sigmoid_grad(w[j]) * dweights[j];
      break;
  }
}

Model::Model(ModelConfig cfg, const WordEmbeddingTable* words)
    : cfg_(std::move(cfg)), words_(words) {
  if (cfg_.n_relations == 0) throw std::invalid_argument("model needs n_relations > 0");
  const std::size_t d_in = cfg_.input_dim();
  const std::size_t f = cfg_.n_filters;
  for (int x : cfg_.filter_sizes) {
    params_.add("conv_w" + std::to_string(x), {f, static_cast<std::size_t>(x) * d_in});
    params_.add("conv_b" + std::to_string(x), {f});
  }
  params_.add("W1", {cfg_.d_s, cfg_.filter_sizes.size() * f});
  params_.add("b1", {cfg_.d_s});
  params_.add("W2", {cfg_.h_exist, cfg_.d_s});
  params_.add("b2", {cfg_.h_exist});
  params_.add("W3", {1, cfg_.h_exist});
  params_.add("b3", {1});
  params_.add("W6", {cfg_.h_attn, 1});
  params_.add("b6", {cfg_.h_attn});
  params_.add("W7", {1, cfg_.h_attn});
  params_.add("b7", {1});
  params_.add("W4", {cfg_.h_out, cfg_.d_s + cfg_.d_w});
  params_.add("b4", {cfg_.h_out});
  params_.add("W5", {cfg_.n_relations, cfg_.h_out});
  params_.add("b5", {cfg_.n_relations});
  params_.add("dist_e1", {cfg_.n_distance_rows(), cfg_.d_pos});
  params_.add("dist_e2", {cfg_.n_distance_rows(), cfg_.d_pos});
}

void Model::init_params(std::uint64_t seed) {
  for (std::size_t i = 0; i < params_.count(); ++i) {
    const std::string& name = params_.name(i);
    Tensor& t = params_.tensor(i);
    std::mt19937_64 rng(derive_seed(seed, "init", hash_string(name)));
    if (name[0] == 'b' || name.rfind("conv_b", 0) == 0) {
      std::fill(t.v.begin(), t.v.end(), 0.0);
    } else if (name.rfind("dist_", 0) == 0) {
      std::normal_distribution<double> normal(0.0, 0.1);
      for (double& x : t.v) x = normal(rng);
    } else {
      const double limit =
          std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));  // Glorot uniform
      std::uniform_real_distribution<double> unif(-limit, limit);
      for (double& x : t.v) x = unif(rng);
    }
  }
}

std::vector<Vec> Model::input_repr(const SentenceInstance& sent, const ForwardMode& mode,
                                   std::vector<Vec>* mask_out) const {
  const std::size_t T = sent.tokens.size();
  if (sent.token_ids.size() != T)
    throw std::invalid_argument("sentence not indexed against the vocabulary");
  const std::size_t d_in = cfg_.input_dim();
  const Tensor& de1 = params_.get("dist_e1");
  const Tensor& de2 = params_.get("dist_e2");

  const Vec mask =
      ops::dropout_mask(T * d_in, cfg_.dropout, mode.train,
                        derive_seed(mode.run_seed, "dropout", sent.uid, mode.step));

  std::vector<Vec> v(T, Vec(d_in));
  if (mask_out) mask_out->assign(T, Vec(d_in));
  for (std::size_t i = 0; i < T; ++i) {
    const Vec& wrow = words_->row(sent.token_ids[i]);
    const auto r1 = static_cast<std::size_t>(sent.dist_e1[i] + kMaxDistance);
    const auto r2 = static_cast<std::size_t>(sent.dist_e2[i] + kMaxDistance);
    for (std::size_t dd = 0; dd < cfg_.d_w; ++dd) v[i][dd] = wrow[dd];
    for (std::size_t dd = 0; dd < cfg_.d_pos; ++dd) {
      v[i][cfg_.d_w + dd] = de1.at(r1, dd);
      v[i][cfg_.d_w + cfg_.d_pos + dd] = de2.at(r2, dd);
    }
    for (std::size_t dd = 0; dd < d_in; ++dd) {
      const double m = mask[i * d_in + dd];
      v[i][dd] *= m;
      if (mask_out) (*mask_out)[i][dd] = m;
    }
  }
  return v;
}

SentenceForward Model::forward_sentence(const SentenceInstance& sent,
                                        const ForwardMode& mode) const {
  SentenceForward fwd;
  fwd.inputs = input_repr(sent, mode, &fwd.mask);

  fwd.conv.resize(cfg_.filter_sizes.size());
  fwd.concat.reserve(cfg_.filter_sizes.size() * cfg_.n_filters);
  for (std::size_t xi = 0; xi < cfg_.filter_sizes.size(); ++xi) {
    const int x = cfg_.filter_sizes[xi];
    const Vec c = ops::conv_encode(fwd.inputs, params_.get("conv_w" + std::to_string(x)),
                                   params_.get("conv_b" + std::to_string(x)), x, &fwd.conv[xi]);
    fwd.concat.insert(fwd.concat.end(), c.begin(), c.end());
  }
  fwd.encoding = ops::affine(params_.get("W1"), params_.get("b1"), fwd.concat);

  fwd.exist_pre = ops::affine(params_.get("W2"), params_.get("b2"), fwd.encoding);
  fwd.exist_h = ops::relu(fwd.exist_pre);
  fwd.p_logit = ops::affine(params_.get("W3"), params_.get("b3"), fwd.exist_h)[0];
  fwd.p = ops::sigmoid(fwd.p_logit);

  fwd.attn_pre = ops::affine(params_.get("W6"), params_.get("b6"), Vec{fwd.p});
  fwd.attn_h = ops::relu(fwd.attn_pre);
  fwd.u = ops::affine(params_.get("W7"), params_.get("b7"), fwd.attn_h)[0];
  return fwd;
}

void Model::backward_sentence_core(const SentenceInstance& sent, const SentenceForward& fwd,
                                   const Vec& ds, double du, double dp_direct, double weight) {
  double dp = dp_direct * weight;
  if (du != 0.0) {
    const Vec dattn_h = ops::affine_backward(params_.get("W7"), params_.get("b7"), fwd.attn_h,
                                             Vec{du * weight});
    const Vec dattn_pre = ops::relu_backward(fwd.attn_pre, dattn_h);
    const Vec dp_vec =
        ops::affine_backward(params_.get("W6"), params_.get("b6"), Vec{fwd.p}, dattn_pre);
    dp += dp_vec[0];
  }

  Vec ds_total = ds;
  for (double& x : ds_total) x *= weight;
  if (ds_total.empty()) ds_total.assign(cfg_.d_s, 0.0);
  if (dp != 0.0) {
    const double dp_logit = dp * ops::sigmoid_grad(fwd.p);
    const Vec dexist_h = ops::affine_backward(params_.get("W3"), params_.get("b3"), fwd.exist_h,
                                              Vec{dp_logit});
    const Vec dexist_pre = ops::relu_backward(fwd.exist_pre, dexist_h);
    const Vec ds_from_p =
        ops::affine_backward(params_.get("W2"), params_.get("b2"), fwd.encoding, dexist_pre);
    for (std::size_t k = 0; k < cfg_.d_s; ++k) ds_total[k] += ds_from_p[k];
  }

  const Vec dconcat =
      ops::affine_backward(params_.get("W1"), params_.get("b1"), fwd.concat, ds_total);

  std::vector<Vec> dinputs(fwd.inputs.size(), Vec(cfg_.input_dim(), 0.0));
  for (std::size_t xi = 0; xi < cfg_.filter_sizes.size(); ++xi) {
    const int x = cfg_.filter_sizes[xi];
    const Vec slice(dconcat.begin() + static_cast<long>(xi * cfg_.n_filters),
                    dconcat.begin() + static_cast<long>((xi + 1) * cfg_.n_filters));
    ops::conv_backward(fwd.inputs, params_.get("conv_w" + std::to_string(x)),
                       params_.get("conv_b" + std::to_string(x)), x, fwd.conv[xi], slice,
                       &dinputs);
  }

  // word vectors are frozen; only the distance-embedding rows receive grads
  Tensor& de1 = params_.get("dist_e1");
  Tensor& de2 = params_.get("dist_e2");
  for (std::size_t i = 0; i < dinputs.size(); ++i) {
    const auto r1 = static_cast<std::size_t>(sent.dist_e1[i] + kMaxDistance);
    const auto r2 = static_cast<std::size_t>(sent.dist_e2[i] + kMaxDistance);
    for (std::size_t dd = 0; dd < cfg_.d_pos; ++dd) {
      de1.gat(r1, dd) += dinputs[i][cfg_.d_w + dd] * fwd.mask[i][cfg_.d_w + dd];
      de2.gat(r2, dd) +=
          dinputs[i][cfg_.d_w + cfg_.d_pos + dd] * fwd.mask[i][cfg_.d_w + cfg_.d_pos + dd];
    }
  }
}

void Model::backward_sentence(const SentenceInstance& sent, const SentenceForward& fwd, double dp,
                              double weight) {
  backward_sentence_core(sent, fwd, {}, 0.0, dp, weight);
}

BagForward Model::forward_bag(const Bag& bag, const Vec& entity_pair, const AttentionConfig& att,
                              const ForwardMode& mode) const {
  if (bag.sentences.empty()) throw std::invalid_argument("bag with no sentences: " + bag.pair_id);
  BagForward fwd;
  std::vector<Vec> encodings;
  Vec logits;
  for (const SentenceInstance& sent : bag.sentences) {
    fwd.sentences.push_back(forward_sentence(sent, mode));
    encodings.push_back(fwd.sentences.back().encoding);
    logits.push_back(fwd.sentences.back().u);
  }
  fwd.g = attend_and_pool(encodings, logits, att, &fwd.attend);
  fwd.m = entity_pair;
  fwd.gm = fwd.g;
  fwd.gm.insert(fwd.gm.end(), fwd.m.begin(), fwd.m.end());
  fwd.out_pre = ops::affine(params_.get("W4"), params_.get("b4"), fwd.gm);
  fwd.out_h = ops::relu(fwd.out_pre);
  fwd.logits = ops::affine(params_.get("W5"), params_.get("b5"), fwd.out_h);
  fwd.probs.resize(fwd.logits.size());
  for (std::size_t k = 0; k < fwd.logits.size(); ++k) fwd.probs[k] = ops::sigmoid(fwd.logits[k]);
  return fwd;
}

void Model::backward_bag(const Bag& bag, const BagForward& fwd, const Vec& dprobs, double weight) {
  Vec dlogits(dprobs.size());
  for (std::size_t k = 0; k < dprobs.size(); ++k)
    dlogits[k] = weight * dprobs[k] * ops::sigmoid_grad(fwd.probs[k]);
  const Vec dout_h = ops::affine_backward(params_.get("W5"), params_.get("b5"), fwd.out_h, dlogits);
  const Vec dout_pre = ops::relu_backward(fwd.out_pre, dout_h);
  const Vec dgm = ops::affine_backward(params_.get("W4"), params_.get("b4"), fwd.gm, dout_pre);
  const Vec dg(dgm.begin(), dgm.begin() + static_cast<long>(cfg_.d_s));
  // dgm tail is the entity-pair part; entity vectors are frozen word means

  std::vector<Vec> encodings;
  Vec logits;
  for (const SentenceForward& sf : fwd.sentences) {
    encodings.push_back(sf.encoding);
    logits.push_back(sf.u);
  }
  std::vector<Vec> dencodings;
  Vec dlog;
  attend_and_pool_backward(encodings, logits, fwd.attend, dg, dencodings, dlog);
  for (std::size_t j = 0; j < bag.sentences.size(); ++j)
    backward_sentence_core(bag.sentences[j], fwd.sentences[j], dencodings[j], dlog[j], 0.0, 1.0);
}

}  // namespace relex
