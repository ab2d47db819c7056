#include "relex/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace relex::ops {

namespace {
void check_shapes(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw std::invalid_argument(std::string("shape mismatch in ") + what + ": got " +
                                std::to_string(got) + ", expected " + std::to_string(want));
}
}  // namespace

Vec affine(const Tensor& W, const Tensor& b, const Vec& x) {
  const std::size_t k = W.rows(), m = W.cols();
  check_shapes(x.size(), m, "affine input");
  check_shapes(b.size(), k, "affine bias");
  Vec y(k);
  for (std::size_t r = 0; r < k; ++r) {
    double acc = b.v[r];
    const double* wr = &W.v[r * m];
    for (std::size_t c = 0; c < m; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
  return y;
}

Vec affine_backward(Tensor& W, Tensor& b, const Vec& x, const Vec& gy) {
  const std::size_t k = W.rows(), m = W.cols();
  check_shapes(gy.size(), k, "affine grad");
  Vec dx(m, 0.0);
  for (std::size_t r = 0; r < k; ++r) {
    const double gr = gy[r];
    b.g[r] += gr;
    double* wgr = &W.g[r * m];
    const double* wr = &W.v[r * m];
    for (std::size_t c = 0; c < m; ++c) {
      wgr[c] += gr * x[c];
      dx[c] += wr[c] * gr;
    }
  }
  return dx;
}

double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec relu(const Vec& x) {
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0 ? x[i] : 0.0;
  return y;
}

Vec relu_backward(const Vec& x_pre, const Vec& gy) {
  Vec dx(x_pre.size());
  for (std::size_t i = 0; i < x_pre.size(); ++i) dx[i] = x_pre[i] > 0 ? gy[i] : 0.0;
  return dx;
}

Vec softmax(const Vec& x) {
  if (x.empty()) throw std::invalid_argument("softmax over empty set");
  const double mx = *std::max_element(x.begin(), x.end());
  Vec y(x.size());
  double z = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = std::exp(x[i] - mx);
    z += y[i];
  }
  for (double& v : y) v /= z;
  return y;
}

Vec softmax_backward(const Vec& y, const Vec& gy) {
  double dot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * gy[i];
  Vec dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] * (gy[i] - dot);
  return dx;
}

double bce(double p, double t) {
  const double pc = std::clamp(p, kBceEps, 1.0 - kBceEps);
  return -(t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc));
}

double bce_grad(double p, double t) {
  const double pc = std::clamp(p, kBceEps, 1.0 - kBceEps);
  return (pc - t) / (pc * (1.0 - pc));
}

Vec conv_encode(const std::vector<Vec>& inputs, const Tensor& filters,
                const Tensor& bias, int width, ConvCache* cache) {
  if (inputs.empty()) throw std::invalid_argument("conv_encode on empty sequence");
  const std::size_t dim = inputs[0].size();
  const std::size_t f = filters.rows();
  check_shapes(filters.cols(), static_cast<std::size_t>(width) * dim, "conv filters");
  const int T = static_cast<int>(inputs.size());
  const int n_pos = std::max(T - width + 1, 1);  // short sequences: one zero-padded window

  Vec out(f);
  if (cache) {
    cache->argmax.assign(f, 0);
    cache->n_positions = n_pos;
  }
  for (std::size_t k = 0; k < f; ++k) {
    const double* w = &filters.v[k * filters.cols()];
    double best = -std::numeric_limits<double>::infinity();
    int best_pos = 0;
    for (int pos = 0; pos < n_pos; ++pos) {
      double score = bias.v[k];
      for (int o = 0; o < width; ++o) {
        const int t = pos + o;
        if (t >= T) break;  // zero padding contributes nothing
        const double* wi = w + static_cast<std::size_t>(o) * dim;
        const Vec& x = inputs[t];
        for (std::size_t d = 0; d < dim; ++d) score += wi[d] * x[d];
      }
      if (score > best) {  // ties keep the first maximizing position
        best = score;
        best_pos = pos;
      }
    }
    out[k] = best;
    if (cache) cache->argmax[k] = best_pos;
  }
  return out;
}

void conv_backward(const std::vector<Vec>& inputs, Tensor& filters, Tensor& bias,
                   int width, const ConvCache& cache, const Vec& gy,
                   std::vector<Vec>* dinputs) {
  const std::size_t dim = inputs[0].size();
  const int T = static_cast<int>(inputs.size());
  for (std::size_t k = 0; k < filters.rows(); ++k) {
    const double gk = gy[k];
    if (gk == 0.0) continue;
    bias.g[k] += gk;
    const int pos = cache.argmax[k];
    double* wg = &filters.g[k * filters.cols()];
    const double* w = &filters.v[k * filters.cols()];
    for (int o = 0; o < width; ++o) {
      const int t = pos + o;
      if (t >= T) break;
      const Vec& x = inputs[t];
      double* wgo = wg + static_cast<std::size_t>(o) * dim;
      const double* wo = w + static_cast<std::size_t>(o) * dim;
      for (std::size_t d = 0; d < dim; ++d) {
        wgo[d] += gk * x[d];
        if (dinputs) (*dinputs)[t][d] += gk * wo[d];
      }
    }
  }
}

Vec dropout_mask(std::size_t n, double p, bool train, std::uint64_t stream_seed) {
  Vec mask(n, 1.0);
  if (!train || p <= 0.0) return mask;
  if (p >= 1.0) throw std::invalid_argument("dropout probability must be < 1");
  std::mt19937_64 rng(stream_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < n; ++i) mask[i] = unif(rng) < p ? 0.0 : keep_scale;
  return mask;
}

void AdamState::init(const ParameterSet& params) {
  m.clear();
  v.clear();
  for (std::size_t i = 0; i < params.count(); ++i) {
    m.emplace_back(params.tensor(i).size(), 0.0);
    v.emplace_back(params.tensor(i).size(), 0.0);
  }
  step = 0;
}

void adam_step(ParameterSet& params, AdamState& state, const AdamConfig& cfg) {
  if (!state.initialized()) state.init(params);
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor& t = params.tensor(i);
    Vec& m = state.m[i];
    Vec& v = state.v[i];
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double g = t.g[j];
      if (!std::isfinite(g))
        throw std::runtime_error("non-finite gradient in parameter " + params.name(i));
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      t.v[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

double grad_check(ParameterSet& params, const std::function<double()>& loss, double h) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor& t = params.tensor(i);
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double saved = t.v[j];
      t.v[j] = saved + h;
      const double lp = loss();
      t.v[j] = saved - h;
      const double lm = loss();
      t.v[j] = saved;
      const double fd = (lp - lm) / (2.0 * h);
      const double g = t.g[j];
      const double err = std::abs(fd - g) / std::max(std::abs(fd) + std::abs(g), 1e-3);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace relex::ops
