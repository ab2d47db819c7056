#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "relex/tensor.hpp"

namespace relex::ops {

// y = Wx + b.  W is {k, m}, x has m entries, b has k.
Vec affine(const Tensor& W, const Tensor& b, const Vec& x);
// Accumulates dW += gy * x^T, db += gy and returns dx = W^T gy.
Vec affine_backward(Tensor& W, Tensor& b, const Vec& x, const Vec& gy);

double sigmoid(double x);
inline double sigmoid_grad(double y) { return y * (1.0 - y); }  // y = sigmoid(x)

Vec relu(const Vec& x);
// dx given the pre-activation input.
Vec relu_backward(const Vec& x_pre, const Vec& gy);

// Numerically stable softmax (max subtraction). Input must be non-empty.
Vec softmax(const Vec& x);
// dx from dy given y = softmax(x).
Vec softmax_backward(const Vec& y, const Vec& gy);

// Clamped binary cross-entropy. p is clamped to [eps, 1-eps] before the log.
inline constexpr double kBceEps = 1e-7;
double bce(double p, double t);
// dL/dp evaluated at the clamped probability.
double bce_grad(double p, double t);

// Multi-filter 1-D convolution with per-filter max pooling over positions.
// filters is {f, width*dim}; sequences shorter than the filter width are
// zero-padded to one window. Returns the f pooled responses.
struct ConvCache {
  std::vector<int> argmax;  // per filter, winning window start
  int n_positions = 0;
};
Vec conv_encode(const std::vector<Vec>& inputs, const Tensor& filters,
                const Tensor& bias, int width, ConvCache* cache);
// Accumulates filter/bias grads and adds input grads into dinputs
// (same geometry as inputs).
void conv_backward(const std::vector<Vec>& inputs, Tensor& filters, Tensor& bias,
                   int width, const ConvCache& cache, const Vec& gy,
                   std::vector<Vec>* dinputs);

// Inverted dropout: train mode zeroes entries with probability p and scales
// survivors by 1/(1-p); eval mode is the identity. The mask is a pure
// function of the stream seed, so a forward pass is repeatable.
// Returns the per-element multiplier applied (1.0 everywhere in eval mode).
Vec dropout_mask(std::size_t n, double p, bool train, std::uint64_t stream_seed);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Vec> m;  // first moments, parallel to the ParameterSet
  std::vector<Vec> v;  // second moments
  std::int64_t step = 0;

  void init(const ParameterSet& params);
  bool initialized() const { return !m.empty(); }
};

// One Adam update over every tensor in params using its gradient slot.
// Throws std::runtime_error naming the parameter on a non-finite gradient.
void adam_step(ParameterSet& params, AdamState& state, const AdamConfig& cfg);

// Central finite differences over every coordinate of every parameter.
// Returns the worst relative error. loss() must be deterministic.
double grad_check(ParameterSet& params, const std::function<double()>& loss,
                  double h = 1e-3);

}  // namespace relex::ops
