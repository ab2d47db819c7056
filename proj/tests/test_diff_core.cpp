#include <doctest.h>

#include <cmath>
#include <random>

#include "relex/ops.hpp"
#include "relex/rng.hpp"

using namespace relex;

namespace {

Vec random_vec(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

void randomize(Tensor& t, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  for (double& x : t.v) x = normal(rng);
}

}  // namespace

TEST_CASE("affine identity and hand arithmetic") {
  ParameterSet ps;
  Tensor& W = ps.add("W", {2, 2});
  Tensor& b = ps.add("b", {2});
  W.at(0, 0) = 1;
  W.at(1, 1) = 1;
  CHECK(ops::affine(W, b, {3.0, -2.0}) == Vec{3.0, -2.0});

  W.v = {1, 1, 0, 1};
  b.v = {0, 1};
  CHECK(ops::affine(W, b, {1.0, 2.0}) == Vec{3.0, 3.0});
}

TEST_CASE("affine rejects shape mismatch") {
  ParameterSet ps;
  Tensor& W = ps.add("W", {2, 3});
  Tensor& b = ps.add("b", {2});
  CHECK_THROWS_AS(ops::affine(W, b, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("affine gradient matches finite differences on a random 5x7 case") {
  std::mt19937_64 rng(11);
  ParameterSet ps;
  Tensor& W = ps.add("W", {5, 7});
  Tensor& b = ps.add("b", {5});
  randomize(W, rng);
  randomize(b, rng);
  const Vec x = random_vec(7, rng);
  const Vec target = random_vec(5, rng);

  // loss = 0.5 * ||Wx + b - target||^2
  auto loss = [&]() {
    const Vec y = ops::affine(W, b, x);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += 0.5 * (y[i] - target[i]) * (y[i] - target[i]);
    return l;
  };
  ps.zero_grads();
  const Vec y = ops::affine(W, b, x);
  Vec gy(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) gy[i] = y[i] - target[i];
  ops::affine_backward(W, b, x, gy);
  CHECK(ops::grad_check(ps, loss) < 1e-4);
}

TEST_CASE("activations: fixed points and stability") {
  CHECK(ops::sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(ops::softmax({4.2}) == Vec{1.0});
  const Vec big = ops::softmax({1000.0, 1000.0});
  CHECK(big[0] == doctest::Approx(0.5));
  CHECK(big[1] == doctest::Approx(0.5));
  CHECK(std::isfinite(big[0]));
  CHECK(ops::relu({-1.0, 0.0, 2.5}) == Vec{0.0, 0.0, 2.5});
  CHECK_THROWS_AS(ops::softmax({}), std::invalid_argument);
}

TEST_CASE("softmax outputs sum to 1 and are strictly positive") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec y = ops::softmax(random_vec(1 + trial % 7, rng, 3.0));
    double sum = 0.0;
    for (double v : y) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("conv_encode: degenerate length uses one zero-padded window") {
  ParameterSet ps;
  Tensor& W = ps.add("f", {1, 2 * 3});
  Tensor& b = ps.add("fb", {1});
  W.v = {1, 2, 3, 4, 5, 6};
  b.v = {0.5};
  // T=1 < width=2: second window slot is zero padding
  const Vec out = ops::conv_encode({{1.0, 1.0, 1.0}}, W, b, 2, nullptr);
  CHECK(out[0] == doctest::Approx(1 + 2 + 3 + 0.5));
}

TEST_CASE("conv_encode detects a planted bigram with an indicator filter") {
  // one-hot tokens of dim 3; filter fires exactly on the bigram (1, 2)
  ParameterSet ps;
  Tensor& W = ps.add("f", {1, 2 * 3});
  Tensor& b = ps.add("fb", {1});
  W.v = {0, 1, 0, 0, 0, 1};
  b.v = {-1.0};  // response 1 iff both positions match
  auto onehot = [](int k) {
    Vec v(3, 0.0);
    v[static_cast<std::size_t>(k)] = 1.0;
    return v;
  };
  const Vec with = ops::conv_encode({onehot(0), onehot(1), onehot(2)}, W, b, 2, nullptr);
  CHECK(with[0] == doctest::Approx(1.0));
  const Vec without = ops::conv_encode({onehot(2), onehot(1), onehot(0)}, W, b, 2, nullptr);
  CHECK(without[0] < 1.0);
}

TEST_CASE("conv gradient matches finite differences") {
  std::mt19937_64 rng(17);
  ParameterSet ps;
  const std::size_t f = 3, dim = 4;
  const int width = 3;
  Tensor& W = ps.add("f", {f, static_cast<std::size_t>(width) * dim});
  Tensor& b = ps.add("fb", {f});
  randomize(W, rng);
  randomize(b, rng);
  std::vector<Vec> inputs;
  for (int t = 0; t < 6; ++t) inputs.push_back(random_vec(dim, rng));
  const Vec target = random_vec(f, rng);

  auto loss = [&]() {
    const Vec y = ops::conv_encode(inputs, W, b, width, nullptr);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += 0.5 * (y[i] - target[i]) * (y[i] - target[i]);
    return l;
  };
  ps.zero_grads();
  ops::ConvCache cache;
  const Vec y = ops::conv_encode(inputs, W, b, width, &cache);
  Vec gy(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) gy[i] = y[i] - target[i];
  std::vector<Vec> dinputs(inputs.size(), Vec(dim, 0.0));
  ops::conv_backward(inputs, W, b, width, cache, gy, &dinputs);
  CHECK(ops::grad_check(ps, loss) < 1e-4);
}

TEST_CASE("dropout: identity cases") {
  const Vec keep_all = ops::dropout_mask(16, 0.0, true, 7);
  for (double m : keep_all) CHECK(m == 1.0);
  const Vec eval = ops::dropout_mask(16, 0.1, false, 7);
  for (double m : eval) CHECK(m == 1.0);
}

TEST_CASE("dropout preserves expectation in train mode") {
  const double p = 0.1;
  const std::size_t n = 64;
  double sum = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const Vec mask = ops::dropout_mask(n, p, true, derive_seed(123, "mc", t));
    for (double m : mask) sum += m;
  }
  const double avg = sum / (static_cast<double>(trials) * n);
  CHECK(avg == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("dropout mask is a pure function of the stream seed") {
  CHECK(ops::dropout_mask(32, 0.1, true, 99) == ops::dropout_mask(32, 0.1, true, 99));
  CHECK(ops::dropout_mask(32, 0.1, true, 99) != ops::dropout_mask(32, 0.1, true, 100));
}

TEST_CASE("bce analytic values and gradient") {
  CHECK(ops::bce(0.5, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(ops::bce(1.0, 1.0) <= -std::log(1.0 - ops::kBceEps) + 1e-12);
  CHECK(ops::bce(0.0, 0.0) <= -std::log(1.0 - ops::kBceEps) + 1e-12);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  for (int i = 0; i < 20; ++i) {
    const double p = unif(rng);
    const double t = static_cast<double>(i % 2);
    const double h = 1e-6;
    const double fd = (ops::bce(p + h, t) - ops::bce(p - h, t)) / (2 * h);
    CHECK(std::abs(fd - ops::bce_grad(p, t)) / std::max(std::abs(fd), 1.0) < 1e-4);
  }
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  ParameterSet ps;
  Tensor& w = ps.add("w", {3});
  w.v = {1.0, -2.0, 0.5};
  const Vec before = w.v;
  ops::AdamState st;
  ps.zero_grads();
  ops::adam_step(ps, st, {});
  CHECK(w.v == before);
}

TEST_CASE("adam: one bias-corrected step with constant unit gradient") {
  ParameterSet ps;
  Tensor& w = ps.add("w", {1});
  ops::AdamState st;
  ops::AdamConfig cfg;
  w.g[0] = 1.0;
  ops::adam_step(ps, st, cfg);
  // closed form: mhat = 1, vhat = 1, update = -lr / (1 + eps)
  const double expected = -cfg.lr / (1.0 + cfg.eps);
  CHECK(w.v[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("adam converges on a quadratic bowl") {
  ParameterSet ps;
  Tensor& w = ps.add("w", {1});
  w.v[0] = 3.0;
  ops::AdamState st;
  ops::AdamConfig cfg;
  cfg.lr = 0.05;  // |update| <= lr, so reaching 0 from 3.0 needs enough steps
  for (int i = 0; i < 5000; ++i) {
    ps.zero_grads();
    w.g[0] = 2.0 * w.v[0];  // d/dw of w^2
    ops::adam_step(ps, st, cfg);
  }
  CHECK(std::abs(w.v[0]) < 1e-2);
}

TEST_CASE("adam rejects non-finite gradients with the parameter name") {
  ParameterSet ps;
  ps.add("healthy", {2});
  Tensor& bad = ps.add("exploded", {1});
  bad.g[0] = std::numeric_limits<double>::quiet_NaN();
  ops::AdamState st;
  CHECK_THROWS_WITH_AS(ops::adam_step(ps, st, {}), doctest::Contains("exploded"),
                       std::runtime_error);
}
