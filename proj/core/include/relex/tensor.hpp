#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace relex {

using Vec = std::vector<double>;

// A named learned tensor: values plus a gradient slot of identical shape.
// Matrices are row-major, shape = {rows, cols}; vectors shape = {n}.
struct Tensor {
  std::vector<std::size_t> shape;
  Vec v;
  Vec g;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> sh);

  std::size_t size() const { return v.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() > 1 ? shape[1] : 1; }

  double& at(std::size_t r, std::size_t c) { return v[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols() + c]; }
  double& gat(std::size_t r, std::size_t c) { return g[r * cols() + c]; }

  void zero_grad();
};

// Ordered collection of named learned tensors. Iteration order is insertion
// order, which keeps optimizer sweeps and checkpoints deterministic.
class ParameterSet {
 public:
  Tensor& add(const std::string& name, std::vector<std::size_t> shape);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;

  std::size_t count() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  Tensor& tensor(std::size_t i) { return entries_[i].second; }
  const Tensor& tensor(std::size_t i) const { return entries_[i].second; }

  void zero_grads();
  std::size_t total_scalars() const;
  // L2 norm of all gradients, for global-norm clipping.
  double grad_norm() const;
  void scale_grads(double factor);

 private:
  // deque: references returned by add() stay valid as the set grows
  std::deque<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace relex
