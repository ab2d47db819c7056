#include "relex/tensor.hpp"

#include <cmath>
#include <numeric>

namespace relex {

Tensor::Tensor(std::vector<std::size_t> sh) : shape(std::move(sh)) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  v.assign(n, 0.0);
  g.assign(n, 0.0);
}

void Tensor::zero_grad() { std::fill(g.begin(), g.end(), 0.0); }

Tensor& ParameterSet::add(const std::string& name, std::vector<std::size_t> shape) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
  index_[name] = entries_.size();
  entries_.emplace_back(name, Tensor(std::move(shape)));
  return entries_.back().second;
}

Tensor& ParameterSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return entries_[it->second].second;
}

const Tensor& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return entries_[it->second].second;
}

bool ParameterSet::has(const std::string& name) const { return index_.count(name) > 0; }

void ParameterSet::zero_grads() {
  for (auto& [name, t] : entries_) t.zero_grad();
}

std::size_t ParameterSet::total_scalars() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

double ParameterSet::grad_norm() const {
  double ss = 0.0;
  for (const auto& [name, t] : entries_)
    for (double x : t.g) ss += x * x;
  return std::sqrt(ss);
}

void ParameterSet::scale_grads(double factor) {
  for (auto& [name, t] : entries_)
    for (double& x : t.g) x *= factor;
}

}  // namespace relex
