#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "actgan/rng.hpp"
#include "actgan/tensor.hpp"

namespace actgan {

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
};

// Ordered collection of named learnable tensors. Registration order is the
// serialization order; bind() attaches every entry to a tape exactly once so
// gradient accumulation across shared uses stays additive.
template <typename T>
class ParamSet {
 public:
  std::shared_ptr<Param<T>> add(const std::string& name, Tensor<T> init) {
    for (const auto& e : entries_)
      if (e->name == name) fail_invalid("duplicate parameter name: " + name);
    auto p = std::make_shared<Param<T>>(Param<T>{name, std::move(init)});
    entries_.push_back(p);
    return p;
  }

  void bind(Tape<T>& tape) {
    for (auto& e : entries_) e->value = tape.leaf(e->value);
  }

  void unbind() {
    for (auto& e : entries_) e->value = e->value.detached();
  }

  const std::vector<std::shared_ptr<Param<T>>>& entries() const { return entries_; }

  std::shared_ptr<Param<T>> find(const std::string& name) const {
    for (const auto& e : entries_)
      if (e->name == name) return e;
    return nullptr;
  }

  int64_t total_size() const {
    int64_t n = 0;
    for (const auto& e : entries_) n += e->value.size();
    return n;
  }

 private:
  std::vector<std::shared_ptr<Param<T>>> entries_;
};

// Kaiming-uniform fan-in initialization for conv kernels.
template <typename T>
Tensor<T> kaiming_uniform(const Shape& shape, int64_t fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::vector<T> vals(static_cast<size_t>(numel(shape)));
  for (auto& v : vals) v = static_cast<T>(rng.uniform(-bound, bound));
  return Tensor<T>(shape, std::move(vals));
}

}  // namespace actgan
