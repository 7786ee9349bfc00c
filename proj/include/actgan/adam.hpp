#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "actgan/params.hpp"
#include "actgan/tensor.hpp"

namespace actgan {

template <typename T>
struct AdamConfig {
  T lr = static_cast<T>(1e-4);
  T beta1 = static_cast<T>(0.5);
  T beta2 = static_cast<T>(0.999);
  T eps = static_cast<T>(1e-8);
};

// Adam with bias correction. A parameter whose gradient contains a non-finite
// value keeps its old value and moments for that step; the step counter still
// advances and training continues.
template <typename T>
class Adam {
 public:
  Adam(const ParamSet<T>& params, AdamConfig<T> cfg) : cfg_(cfg) {
    m_.reserve(params.entries().size());
    v_.reserve(params.entries().size());
    for (const auto& e : params.entries()) {
      m_.emplace_back(static_cast<size_t>(e->value.size()), T(0));
      v_.emplace_back(static_cast<size_t>(e->value.size()), T(0));
    }
  }

  void set_lr(T lr) { cfg_.lr = lr; }
  T lr() const { return cfg_.lr; }
  int64_t step_count() const { return t_; }
  int64_t rejected_params() const { return rejected_; }

  // `params` must still be bound to the tape that produced `grads`.
  void step(const ParamSet<T>& params, const Gradients<T>& grads) {
    ++t_;
    const T bc1 = T(1) - std::pow(cfg_.beta1, static_cast<T>(t_));
    const T bc2 = T(1) - std::pow(cfg_.beta2, static_cast<T>(t_));
    const auto& entries = params.entries();
    for (size_t i = 0; i < entries.size(); ++i) {
      Tensor<T> g = grads.of(entries[i]->value);
      bool finite = true;
      for (T gv : g.data()) {
        if (!std::isfinite(static_cast<double>(gv))) {
          finite = false;
          break;
        }
      }
      if (!finite) {
        ++rejected_;
        continue;
      }
      auto& m = m_[i];
      auto& v = v_[i];
      auto& w = entries[i]->value.mutable_data();
      const auto& gd = g.data();
      for (size_t j = 0; j < w.size(); ++j) {
        m[j] = cfg_.beta1 * m[j] + (T(1) - cfg_.beta1) * gd[j];
        v[j] = cfg_.beta2 * v[j] + (T(1) - cfg_.beta2) * gd[j] * gd[j];
        const T mhat = m[j] / bc1;
        const T vhat = v[j] / bc2;
        w[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
    }
  }

  // Serialization access: moments are index-aligned with the ParamSet.
  std::vector<std::vector<T>>& moments_m() { return m_; }
  std::vector<std::vector<T>>& moments_v() { return v_; }
  void set_step_count(int64_t t) { t_ = t; }

 private:
  AdamConfig<T> cfg_;
  std::vector<std::vector<T>> m_, v_;
  int64_t t_ = 0;
  int64_t rejected_ = 0;
};

}  // namespace actgan
