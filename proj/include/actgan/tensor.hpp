#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "actgan/util.hpp"

namespace actgan {

using Shape = std::vector<int>;

inline int64_t numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

inline bool same_shape(const Shape& a, const Shape& b) { return a == b; }

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

template <typename T>
class Tape;

template <typename T>
class GradSink;

// Dense N-d array over contiguous values. Storage is shared and treated as
// immutable once an op has consumed it; mutable_data() exists for
// initialization and optimizer updates, which happen outside any live tape.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)) {
    if (numel(shape_) != static_cast<int64_t>(values.size()))
      fail_invalid("tensor: " + shape_str(shape_) + " does not hold " +
                   std::to_string(values.size()) + " values");
    data_ = std::make_shared<std::vector<T>>(std::move(values));
  }

  static Tensor zeros(Shape shape) {
    auto n = numel(shape);
    return Tensor(std::move(shape), std::vector<T>(static_cast<size_t>(n), T(0)));
  }

  static Tensor full(Shape shape, T v) {
    auto n = numel(shape);
    return Tensor(std::move(shape), std::vector<T>(static_cast<size_t>(n), v));
  }

  static Tensor scalar(T v) { return Tensor({1}, {v}); }

  const Shape& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t size() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }
  bool empty() const { return !data_ || data_->empty(); }

  const std::vector<T>& data() const { return *data_; }
  std::vector<T>& mutable_data() { return *data_; }
  std::shared_ptr<std::vector<T>> storage() const { return data_; }

  T item() const {
    if (size() != 1) fail_invalid("item(): tensor has " + std::to_string(size()) + " elements");
    return (*data_)[0];
  }

  Tape<T>* tape() const { return tape_; }
  int node() const { return node_; }
  bool on_tape() const { return tape_ != nullptr && node_ >= 0; }

  Tensor detached() const {
    Tensor t = *this;
    t.tape_ = nullptr;
    t.node_ = -1;
    return t;
  }

 private:
  friend class Tape<T>;
  Shape shape_;
  std::shared_ptr<std::vector<T>> data_;
  Tape<T>* tape_ = nullptr;
  int node_ = -1;
};

// Gradient accumulators indexed by tape node id. Backward rules either add()
// a full gradient or write into buffer() directly (scatter-style ops).
template <typename T>
class GradSink {
 public:
  explicit GradSink(std::vector<std::vector<T>>& bufs) : bufs_(bufs) {}

  std::vector<T>& buffer(int node, int64_t n) {
    auto& b = bufs_[static_cast<size_t>(node)];
    if (b.empty()) b.assign(static_cast<size_t>(n), T(0));
    return b;
  }

  void add(int node, const std::vector<T>& src) {
    auto& b = buffer(node, static_cast<int64_t>(src.size()));
    for (size_t i = 0; i < src.size(); ++i) b[i] += src[i];
  }

 private:
  std::vector<std::vector<T>>& bufs_;
};

template <typename T>
class Gradients {
 public:
  explicit Gradients(std::vector<std::vector<T>> bufs) : bufs_(std::move(bufs)) {}

  // Gradient of the loss w.r.t. `t`. Leaves unreachable from the loss get a
  // zero gradient of matching shape.
  Tensor<T> of(const Tensor<T>& t) const {
    if (!t.on_tape()) fail_invalid("gradient requested for a tensor not on the tape");
    const auto& buf = bufs_[static_cast<size_t>(t.node())];
    if (buf.empty()) return Tensor<T>::zeros(t.shape());
    return Tensor<T>(t.shape(), buf);
  }

 private:
  std::vector<std::vector<T>> bufs_;
};

// Append-only op recording for reverse-mode differentiation. Confined to one
// logical thread; parents always precede children, so reverse append order is
// a valid topological order for the backward sweep.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(const std::vector<T>& gout, GradSink<T>& sink)>;

  // Registers the tensor's storage as a differentiable leaf.
  Tensor<T> leaf(const Tensor<T>& t) {
    nodes_.push_back(NodeRec{{}, nullptr});
    return attach(t, static_cast<int>(nodes_.size()) - 1);
  }

  int record(std::vector<int> parents, BackwardFn backward) {
    nodes_.push_back(NodeRec{std::move(parents), std::move(backward)});
    return static_cast<int>(nodes_.size()) - 1;
  }

  Tensor<T> attach(Tensor<T> value, int node) {
    value.tape_ = this;
    value.node_ = node;
    return value;
  }

  // Reverse sweep from a scalar loss. Interior accumulators are released as
  // soon as their node has propagated; leaf gradients are retained.
  Gradients<T> backward(const Tensor<T>& loss) {
    if (loss.tape() != this || loss.node() < 0)
      fail_invalid("backward: loss is not attached to this tape");
    if (loss.size() != 1) fail_invalid("backward: loss must be a scalar");
    std::vector<std::vector<T>> bufs(nodes_.size());
    GradSink<T> sink(bufs);
    bufs[static_cast<size_t>(loss.node())] = {T(1)};
    for (int i = loss.node(); i >= 0; --i) {
      auto& rec = nodes_[static_cast<size_t>(i)];
      auto& gout = bufs[static_cast<size_t>(i)];
      if (gout.empty()) continue;
      if (rec.backward) {
        rec.backward(gout, sink);
        gout.clear();
        gout.shrink_to_fit();
      }
    }
    return Gradients<T>(std::move(bufs));
  }

  void clear() { nodes_.clear(); }
  size_t size() const { return nodes_.size(); }

 private:
  struct NodeRec {
    std::vector<int> parents;
    BackwardFn backward;  // null for leaves
  };
  std::vector<NodeRec> nodes_;
};

// Finds the tape shared by the given tensors; mixing tapes is an error.
template <typename T>
Tape<T>* common_tape(std::initializer_list<const Tensor<T>*> ts) {
  Tape<T>* tape = nullptr;
  for (const Tensor<T>* t : ts) {
    if (!t->on_tape()) continue;
    if (tape && tape != t->tape()) fail_invalid("operands belong to different tapes");
    tape = t->tape();
  }
  return tape;
}

#ifndef NDEBUG
template <typename T>
inline void debug_check_finite(const char* op, const std::vector<T>& v) {
  for (T x : v) {
    if (!std::isfinite(static_cast<double>(x)))
      fail_runtime(std::string("non-finite value produced by ") + op);
  }
}
#else
template <typename T>
inline void debug_check_finite(const char*, const std::vector<T>&) {}
#endif

}  // namespace actgan
