#pragma once

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "socialmotion/rng.h"

// Minimal reverse-mode differentiation over dense row-major-by-convention
// matrices. Sequences are stored as matrices with one row per time step;
// batched sequences of equal length are stacked vertically ("segments").
namespace socialmotion::ad {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() {
    grad.setZero(value.rows(), value.cols());
  }
};

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Gradient after Tape::backward; zero-sized when no gradient reached it.
  const Matrix& grad() const;
  Eigen::Index rows() const {
    return value().rows();
  }
  Eigen::Index cols() const {
    return value().cols();
  }
  Tape* tape() const {
    return tape_;
  }
  int id() const {
    return id_;
  }
  bool valid() const {
    return tape_ != nullptr;
  }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Differentiable input that is not a parameter; read its grad() after backward.
  Var leaf(Matrix value);
  // One node per parameter per tape; gradients accumulate into Parameter::grad.
  Var param(Parameter& p);

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates.
  void backward(Var root);

  // Op plumbing.
  Var push(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var push(Matrix value, std::span<const Var> inputs, BackwardFn fn);
  const Matrix& value(int id) const {
    return nodes_[id].value;
  }
  const Matrix& grad(int id) const {
    return nodes_[id].grad;
  }
  bool requires_grad(int id) const {
    return nodes_[id].requires_grad;
  }
  void accumulate(int id, const Matrix& g);
  template <typename Derived>
  void accumulate_expr(int id, const Eigen::MatrixBase<Derived>& g) {
    auto& node = nodes_[id];
    if (!node.requires_grad) {
      return;
    }
    if (node.grad.size() == 0) {
      node.grad = g;
    } else {
      node.grad += g;
    }
  }
  // Mutable gradient buffer, zero-initialized on first use.
  Matrix& grad_buffer(int id);

  std::size_t size() const {
    return nodes_.size();
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, int> param_ids_;
};

// Elementwise / shape ops.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_bias(Var a, Var bias); // bias is 1 x cols, broadcast over rows
Var matmul(Var a, Var b);
Var matmul_transposed(Var a, Var b); // a * b^T
Var transpose(Var a);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);

// Nonlinearities.
Var relu(Var a);
Var gelu(Var a); // tanh approximation
Var softmax_rows(Var a);
Var layer_norm_rows(Var a, Var gain, Var bias, double eps = 1e-5);
Var dropout(Var a, double rate, Rng& rng);

// Lookups and reductions.
Var embedding(Var table, std::span<const int> ids);
Var sum_all(Var a);
Var mean_all(Var a);

// Losses (1x1 results).
// Sum over rows of -log softmax(logits)[target]; rows whose target equals
// ignore_id contribute nothing.
Var cross_entropy_sum(Var logits, std::span<const int> targets, int ignore_id = -1);
Var smooth_l1_mean(Var a, const Matrix& target, double beta = 1.0);
Var mse_mean(Var a, const Matrix& target);

// Temporal (segment-aware) ops for stacked sequences.
// Rows of `x` are `segments` equal-length sequences. Output row (s, o) holds
// the kernel window [o*stride - pad, o*stride - pad + kernel) of segment s,
// zero outside the segment, flattened tap-major.
Var im2col(Var x, int segments, int kernel, int stride, int pad);
Var repeat_rows(Var x, int factor); // nearest-neighbour temporal upsampling
Var diff_rows(Var x, int segments); // per-segment first differences
// Forward value is `quantized`; gradient passes to `x` unchanged.
Var straight_through(Var x, const Matrix& quantized);

} // namespace socialmotion::ad
