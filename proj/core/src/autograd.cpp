#include "socialmotion/autograd.h"

#include <cmath>
#include <numbers>
#include <string>

#include "socialmotion/error.h"

namespace socialmotion::ad {

const Matrix& Var::value() const {
  return tape_->value(id_);
}

const Matrix& Var::grad() const {
  return tape_->grad(id_);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, nullptr, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(Parameter& p) {
  const auto it = param_ids_.find(&p);
  if (it != param_ids_.end()) {
    return Var(this, it->second);
  }
  nodes_.push_back(Node{p.value, Matrix(), true, &p, nullptr});
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_ids_.emplace(&p, id);
  return Var(this, id);
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
}

Var Tape::push(Matrix value, std::span<const Var> inputs, BackwardFn fn) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape() != this) {
      fail(ErrorCode::InvalidArgument, "autograd inputs come from a different tape");
    }
    needs = needs || nodes_[v.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs, nullptr, needs ? std::move(fn) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& g) {
  accumulate_expr(id, g);
}

Matrix& Tape::grad_buffer(int id) {
  auto& node = nodes_[id];
  if (node.grad.size() == 0) {
    node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::backward(Var root) {
  if (root.tape() != this || root.rows() != 1 || root.cols() != 1) {
    fail(ErrorCode::InvalidArgument, "backward needs a 1x1 root on this tape");
  }
  for (auto& n : nodes_) {
    n.grad.resize(0, 0);
  }
  nodes_[root.id()].grad = Matrix::Ones(1, 1);
  for (int id = root.id(); id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.grad.size() == 0) {
      continue;
    }
    if (node.backward) {
      node.backward(*this, id);
    }
    if (node.param != nullptr) {
      node.param->grad += node.grad;
    }
  }
}

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::ShapeMismatch,
         std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
             " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + " differ");
  }
}

} // namespace

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Tape& t = *a.tape();
  const int ia = a.id();
  const int ib = b.id();
  return t.push(a.value() + b.value(), {a, b}, [ia, ib](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad(self));
    tp.accumulate(ib, tp.grad(self));
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Tape& t = *a.tape();
  const int ia = a.id();
  const int ib = b.id();
  return t.push(a.value() - b.value(), {a, b}, [ia, ib](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad(self));
    tp.accumulate_expr(ib, -tp.grad(self));
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  Tape& t = *a.tape();
  const int ia = a.id();
  const int ib = b.id();
  return t.push(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& tp, int self) {
    tp.accumulate_expr(ia, tp.grad(self).cwiseProduct(tp.value(ib)));
    tp.accumulate_expr(ib, tp.grad(self).cwiseProduct(tp.value(ia)));
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape();
  const int ia = a.id();
  return t.push(a.value() * s, {a}, [ia, s](Tape& tp, int self) { tp.accumulate_expr(ia, tp.grad(self) * s); });
}

Var add_bias(Var a, Var bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    fail(ErrorCode::ShapeMismatch, "add_bias: bias must be 1 x " + std::to_string(a.cols()));
  }
  Tape& t = *a.tape();
  const int ia = a.id();
  const int ib = bias.id();
  Matrix out = a.value();
  out.rowwise() += bias.value().row(0);
  return t.push(std::move(out), {a, bias}, [ia, ib](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad(self));
    tp.accumulate_expr(ib, tp.grad(self).colwise().sum());
  });
}

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    fail(ErrorCode::ShapeMismatch, "matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                                       std::to_string(b.rows()) + " differ");
  }
  Tape& t = *a.tape();
  const int ia = a.id();
  const int ib = b.id();
  Matrix out = a.value() * b.value();
  return t.push(std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      tp.accumulate_expr(ia, g * tp.value(ib).transpose());
    }
    if (tp.requires_grad(ib)) {
      tp.accumulate_expr(ib, tp.value(ia).transpose() * g);
    }
  });
}

Var matmul_transposed(Var a, Var b) {
  if (a.cols() != b.cols()) {
    fail(ErrorCode::ShapeMismatch, "matmul_transposed: column counts differ");
  }
  Tape& t = *a.tape();
  const int ia = a.id();
  const int ib = b.id();
  Matrix out = a.value() * b.value().transpose();
  return t.push(std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      tp.accumulate_expr(ia, g * tp.value(ib));
    }
    if (tp.requires_grad(ib)) {
      tp.accumulate_expr(ib, g.transpose() * tp.value(ia));
    }
  });
}

Var transpose(Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  return t.push(a.value().transpose(), {a},
                [ia](Tape& tp, int self) { tp.accumulate_expr(ia, tp.grad(self).transpose()); });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    fail(ErrorCode::OutOfRange, "slice_cols out of range");
  }
  Tape& t = *a.tape();
  const int ia = a.id();
  return t.push(a.value().middleCols(start, count), {a}, [ia, start, count](Tape& tp, int self) {
    if (!tp.requires_grad(ia)) {
      return;
    }
    tp.grad_buffer(ia).middleCols(start, count) += tp.grad(self);
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    fail(ErrorCode::OutOfRange, "slice_rows out of range");
  }
  Tape& t = *a.tape();
  const int ia = a.id();
  return t.push(a.value().middleRows(start, count), {a}, [ia, start, count](Tape& tp, int self) {
    if (!tp.requires_grad(ia)) {
      return;
    }
    tp.grad_buffer(ia).middleRows(start, count) += tp.grad(self);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) {
    fail(ErrorCode::InvalidArgument, "concat_cols of nothing");
  }
  Tape& t = *parts[0].tape();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != parts[0].rows()) {
      fail(ErrorCode::ShapeMismatch, "concat_cols: row counts differ");
    }
    cols += p.cols();
  }
  Matrix out(parts[0].rows(), cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(at);
    at += p.cols();
  }
  return t.push(std::move(out), parts, [ids, offsets](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.requires_grad(ids[k])) {
        tp.accumulate_expr(ids[k], g.middleCols(offsets[k], tp.value(ids[k]).cols()));
      }
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) {
    fail(ErrorCode::InvalidArgument, "concat_rows of nothing");
  }
  Tape& t = *parts[0].tape();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != parts[0].cols()) {
      fail(ErrorCode::ShapeMismatch, "concat_rows: column counts differ");
    }
    rows += p.rows();
  }
  Matrix out(rows, parts[0].cols());
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index at = 0;
  for (const Var& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(at);
    at += p.rows();
  }
  return t.push(std::move(out), parts, [ids, offsets](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.requires_grad(ids[k])) {
        tp.accumulate_expr(ids[k], g.middleRows(offsets[k], tp.value(ids[k]).rows()));
      }
    }
  });
}

Var relu(Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  return t.push(a.value().cwiseMax(0.0), {a}, [ia](Tape& tp, int self) {
    const Matrix& x = tp.value(ia);
    tp.accumulate_expr(ia, tp.grad(self).cwiseProduct((x.array() > 0.0).cast<double>().matrix()));
  });
}

Var gelu(Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  constexpr double k = 0.7978845608028654; // sqrt(2/pi)
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    out.data()[i] = 0.5 * v * (1.0 + std::tanh(k * (v + 0.044715 * v * v * v)));
  }
  return t.push(std::move(out), {a}, [ia](Tape& tp, int self) {
    const Matrix& xv = tp.value(ia);
    const Matrix& g = tp.grad(self);
    Matrix d(xv.rows(), xv.cols());
    for (Eigen::Index i = 0; i < xv.size(); ++i) {
      const double v = xv.data()[i];
      const double th = std::tanh(k * (v + 0.044715 * v * v * v));
      const double dudx = k * (1.0 + 3.0 * 0.044715 * v * v);
      d.data()[i] = g.data()[i] * (0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * dudx);
    }
    tp.accumulate(ia, d);
  });
}

Var softmax_rows(Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Matrix y = a.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const double m = y.row(r).maxCoeff();
    y.row(r) = (y.row(r).array() - m).exp().matrix();
    y.row(r) /= y.row(r).sum();
  }
  return t.push(std::move(y), {a}, [ia](Tape& tp, int self) {
    const Matrix& yv = tp.value(self);
    const Matrix& g = tp.grad(self);
    const Eigen::VectorXd dot = g.cwiseProduct(yv).rowwise().sum();
    Matrix d = g;
    d.colwise() -= dot;
    tp.accumulate_expr(ia, yv.cwiseProduct(d));
  });
}

Var layer_norm_rows(Var a, Var gain, Var bias, double eps) {
  const Eigen::Index c = a.cols();
  if (gain.rows() != 1 || gain.cols() != c || bias.rows() != 1 || bias.cols() != c) {
    fail(ErrorCode::ShapeMismatch, "layer_norm_rows: gain/bias must be 1 x cols");
  }
  Tape& t = *a.tape();
  const Matrix& x = a.value();
  const Eigen::VectorXd mean = x.rowwise().mean();
  Matrix xhat = x;
  xhat.colwise() -= mean;
  const Eigen::VectorXd inv_std =
      ((xhat.array().square().rowwise().sum() / static_cast<double>(c)) + eps).rsqrt().matrix();
  xhat = inv_std.asDiagonal() * xhat;
  Matrix y = xhat * gain.value().row(0).asDiagonal();
  y.rowwise() += bias.value().row(0);
  const int ia = a.id();
  const int ig = gain.id();
  const int ib = bias.id();
  return t.push(std::move(y), {a, gain, bias}, [ia, ig, ib, xhat, inv_std, c](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    if (tp.requires_grad(ig)) {
      tp.accumulate_expr(ig, g.cwiseProduct(xhat).colwise().sum());
    }
    if (tp.requires_grad(ib)) {
      tp.accumulate_expr(ib, g.colwise().sum());
    }
    if (tp.requires_grad(ia)) {
      const Matrix dxhat = g * tp.value(ig).row(0).asDiagonal();
      const Eigen::VectorXd m1 = dxhat.rowwise().mean();
      const Eigen::VectorXd m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
      Matrix dx = dxhat;
      dx.colwise() -= m1;
      dx -= m2.asDiagonal() * xhat;
      dx = inv_std.asDiagonal() * dx;
      (void)c;
      tp.accumulate(ia, dx);
    }
  });
}

Var dropout(Var a, double rate, Rng& rng) {
  if (rate <= 0.0) {
    return a;
  }
  if (rate >= 1.0) {
    fail(ErrorCode::InvalidArgument, "dropout rate must be below 1");
  }
  Tape& t = *a.tape();
  const int ia = a.id();
  Matrix mask(a.rows(), a.cols());
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform() < rate ? 0.0 : keep;
  }
  Matrix out = a.value().cwiseProduct(mask);
  return t.push(std::move(out), {a},
                [ia, mask](Tape& tp, int self) { tp.accumulate_expr(ia, tp.grad(self).cwiseProduct(mask)); });
}

Var embedding(Var table, std::span<const int> ids) {
  Tape& t = *table.tape();
  const Matrix& w = table.value();
  Matrix out(static_cast<Eigen::Index>(ids.size()), w.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= w.rows()) {
      fail(ErrorCode::OutOfRange, "embedding id " + std::to_string(ids[r]) + " outside table of " +
                                      std::to_string(w.rows()));
    }
    out.row(static_cast<Eigen::Index>(r)) = w.row(ids[r]);
  }
  const int it = table.id();
  std::vector<int> idv(ids.begin(), ids.end());
  return t.push(std::move(out), {table}, [it, idv](Tape& tp, int self) {
    if (!tp.requires_grad(it)) {
      return;
    }
    Matrix& gt = tp.grad_buffer(it);
    const Matrix& g = tp.grad(self);
    for (std::size_t r = 0; r < idv.size(); ++r) {
      gt.row(idv[r]) += g.row(static_cast<Eigen::Index>(r));
    }
  });
}

Var sum_all(Var a) {
  Tape& t = *a.tape();
  const int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.push(std::move(out), {a}, [ia](Tape& tp, int self) {
    const double g = tp.grad(self)(0, 0);
    tp.accumulate_expr(ia, Matrix::Constant(tp.value(ia).rows(), tp.value(ia).cols(), g));
  });
}

Var mean_all(Var a) {
  return scale(sum_all(a), 1.0 / static_cast<double>(std::max<Eigen::Index>(1, a.value().size())));
}

Var cross_entropy_sum(Var logits, std::span<const int> targets, int ignore_id) {
  const Matrix& z = logits.value();
  if (z.rows() != static_cast<Eigen::Index>(targets.size())) {
    fail(ErrorCode::ShapeMismatch, "cross_entropy: one target per logit row required");
  }
  Tape& t = *logits.tape();
  Matrix probs(z.rows(), z.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    probs.row(r) = (z.row(r).array() - m).exp().matrix();
    const double total = probs.row(r).sum();
    probs.row(r) /= total;
    const int target = targets[static_cast<std::size_t>(r)];
    if (target == ignore_id) {
      continue;
    }
    if (target < 0 || target >= z.cols()) {
      fail(ErrorCode::OutOfRange, "cross_entropy: target id out of range");
    }
    loss += -(z(r, target) - m - std::log(total));
  }
  Matrix out(1, 1);
  out(0, 0) = loss;
  const int il = logits.id();
  std::vector<int> tv(targets.begin(), targets.end());
  return t.push(std::move(out), {logits}, [il, probs, tv, ignore_id](Tape& tp, int self) {
    const double g = tp.grad(self)(0, 0);
    Matrix d = probs;
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      const int target = tv[static_cast<std::size_t>(r)];
      if (target == ignore_id) {
        d.row(r).setZero();
      } else {
        d(r, target) -= 1.0;
      }
    }
    tp.accumulate_expr(il, d * g);
  });
}

Var smooth_l1_mean(Var a, const Matrix& target, double beta) {
  const Matrix& x = a.value();
  if (x.rows() != target.rows() || x.cols() != target.cols()) {
    fail(ErrorCode::ShapeMismatch, "smooth_l1: target shape differs");
  }
  Tape& t = *a.tape();
  const Matrix diff = x - target;
  const double n = static_cast<double>(std::max<Eigen::Index>(1, diff.size()));
  double loss = 0.0;
  Matrix d(diff.rows(), diff.cols());
  for (Eigen::Index i = 0; i < diff.size(); ++i) {
    const double v = diff.data()[i];
    if (std::abs(v) < beta) {
      loss += 0.5 * v * v / beta;
      d.data()[i] = v / beta;
    } else {
      loss += std::abs(v) - 0.5 * beta;
      d.data()[i] = v > 0.0 ? 1.0 : -1.0;
    }
  }
  Matrix out(1, 1);
  out(0, 0) = loss / n;
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia, d, n](Tape& tp, int self) {
    tp.accumulate_expr(ia, d * (tp.grad(self)(0, 0) / n));
  });
}

Var mse_mean(Var a, const Matrix& target) {
  if (a.rows() != target.rows() || a.cols() != target.cols()) {
    fail(ErrorCode::ShapeMismatch, "mse: target shape differs");
  }
  Tape& t = *a.tape();
  const Matrix diff = a.value() - target;
  const double n = static_cast<double>(std::max<Eigen::Index>(1, diff.size()));
  Matrix out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  const int ia = a.id();
  return t.push(std::move(out), {a}, [ia, diff, n](Tape& tp, int self) {
    tp.accumulate_expr(ia, diff * (2.0 * tp.grad(self)(0, 0) / n));
  });
}

Var im2col(Var x, int segments, int kernel, int stride, int pad) {
  const Matrix& v = x.value();
  if (segments < 1 || v.rows() % segments != 0) {
    fail(ErrorCode::ShapeMismatch, "im2col: rows must split evenly into segments");
  }
  const Eigen::Index len = v.rows() / segments;
  const Eigen::Index out_len = (len + 2 * pad - kernel) / stride + 1;
  if (out_len < 1) {
    fail(ErrorCode::ShapeMismatch, "im2col: sequence shorter than the kernel");
  }
  const Eigen::Index c = v.cols();
  Matrix out = Matrix::Zero(segments * out_len, kernel * c);
  for (int s = 0; s < segments; ++s) {
    for (Eigen::Index o = 0; o < out_len; ++o) {
      for (int k = 0; k < kernel; ++k) {
        const Eigen::Index src = o * stride + k - pad;
        if (src >= 0 && src < len) {
          out.block(s * out_len + o, k * c, 1, c) = v.row(s * len + src);
        }
      }
    }
  }
  const int ix = x.id();
  return x.tape()->push(std::move(out), {x}, [=](Tape& tp, int self) {
    if (!tp.requires_grad(ix)) {
      return;
    }
    const Matrix& g = tp.grad(self);
    Matrix& gx = tp.grad_buffer(ix);
    for (int s = 0; s < segments; ++s) {
      for (Eigen::Index o = 0; o < out_len; ++o) {
        for (int k = 0; k < kernel; ++k) {
          const Eigen::Index src = o * stride + k - pad;
          if (src >= 0 && src < len) {
            gx.row(s * len + src) += g.block(s * out_len + o, k * c, 1, c);
          }
        }
      }
    }
  });
}

Var repeat_rows(Var x, int factor) {
  const Matrix& v = x.value();
  Matrix out(v.rows() * factor, v.cols());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (int f = 0; f < factor; ++f) {
      out.row(r * factor + f) = v.row(r);
    }
  }
  const int ix = x.id();
  return x.tape()->push(std::move(out), {x}, [ix, factor](Tape& tp, int self) {
    const Matrix& g = tp.grad(self);
    Matrix d = Matrix::Zero(g.rows() / factor, g.cols());
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      for (int f = 0; f < factor; ++f) {
        d.row(r) += g.row(r * factor + f);
      }
    }
    tp.accumulate(ix, d);
  });
}

Var diff_rows(Var x, int segments) {
  const Matrix& v = x.value();
  if (segments < 1 || v.rows() % segments != 0 || v.rows() / segments < 2) {
    fail(ErrorCode::ShapeMismatch, "diff_rows: need >= 2 rows per segment");
  }
  const Eigen::Index len = v.rows() / segments;
  Matrix out(segments * (len - 1), v.cols());
  for (int s = 0; s < segments; ++s) {
    out.middleRows(s * (len - 1), len - 1) =
        v.middleRows(s * len + 1, len - 1) - v.middleRows(s * len, len - 1);
  }
  const int ix = x.id();
  return x.tape()->push(std::move(out), {x}, [ix, segments, len](Tape& tp, int self) {
    if (!tp.requires_grad(ix)) {
      return;
    }
    const Matrix& g = tp.grad(self);
    Matrix& gx = tp.grad_buffer(ix);
    for (int s = 0; s < segments; ++s) {
      gx.middleRows(s * len + 1, len - 1) += g.middleRows(s * (len - 1), len - 1);
      gx.middleRows(s * len, len - 1) -= g.middleRows(s * (len - 1), len - 1);
    }
  });
}

Var straight_through(Var x, const Matrix& quantized) {
  if (x.rows() != quantized.rows() || x.cols() != quantized.cols()) {
    fail(ErrorCode::ShapeMismatch, "straight_through: shapes differ");
  }
  const int ix = x.id();
  return x.tape()->push(quantized, {x}, [ix](Tape& tp, int self) { tp.accumulate(ix, tp.grad(self)); });
}

} // namespace socialmotion::ad
