#include "socialmotion/optim.h"

#include <cmath>

namespace socialmotion {

AdamW::AdamW(std::vector<ad::Parameter*> params, AdamWOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto* p : params_) {
    m_.push_back(ad::Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(ad::Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamW::zero_grad() {
  for (auto* p : params_) {
    p->zero_grad();
  }
}

double AdamW::step(double lr) {
  double sq = 0.0;
  for (const auto* p : params_) {
    sq += p->grad.squaredNorm();
  }
  const double norm = std::sqrt(sq);
  double clip = 1.0;
  if (options_.max_grad_norm > 0.0 && norm > options_.max_grad_norm) {
    clip = options_.max_grad_norm / norm;
  }
  ++steps_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Parameter& p = *params_[i];
    const ad::Matrix g = p.grad * clip;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * g;
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * g.cwiseProduct(g);
    if (options_.weight_decay > 0.0) {
      p.value *= 1.0 - lr * options_.weight_decay;
    }
    p.value.array() -= lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + options_.epsilon);
  }
  zero_grad();
  return norm;
}

double warmup_learning_rate(double peak, long long step, long long warmup) {
  if (warmup <= 0 || step >= warmup) {
    return peak;
  }
  return peak * static_cast<double>(step + 1) / static_cast<double>(warmup);
}

} // namespace socialmotion
