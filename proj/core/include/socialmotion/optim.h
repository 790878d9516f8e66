#pragma once

#include <span>
#include <vector>

#include "socialmotion/autograd.h"

namespace socialmotion {

struct AdamWOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0; // decoupled
  double max_grad_norm = 0.0; // 0 disables clipping
};

// Adam with decoupled weight decay. Moment buffers follow the parameter order
// given to the constructor.
class AdamW {
 public:
  AdamW(std::vector<ad::Parameter*> params, AdamWOptions options);

  // Applies one update at the given learning rate and clears gradients.
  // Returns the global gradient norm before clipping.
  double step(double learning_rate);
  double step() {
    return step(options_.learning_rate);
  }
  void zero_grad();

  long long steps_taken() const {
    return steps_;
  }
  const AdamWOptions& options() const {
    return options_;
  }
  std::span<ad::Parameter* const> parameters() const {
    return params_;
  }

 private:
  std::vector<ad::Parameter*> params_;
  AdamWOptions options_;
  std::vector<ad::Matrix> m_;
  std::vector<ad::Matrix> v_;
  long long steps_ = 0;
};

// Linear warmup to `peak` over `warmup` steps, constant afterwards.
double warmup_learning_rate(double peak, long long step, long long warmup);

} // namespace socialmotion
