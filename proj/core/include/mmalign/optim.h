#ifndef MMALIGN_OPTIM_H_
#define MMALIGN_OPTIM_H_

#include <cstdint>
#include <map>
#include <string>

#include "mmalign/params.h"

namespace mmalign {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

// Adam with decoupled weight decay.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

  // Applies one update; `grads` maps parameter names to gradients of the
  // same shape. Parameters without an entry are left untouched.
  void Step(ParameterStore& params, const std::map<std::string, Tensor>& grads,
            double lr);

  int64_t steps() const { return steps_; }

 private:
  AdamWConfig cfg_;
  int64_t steps_ = 0;
  std::map<std::string, Tensor> first_;
  std::map<std::string, Tensor> second_;
};

// Linear warm-up from 0 over the first `warmup_fraction` of the steps, then
// half-cosine decay towards 0 at `total_steps`.
class CosineWarmup {
 public:
  CosineWarmup(double peak, int64_t total_steps, double warmup_fraction = 0.15);

  double At(int64_t step) const;
  int64_t warmup_steps() const { return warmup_; }
  int64_t total_steps() const { return total_; }

 private:
  double peak_;
  int64_t total_;
  int64_t warmup_;
};

}  // namespace mmalign

#endif  // MMALIGN_OPTIM_H_
