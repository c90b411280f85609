#include "mmalign/optim.h"

#include <cmath>
#include <numbers>

namespace mmalign {

void AdamW::Step(ParameterStore& params,
                 const std::map<std::string, Tensor>& grads, double lr) {
  ++steps_;
  const double c1 = 1 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double c2 = 1 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (const auto& [name, g] : grads) {
    Tensor& p = params.Mutable(name);
    if (g.shape() != p.shape()) throw ShapeError("adamw " + name, p.shape(), g.shape());
    auto [m_it, m_new] = first_.try_emplace(name, Tensor::Zeros(p.shape()));
    auto [v_it, v_new] = second_.try_emplace(name, Tensor::Zeros(p.shape()));
    auto m = m_it->second.mutable_data();
    auto v = v_it->second.mutable_data();
    auto w = p.mutable_data();
    auto gd = g.data();
    for (size_t i = 0; i < w.size(); ++i) {
      m[i] = static_cast<Scalar>(cfg_.beta1 * m[i] + (1 - cfg_.beta1) * gd[i]);
      v[i] = static_cast<Scalar>(cfg_.beta2 * v[i] +
                                 (1 - cfg_.beta2) * gd[i] * gd[i]);
      const double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
      w[i] = static_cast<Scalar>(w[i] - lr * (update + cfg_.weight_decay * w[i]));
    }
  }
}

CosineWarmup::CosineWarmup(double peak, int64_t total_steps,
                           double warmup_fraction)
    : peak_(peak), total_(total_steps) {
  if (total_steps < 1) throw UsageError("schedule: total steps must be >= 1");
  if (warmup_fraction < 0 || warmup_fraction >= 1) {
    throw UsageError("schedule: warm-up fraction must lie in [0, 1)");
  }
  warmup_ = static_cast<int64_t>(std::llround(warmup_fraction * total_steps));
}

double CosineWarmup::At(int64_t step) const {
  if (step < 0) return 0;
  if (step >= total_) return 0;
  if (step < warmup_) return peak_ * static_cast<double>(step) / warmup_;
  const double progress =
      static_cast<double>(step - warmup_) / static_cast<double>(total_ - warmup_);
  return peak_ * 0.5 * (1 + std::cos(std::numbers::pi * progress));
}

}  // namespace mmalign
