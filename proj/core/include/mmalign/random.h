#ifndef MMALIGN_RANDOM_H_
#define MMALIGN_RANDOM_H_

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "mmalign/tensor.h"

namespace mmalign {

// Seeded generator threaded through every random initialization and sampling
// step. Child generators are derived by name so that adding a consumer does
// not shift the streams of the others.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }

  Rng Fork(uint64_t salt) const {
    std::seed_seq seq{static_cast<uint32_t>(seed_),
                      static_cast<uint32_t>(seed_ >> 32),
                      static_cast<uint32_t>(salt),
                      static_cast<uint32_t>(salt >> 32)};
    std::mt19937_64 e(seq);
    return Rng(e());
  }

  double Uniform() { return std::uniform_real_distribution<double>(0, 1)(engine_); }
  double Normal(double mean = 0, double sd = 1) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  // Uniform integer in [0, n).
  int Index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }
  bool Bernoulli(double p) { return Uniform() < p; }
  int Poisson(double mean) {
    return mean <= 0 ? 0 : std::poisson_distribution<int>(mean)(engine_);
  }
  // Index drawn with probability proportional to `weights`.
  int Weighted(const std::vector<double>& weights) {
    return std::discrete_distribution<int>(weights.begin(), weights.end())(
        engine_);
  }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    // Fisher-Yates with our own index draws keeps the order reproducible
    // across standard library implementations of std::shuffle.
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[Index(i + 1)]);
    }
  }

  Tensor NormalTensor(Shape shape, double sd) {
    Tensor t(std::move(shape));
    for (auto& v : t.mutable_data()) v = static_cast<Scalar>(Normal(0, sd));
    return t;
  }

  Tensor UniformTensor(Shape shape, double limit) {
    Tensor t(std::move(shape));
    for (auto& v : t.mutable_data()) {
      v = static_cast<Scalar>((2 * Uniform() - 1) * limit);
    }
    return t;
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mmalign

#endif  // MMALIGN_RANDOM_H_
