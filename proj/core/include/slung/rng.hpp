#pragma once

#include "slung/types.hpp"

#include <cstdint>
#include <random>

namespace slung {

// Seeded generator with deterministic stream splitting. Each environment
// instance owns one stream, so results do not depend on worker count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Child generator for `stream`, independent of draws already made here.
  Rng split(std::uint64_t stream) const;

  double uniform(double lo, double hi);
  double uniform01() { return uniform(0.0, 1.0); }
  Vec3 uniform3(const Vec3& lo, const Vec3& hi);
  double normal();
  bool bernoulli(double p);
  // Index in [0, n).
  std::size_t index(std::size_t n);
  // Uniform direction on the unit sphere.
  Vec3 unit_vector();

  std::mt19937_64& engine() { return engine_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace slung
