#include "slung/rng.hpp"

namespace slung {
namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

Rng Rng::split(std::uint64_t stream) const {
  // Mix the parent stream id in so grandchildren do not collide with children.
  return Rng(seed_ ^ (stream_ * 0x9e3779b97f4a7c15ULL), stream + 1);
}

double Rng::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

Vec3 Rng::uniform3(const Vec3& lo, const Vec3& hi) {
  return {uniform(lo.x(), hi.x()), uniform(lo.y(), hi.y()), uniform(lo.z(), hi.z())};
}

double Rng::normal() { return normal_(engine_); }

bool Rng::bernoulli(double p) { return uniform01() < p; }

std::size_t Rng::index(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

Vec3 Rng::unit_vector() {
  for (;;) {
    const Vec3 v{normal(), normal(), normal()};
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

}  // namespace slung
