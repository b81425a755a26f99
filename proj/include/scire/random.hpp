#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "scire/vector.hpp"

namespace scire {

/// Standard normal draws from mt19937_64 through Box-Muller.
///
/// Both pieces are spelled out (the engine is fully specified by the standard, the uniform
/// conversion and the transform are done here rather than by <random> distributions), so a seed
/// produces the same numbers with every standard library.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Vector vector(std::size_t dim) {
    Vector v(dim);
    for (auto& x : v) x = next();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scire
