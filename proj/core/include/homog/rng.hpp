#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace homog {

/// Deterministic random stream. Box-Muller on top of mt19937_64 so the exact
/// sample sequence depends only on the seed, not on library internals.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {
    // 53-bit mantissa in [0,1)
    return double(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0, u2 = 0;
    do {
      u1 = uniform();
    } while (u1 <= 0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0;
};

} // namespace homog
