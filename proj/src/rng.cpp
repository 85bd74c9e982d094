#include "fpresample/rng.hpp"

#include <cmath>
#include <numbers>

namespace fpresample {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

std::size_t Rng::uniform_index(std::size_t bound) {
  // Rejection against the largest multiple of bound below 2^64.
  const std::uint64_t b = bound;
  const std::uint64_t threshold = (0ULL - b) % b;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return static_cast<std::size_t>(r % b);
  }
}

}  // namespace fpresample
