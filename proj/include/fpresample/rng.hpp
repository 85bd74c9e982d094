#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fpresample {

/// SplitMix64 finalizer. Used to derive well-separated stream seeds from a
/// master seed plus arbitrary salts.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Random stream with the handful of distributions this project needs.
/// Deterministic given the seed; one instance per logical stream, never
/// shared across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform on the open interval (0,1); both endpoints excluded so the
  /// value is safe as a Bernoulli threshold or inside 1/(1-u) transforms.
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  void fill_uniform(std::span<double> out) {
    for (double& v : out) v = uniform();
  }

  /// Standard normal via Box-Muller; the paired deviate is cached.
  double normal();

  double exponential(double rate);

  /// Unbiased integer in [0, bound).
  std::size_t uniform_index(std::size_t bound);

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Addressable random streams: a work unit at position (i, j, ...) derives
/// its generator as key.child(i).child(j).rng(), so results are independent
/// of thread scheduling and replay exactly under the same master seed.
struct StreamKey {
  std::uint64_t state = 0;

  StreamKey child(std::uint64_t salt) const {
    return StreamKey{mix64(state ^ mix64(salt ^ 0x632be59bd9b4e019ULL))};
  }
  Rng rng() const { return Rng(state); }
};

}  // namespace fpresample
