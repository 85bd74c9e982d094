#pragma once

#include <cstddef>
#include <cstdint>

namespace fpresample::kern {

/// The data-parallel inner loops of the sampling/resampling machinery,
/// behind one dispatch table so a vector ISA can be selected at runtime.
///
/// Elementwise kernels (scale, pareto_rank, bernoulli_mask, masked_recip)
/// produce bit-identical results in every variant: they apply the same
/// IEEE operation sequence lane by lane. Reductions (sum, dot) may differ
/// in the last ulps between variants because the accumulation order
/// changes.
struct Ops {
  /// Plain sum of n doubles.
  double (*sum)(const double* x, std::size_t n);
  /// Inner product of two length-n arrays.
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// out[i] = c * x[i].
  void (*scale)(const double* x, double c, double* out, std::size_t n);
  /// Rosen ranking variables: q[i] = u[i]*(1-pi[i]) / ((1-u[i])*pi[i]).
  void (*pareto_rank)(const double* u, const double* pi, double* q, std::size_t n);
  /// d[i] = u[i] < pi[i] ? 1 : 0.
  void (*bernoulli_mask)(const double* u, const double* pi, std::uint8_t* d, std::size_t n);
  /// w[i] = d[i] ? 1/pi[i] : 0  (inverse-probability weights of a draw).
  void (*masked_recip)(const double* pi, const std::uint8_t* d, double* w, std::size_t n);
  const char* name;
};

const Ops& scalar_ops();

/// AVX2 table, or nullptr when the build or the running CPU lacks it.
const Ops* avx2_ops();

/// Best table for this process: honors FPRESAMPLE_SIMD=scalar|avx2 if set,
/// otherwise picks the widest ISA the CPU supports. Resolved once.
const Ops& active_ops();

}  // namespace fpresample::kern
