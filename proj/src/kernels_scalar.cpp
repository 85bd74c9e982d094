#include "fpresample/kernels.hpp"

namespace fpresample::kern {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void scale_scalar(const double* x, double c, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c * x[i];
}

void pareto_rank_scalar(const double* u, const double* pi, double* q, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    // Shared-subexpression form; the vector variants use the same sequence
    // so results match bitwise.
    const double up = u[i] * pi[i];
    q[i] = (u[i] - up) / (pi[i] - up);
  }
}

void bernoulli_mask_scalar(const double* u, const double* pi, std::uint8_t* d, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) d[i] = u[i] < pi[i] ? 1 : 0;
}

void masked_recip_scalar(const double* pi, const std::uint8_t* d, double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) w[i] = d[i] ? 1.0 / pi[i] : 0.0;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{sum_scalar,
                       dot_scalar,
                       scale_scalar,
                       pareto_rank_scalar,
                       bernoulli_mask_scalar,
                       masked_recip_scalar,
                       "scalar"};
  return ops;
}

}  // namespace fpresample::kern
