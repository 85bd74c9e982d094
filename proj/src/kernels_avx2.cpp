#include "fpresample/kernels.hpp"

#include <immintrin.h>

// Compiled with -mavx2 -mfma; callers must gate on runtime CPU support
// (kernels_dispatch.cpp does).

namespace fpresample::kern {
namespace {

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  __m256d acc = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) total += x[i];
  return total;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  __m256d acc = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

void scale_avx2(const double* x, double c, double* out, std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(cv, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = c * x[i];
}

// No FMA here: the scalar reference uses mul/sub/div and the lanes must
// match it bitwise.
void pareto_rank_avx2(const double* u, const double* pi, double* q, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d uv = _mm256_loadu_pd(u + i);
    const __m256d pv = _mm256_loadu_pd(pi + i);
    const __m256d up = _mm256_mul_pd(uv, pv);
    const __m256d num = _mm256_sub_pd(uv, up);
    const __m256d den = _mm256_sub_pd(pv, up);
    _mm256_storeu_pd(q + i, _mm256_div_pd(num, den));
  }
  for (; i < n; ++i) {
    const double up = u[i] * pi[i];
    q[i] = (u[i] - up) / (pi[i] - up);
  }
}

void bernoulli_mask_avx2(const double* u, const double* pi, std::uint8_t* d, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d uv = _mm256_loadu_pd(u + i);
    const __m256d pv = _mm256_loadu_pd(pi + i);
    const int bits = _mm256_movemask_pd(_mm256_cmp_pd(uv, pv, _CMP_LT_OQ));
    d[i] = static_cast<std::uint8_t>(bits & 1);
    d[i + 1] = static_cast<std::uint8_t>((bits >> 1) & 1);
    d[i + 2] = static_cast<std::uint8_t>((bits >> 2) & 1);
    d[i + 3] = static_cast<std::uint8_t>((bits >> 3) & 1);
  }
  for (; i < n; ++i) d[i] = u[i] < pi[i] ? 1 : 0;
}

void masked_recip_avx2(const double* pi, const std::uint8_t* d, double* w, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pv = _mm256_loadu_pd(pi + i);
    const __m256d recip = _mm256_div_pd(one, pv);
    std::uint32_t packed;
    __builtin_memcpy(&packed, d + i, 4);
    const __m128i bytes = _mm_cvtsi32_si128(static_cast<int>(packed));
    const __m256i wide = _mm256_cvtepu8_epi64(bytes);
    const __m256i is_zero = _mm256_cmpeq_epi64(wide, _mm256_setzero_si256());
    _mm256_storeu_pd(w + i, _mm256_andnot_pd(_mm256_castsi256_pd(is_zero), recip));
  }
  for (; i < n; ++i) w[i] = d[i] ? 1.0 / pi[i] : 0.0;
}

}  // namespace

const Ops* avx2_ops_table() {
  static const Ops ops{sum_avx2,
                       dot_avx2,
                       scale_avx2,
                       pareto_rank_avx2,
                       bernoulli_mask_avx2,
                       masked_recip_avx2,
                       "avx2"};
  return &ops;
}

}  // namespace fpresample::kern
