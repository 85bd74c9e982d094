#include "fpresample/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace fpresample::kern {

#if defined(FPRESAMPLE_HAVE_AVX2_BUILD)
const Ops* avx2_ops_table();  // defined in kernels_avx2.cpp
#endif

const Ops* avx2_ops() {
#if defined(FPRESAMPLE_HAVE_AVX2_BUILD) && (defined(__GNUC__) || defined(__clang__))
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return avx2_ops_table();
  }
#endif
  return nullptr;
}

namespace {

const Ops& resolve() {
  if (const char* env = std::getenv("FPRESAMPLE_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2_ops() != nullptr) return *avx2_ops();
  }
  if (const Ops* v = avx2_ops()) return *v;
  return scalar_ops();
}

}  // namespace

const Ops& active_ops() {
  static const Ops& ops = resolve();
  return ops;
}

}  // namespace fpresample::kern
