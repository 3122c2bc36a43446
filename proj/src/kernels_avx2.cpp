// AVX2 variants of the inner-product kernels. Multiplies and adds stay
// separate (no FMA contraction): each lane then performs exactly the same
// IEEE operations as the scalar reference, so results match bit for bit.
#include "kernels_internal.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace wmark::kernels::detail {

namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a + i);
    __m256d vb = _mm256_loadu_pd(b + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
  }
  alignas(32) double p[4];
  _mm256_store_pd(p, acc);
  switch (n - i) {
    case 3: p[2] += a[i + 2] * b[i + 2]; [[fallthrough]];
    case 2: p[1] += a[i + 1] * b[i + 1]; [[fallthrough]];
    case 1: p[0] += a[i] * b[i]; break;
    default: break;
  }
  return (p[0] + p[1]) + (p[2] + p[3]);
}

double squared_norm_avx2(const double* a, std::size_t n) {
  return dot_avx2(a, a, n);
}

void scaled_dot_rows_avx2(const double* query, const double* rows, std::size_t count,
                          std::size_t dim, double query_scale, const double* scales,
                          double* out) {
  for (std::size_t j = 0; j < count; ++j) {
    out[j] = (dot_avx2(query, rows + j * dim, dim) * query_scale) * scales[j];
  }
}

}  // namespace

const KernelTable avx2_table = {dot_avx2, squared_norm_avx2, scaled_dot_rows_avx2};

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }

}  // namespace wmark::kernels::detail

#endif  // x86_64
