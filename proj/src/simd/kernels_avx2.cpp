// Built with -mavx2 -mfma; only called after a runtime CPU check.

#include <immintrin.h>

#include "devassist/simd/kernels.hpp"

namespace devassist::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double dot_f64_f32(const double* a, const float* b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 bf = _mm256_loadu_ps(b + i);
    const __m256d b0 = _mm256_cvtps_pd(_mm256_castps256_ps128(bf));
    const __m256d b1 = _mm256_cvtps_pd(_mm256_extractf128_ps(bf, 1));
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), b0, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), b1, acc1);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * static_cast<double>(b[i]);
  return sum;
}

double sum_squares_f32(const float* a, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 af = _mm256_loadu_ps(a + i);
    const __m256d a0 = _mm256_cvtps_pd(_mm256_castps256_ps128(af));
    const __m256d a1 = _mm256_cvtps_pd(_mm256_extractf128_ps(af, 1));
    acc0 = _mm256_fmadd_pd(a0, a0, acc0);
    acc1 = _mm256_fmadd_pd(a1, a1, acc1);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double x = a[i];
    sum += x * x;
  }
  return sum;
}

void dot_rows_f64_f32(const double* query, const float* rows, size_t n_rows, size_t dim, double* out) {
  for (size_t r = 0; r < n_rows; ++r) out[r] = dot_f64_f32(query, rows + r * dim, dim);
}

}  // namespace devassist::simd::avx2
