// AArch64 only; Advanced SIMD is mandatory there, so no runtime check.

#include <arm_neon.h>

#include "devassist/simd/kernels.hpp"

namespace devassist::simd::neon {

double dot_f64_f32(const double* a, const float* b, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t bf = vld1q_f32(b + i);
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vcvt_f64_f32(vget_low_f32(bf)));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vcvt_high_f64_f32(bf));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * static_cast<double>(b[i]);
  return sum;
}

double sum_squares_f32(const float* a, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t af = vld1q_f32(a + i);
    const float64x2_t lo = vcvt_f64_f32(vget_low_f32(af));
    const float64x2_t hi = vcvt_high_f64_f32(af);
    acc0 = vfmaq_f64(acc0, lo, lo);
    acc1 = vfmaq_f64(acc1, hi, hi);
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double x = a[i];
    sum += x * x;
  }
  return sum;
}

void dot_rows_f64_f32(const double* query, const float* rows, size_t n_rows, size_t dim, double* out) {
  for (size_t r = 0; r < n_rows; ++r) out[r] = dot_f64_f32(query, rows + r * dim, dim);
}

}  // namespace devassist::simd::neon
