#include "devassist/simd/kernels.hpp"

namespace devassist::simd::scalar {

double dot_f64_f32(const double* a, const float* b, size_t n) {
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) sum += a[i] * static_cast<double>(b[i]);
  return sum;
}

double sum_squares_f32(const float* a, size_t n) {
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double x = a[i];
    sum += x * x;
  }
  return sum;
}

void dot_rows_f64_f32(const double* query, const float* rows, size_t n_rows, size_t dim, double* out) {
  for (size_t r = 0; r < n_rows; ++r) out[r] = dot_f64_f32(query, rows + r * dim, dim);
}

}  // namespace devassist::simd::scalar
