#pragma once

// Inner-product kernels for the exact vector scan.
//
// Every kernel has a scalar reference implementation; vectorized variants
// are selected once at runtime from what the CPU supports. All variants
// accumulate in double precision, so they agree with the reference to
// within summation-order rounding. Set DEVASSIST_SIMD=scalar|avx2|neon to
// override the selection.

#include <cstddef>
#include <string_view>

namespace devassist::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot_f64_f32)(const double* a, const float* b, size_t n);
  // sum_i a[i]^2
  double (*sum_squares_f32)(const float* a, size_t n);
  // out[r] = dot(query, rows + r * dim) for r in [0, n_rows)
  void (*dot_rows_f64_f32)(const double* query, const float* rows, size_t n_rows, size_t dim, double* out);
};

// Compiled in and supported by the running CPU.
bool isa_available(Isa isa);

// Table for a specific ISA; throws devassist::InvalidArgument when unavailable.
const KernelTable& kernels_for(Isa isa);

// Best available table, honoring DEVASSIST_SIMD. Resolved once.
const KernelTable& kernels();

namespace scalar {
double dot_f64_f32(const double* a, const float* b, size_t n);
double sum_squares_f32(const float* a, size_t n);
void dot_rows_f64_f32(const double* query, const float* rows, size_t n_rows, size_t dim, double* out);
}  // namespace scalar

namespace avx2 {
double dot_f64_f32(const double* a, const float* b, size_t n);
double sum_squares_f32(const float* a, size_t n);
void dot_rows_f64_f32(const double* query, const float* rows, size_t n_rows, size_t dim, double* out);
}  // namespace avx2

namespace neon {
double dot_f64_f32(const double* a, const float* b, size_t n);
double sum_squares_f32(const float* a, size_t n);
void dot_rows_f64_f32(const double* query, const float* rows, size_t n_rows, size_t dim, double* out);
}  // namespace neon

}  // namespace devassist::simd
