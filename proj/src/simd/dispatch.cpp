#include <cstdlib>
#include <string>

#include "devassist/common.hpp"
#include "devassist/simd/kernels.hpp"

namespace devassist::simd {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, scalar::dot_f64_f32, scalar::sum_squares_f32, scalar::dot_rows_f64_f32};

#if defined(DEVASSIST_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, avx2::dot_f64_f32, avx2::sum_squares_f32, avx2::dot_rows_f64_f32};
#endif

#if defined(DEVASSIST_HAVE_NEON)
constexpr KernelTable kNeon{Isa::Neon, neon::dot_f64_f32, neon::sum_squares_f32, neon::dot_rows_f64_f32};
#endif

const KernelTable& select() {
  if (const char* env = std::getenv("DEVASSIST_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return kScalar;
    if (want == "avx2" && isa_available(Isa::Avx2)) return kernels_for(Isa::Avx2);
    if (want == "neon" && isa_available(Isa::Neon)) return kernels_for(Isa::Neon);
  }
  if (isa_available(Isa::Avx2)) return kernels_for(Isa::Avx2);
  if (isa_available(Isa::Neon)) return kernels_for(Isa::Neon);
  return kScalar;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(DEVASSIST_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(DEVASSIST_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) {
    throw InvalidArgument("simd: " + std::string(isa_name(isa)) + " kernels are not available on this CPU");
  }
  switch (isa) {
#if defined(DEVASSIST_HAVE_AVX2)
    case Isa::Avx2: return kAvx2;
#endif
#if defined(DEVASSIST_HAVE_NEON)
    case Isa::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace devassist::simd
