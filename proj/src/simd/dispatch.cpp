#include <cstdlib>
#include <stdexcept>
#include <string>

#include "qcr/simd/kernels.hpp"

namespace qcr::simd {

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::complex_matvec, &scalar::mahalanobis2,
                              &scalar::axpy};
constexpr KernelTable kAvx2{Isa::avx2, &avx2::complex_matvec, &avx2::mahalanobis2, &avx2::axpy};

const KernelTable& select() {
  if (const char* env = std::getenv("QCR_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return kScalar;
  }
  return isa_supported(Isa::avx2) ? kAvx2 : kScalar;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::runtime_error("instruction set not supported on this CPU: " +
                             std::string(isa_name(isa)));
  }
  return isa == Isa::avx2 ? kAvx2 : kScalar;
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace qcr::simd
