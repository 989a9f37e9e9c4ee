#pragma once
// Data-parallel inner loops shared by the integrator and the readout mixture code.
//
// Every kernel has a portable scalar reference and an AVX2+FMA variant. The
// variant is chosen once per process from the CPU feature bits; setting the
// environment variable QCR_SIMD=scalar forces the reference path.

#include <cstddef>
#include <string_view>

namespace qcr::simd {

enum class Isa { scalar, avx2 };

// y = A x for a dense complex n x n matrix stored as separate row-major real
// and imaginary planes; x and y are split the same way.
using ComplexMatVecFn = void (*)(std::size_t n, const double* a_re, const double* a_im,
                                 const double* x_re, const double* x_im, double* y_re,
                                 double* y_im);

// out[k] = (p_k - mu)^T P (p_k - mu) with P = [[p00, p01], [p01, p11]].
using Mahalanobis2Fn = void (*)(std::size_t count, const double* xs, const double* ys,
                                double mean_x, double mean_y, double p00, double p01,
                                double p11, double* out);

// y += alpha * x
using AxpyFn = void (*)(std::size_t n, double alpha, const double* x, double* y);

struct KernelTable {
  Isa isa;
  ComplexMatVecFn complex_matvec;
  Mahalanobis2Fn mahalanobis2;
  AxpyFn axpy;
};

bool isa_supported(Isa isa);
const KernelTable& kernels(Isa isa);

// Kernels selected for this process.
const KernelTable& active();

std::string_view isa_name(Isa isa);

namespace scalar {
void complex_matvec(std::size_t n, const double* a_re, const double* a_im, const double* x_re,
                    const double* x_im, double* y_re, double* y_im);
void mahalanobis2(std::size_t count, const double* xs, const double* ys, double mean_x,
                  double mean_y, double p00, double p01, double p11, double* out);
void axpy(std::size_t n, double alpha, const double* x, double* y);
}  // namespace scalar

namespace avx2 {
void complex_matvec(std::size_t n, const double* a_re, const double* a_im, const double* x_re,
                    const double* x_im, double* y_re, double* y_im);
void mahalanobis2(std::size_t count, const double* xs, const double* ys, double mean_x,
                  double mean_y, double p00, double p01, double p11, double* out);
void axpy(std::size_t n, double alpha, const double* x, double* y);
}  // namespace avx2

}  // namespace qcr::simd
