#include "qcr/simd/kernels.hpp"

namespace qcr::simd::scalar {

void complex_matvec(std::size_t n, const double* a_re, const double* a_im, const double* x_re,
                    const double* x_im, double* y_re, double* y_im) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row_re = a_re + i * n;
    const double* row_im = a_im + i * n;
    double acc_re = 0.0;
    double acc_im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc_re += row_re[j] * x_re[j] - row_im[j] * x_im[j];
      acc_im += row_re[j] * x_im[j] + row_im[j] * x_re[j];
    }
    y_re[i] = acc_re;
    y_im[i] = acc_im;
  }
}

void mahalanobis2(std::size_t count, const double* xs, const double* ys, double mean_x,
                  double mean_y, double p00, double p01, double p11, double* out) {
  for (std::size_t k = 0; k < count; ++k) {
    const double dx = xs[k] - mean_x;
    const double dy = ys[k] - mean_y;
    out[k] = p00 * dx * dx + 2.0 * p01 * dx * dy + p11 * dy * dy;
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

}  // namespace qcr::simd::scalar
