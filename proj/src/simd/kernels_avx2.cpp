// AVX2+FMA variants. Functions carry a target attribute so the rest of the
// library is built for the baseline ISA; callers go through the dispatch table.

#include "qcr/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define QCR_HAVE_X86 1
#include <immintrin.h>
#else
#define QCR_HAVE_X86 0
#endif

namespace qcr::simd::avx2 {

#if QCR_HAVE_X86

namespace {

__attribute__((target("avx2,fma"))) inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

}  // namespace

__attribute__((target("avx2,fma"))) void complex_matvec(std::size_t n, const double* a_re,
                                                        const double* a_im, const double* x_re,
                                                        const double* x_im, double* y_re,
                                                        double* y_im) {
  const std::size_t blocked = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n; ++i) {
    const double* row_re = a_re + i * n;
    const double* row_im = a_im + i * n;
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j < blocked; j += 4) {
      const __m256d ar = _mm256_loadu_pd(row_re + j);
      const __m256d ai = _mm256_loadu_pd(row_im + j);
      const __m256d xr = _mm256_loadu_pd(x_re + j);
      const __m256d xi = _mm256_loadu_pd(x_im + j);
      acc_re = _mm256_fmadd_pd(ar, xr, acc_re);
      acc_re = _mm256_fnmadd_pd(ai, xi, acc_re);
      acc_im = _mm256_fmadd_pd(ar, xi, acc_im);
      acc_im = _mm256_fmadd_pd(ai, xr, acc_im);
    }
    double sum_re = horizontal_sum(acc_re);
    double sum_im = horizontal_sum(acc_im);
    for (; j < n; ++j) {
      sum_re += row_re[j] * x_re[j] - row_im[j] * x_im[j];
      sum_im += row_re[j] * x_im[j] + row_im[j] * x_re[j];
    }
    y_re[i] = sum_re;
    y_im[i] = sum_im;
  }
}

__attribute__((target("avx2,fma"))) void mahalanobis2(std::size_t count, const double* xs,
                                                      const double* ys, double mean_x,
                                                      double mean_y, double p00, double p01,
                                                      double p11, double* out) {
  const __m256d mx = _mm256_set1_pd(mean_x);
  const __m256d my = _mm256_set1_pd(mean_y);
  const __m256d c00 = _mm256_set1_pd(p00);
  const __m256d c01 = _mm256_set1_pd(2.0 * p01);
  const __m256d c11 = _mm256_set1_pd(p11);
  const std::size_t blocked = count & ~std::size_t{3};
  std::size_t k = 0;
  for (; k < blocked; k += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + k), mx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + k), my);
    __m256d acc = _mm256_mul_pd(_mm256_mul_pd(c11, dy), dy);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(c01, dx), dy, acc);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(c00, dx), dx, acc);
    _mm256_storeu_pd(out + k, acc);
  }
  for (; k < count; ++k) {
    const double dx = xs[k] - mean_x;
    const double dy = ys[k] - mean_y;
    out[k] = p00 * dx * dx + 2.0 * p01 * dx * dy + p11 * dy * dy;
  }
}

__attribute__((target("avx2,fma"))) void axpy(std::size_t n, double alpha, const double* x,
                                              double* y) {
  const __m256d a = _mm256_set1_pd(alpha);
  const std::size_t blocked = n & ~std::size_t{3};
  std::size_t k = 0;
  for (; k < blocked; k += 4) {
    _mm256_storeu_pd(y + k, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
  }
  for (; k < n; ++k) y[k] += alpha * x[k];
}

#else

void complex_matvec(std::size_t n, const double* a_re, const double* a_im, const double* x_re,
                    const double* x_im, double* y_re, double* y_im) {
  scalar::complex_matvec(n, a_re, a_im, x_re, x_im, y_re, y_im);
}

void mahalanobis2(std::size_t count, const double* xs, const double* ys, double mean_x,
                  double mean_y, double p00, double p01, double p11, double* out) {
  scalar::mahalanobis2(count, xs, ys, mean_x, mean_y, p00, p01, p11, out);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) { scalar::axpy(n, alpha, x, y); }

#endif

}  // namespace qcr::simd::avx2
