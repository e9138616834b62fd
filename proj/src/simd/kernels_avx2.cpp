// Compiled with -mavx2 -mfma. Only reached through avx2_table() after a CPUID check.

#include <immintrin.h>

#include "cfbench/simd.hpp"

namespace cfb::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void scaled_sqdist_avx2(const double* x, const double* ycols, const double* inv_l,
                        std::size_t m, std::size_t d, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < d; ++k) {
      const __m256d yk = _mm256_loadu_pd(ycols + k * m + j);
      const __m256d t =
          _mm256_mul_pd(_mm256_sub_pd(_mm256_set1_pd(x[k]), yk), _mm256_set1_pd(inv_l[k]));
      acc = _mm256_fmadd_pd(t, t, acc);
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double t = (x[k] - ycols[k * m + j]) * inv_l[k];
      acc += t * t;
    }
    out[j] = acc;
  }
}

void cross_dot_avx2(const double* x, const double* ycols, std::size_t m, std::size_t d,
                    double* out) {
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < d; ++k) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(x[k]), _mm256_loadu_pd(ycols + k * m + j), acc);
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) acc += x[k] * ycols[k * m + j];
    out[j] = acc;
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv_acc_avx2(const double* w, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_avx2(w + r * cols, x, cols);
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t_acc_avx2(const double* w, std::size_t rows, std::size_t cols, const double* x,
                     double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_avx2(x[r], w + r * cols, y, cols);
}

void outer_acc_avx2(double* w, std::size_t rows, std::size_t cols, const double* u,
                    const double* v) {
  for (std::size_t r = 0; r < rows; ++r) axpy_avx2(u[r], v, w + r * cols, cols);
}

constexpr KernelTable kAvx2{
    Isa::Avx2,      &scaled_sqdist_avx2, &cross_dot_avx2,  &dot_avx2,
    &gemv_acc_avx2, &gemv_t_acc_avx2,    &outer_acc_avx2,
};

}  // namespace

const KernelTable* avx2_table_unchecked() { return &kAvx2; }

}  // namespace cfb::simd
