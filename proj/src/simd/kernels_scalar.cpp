#include "cfbench/simd.hpp"

namespace cfb::simd {
namespace {

void scaled_sqdist_scalar(const double* x, const double* ycols, const double* inv_l,
                          std::size_t m, std::size_t d, double* out) {
  for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = ycols + k * m;
    const double xk = x[k];
    const double il = inv_l[k];
    for (std::size_t j = 0; j < m; ++j) {
      const double t = (xk - col[j]) * il;
      out[j] += t * t;
    }
  }
}

void cross_dot_scalar(const double* x, const double* ycols, std::size_t m, std::size_t d,
                      double* out) {
  for (std::size_t j = 0; j < m; ++j) out[j] = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = ycols + k * m;
    const double xk = x[k];
    for (std::size_t j = 0; j < m; ++j) out[j] += xk * col[j];
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void gemv_acc_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x,
                     double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot_scalar(w + r * cols, x, cols);
}

void gemv_t_acc_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x,
                       double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double xr = x[r];
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

void outer_acc_scalar(double* w, std::size_t rows, std::size_t cols, const double* u,
                      const double* v) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double ur = u[r];
    double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += ur * v[c];
  }
}

constexpr KernelTable kScalar{
    Isa::Scalar,      &scaled_sqdist_scalar, &cross_dot_scalar,
    &dot_scalar,      &gemv_acc_scalar,      &gemv_t_acc_scalar,
    &outer_acc_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace cfb::simd
