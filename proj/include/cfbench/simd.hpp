#pragma once

// Data-parallel inner loops used by the kernel Gram builders and the LSTM.
// Every routine has a scalar reference implementation; an AVX2/FMA variant is
// compiled separately and picked at runtime when the CPU supports it.
// Setting CF_BENCH_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <string_view>

namespace cfb::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;

  // out[j] = sum_k ((x[k] - ycols[k*m + j]) * inv_l[k])^2, j < m.
  // ycols is the column-major (dimension-major) copy of an m x d point set.
  void (*scaled_sqdist)(const double* x, const double* ycols, const double* inv_l,
                        std::size_t m, std::size_t d, double* out);

  // out[j] = sum_k x[k] * ycols[k*m + j]
  void (*cross_dot)(const double* x, const double* ycols, std::size_t m, std::size_t d,
                    double* out);

  double (*dot)(const double* a, const double* b, std::size_t n);

  // y += W x, W row-major rows x cols
  void (*gemv_acc)(const double* w, std::size_t rows, std::size_t cols, const double* x,
                   double* y);

  // y += W^T x, W row-major rows x cols, x has `rows` entries, y has `cols`
  void (*gemv_t_acc)(const double* w, std::size_t rows, std::size_t cols, const double* x,
                     double* y);

  // W += u v^T, W row-major rows x cols
  void (*outer_acc)(double* w, std::size_t rows, std::size_t cols, const double* u,
                    const double* v);
};

const KernelTable& scalar_table();

// Null when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();

// Table chosen at startup (or by force_isa).
const KernelTable& active();

// Overrides the runtime choice; returns false if `isa` is unavailable.
bool force_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace cfb::simd
