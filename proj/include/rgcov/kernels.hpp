#pragma once

#include <string>

namespace rgcov::kernels {

// Low-level dense kernels behind the estimator's hot loops. Everything is
// double precision, column-major, with unit-stride columns (leading dimension
// equals the row count). Two implementations exist: a scalar reference and an
// AVX2/FMA variant compiled in its own translation unit. The active set is
// chosen once at runtime from CPU capabilities; RGCOV_KERNELS=scalar|avx2
// overrides the choice (used by the equivalence tests and for debugging).
//
// The two variants accumulate in different orders, so results agree to
// rounding, not bit-for-bit; equivalence tests use a tight relative tolerance.

struct Kernels {
  // out (K x K) += sum_{t=h}^{T-1} x_t * x_{t-h}', where x_t is column t of
  // vc (K x T). 'out' must be zero-initialized by the caller if a plain sum
  // is wanted. This is the Gamma-hat(h) accumulation.
  void (*lagged_crossprod)(const double* vc, int K, int T, int h, double* out);

  // w = C * x for a K x K matrix C (column-major) and K-vector x.
  void (*matvec)(const double* C, const double* x, double* w, int K);

  // C += beta * w * w' (rank-one symmetric update; beta may be negative).
  void (*rank1_update)(double* C, const double* w, double beta, int K);

  const char* name;
};

// The scalar reference implementation (always available).
const Kernels& scalar_kernels();

// AVX2 implementation; null when the binary was built without AVX2 support
// or the CPU lacks it.
const Kernels* avx2_kernels();

// The dispatch result: AVX2 when compiled in and supported by the CPU unless
// overridden via the RGCOV_KERNELS environment variable.
const Kernels& active_kernels();

// Name of the active implementation ("scalar" or "avx2"), for run manifests.
std::string active_kernel_name();

}  // namespace rgcov::kernels
