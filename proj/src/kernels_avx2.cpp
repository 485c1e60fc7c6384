// AVX2/FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; it must not be entered unless the CPU supports both
// (the dispatcher checks at startup).

#include <immintrin.h>

#include "rgcov/kernels.hpp"

namespace rgcov::kernels {

namespace {

// col[i] += x[i] * s for i in [0, K)
inline void axpy_avx2(double* col, const double* x, double s, int K) {
  const __m256d vs = _mm256_set1_pd(s);
  int i = 0;
  for (; i + 4 <= K; i += 4) {
    __m256d c = _mm256_loadu_pd(col + i);
    __m256d v = _mm256_loadu_pd(x + i);
    c = _mm256_fmadd_pd(v, vs, c);
    _mm256_storeu_pd(col + i, c);
  }
  for (; i < K; ++i) col[i] += x[i] * s;
}

void lagged_crossprod_avx2(const double* vc, int K, int T, int h, double* out) {
  for (int t = h; t < T; ++t) {
    const double* x = vc + static_cast<long>(t) * K;
    const double* y = vc + static_cast<long>(t - h) * K;
    for (int j = 0; j < K; ++j) {
      axpy_avx2(out + static_cast<long>(j) * K, x, y[j], K);
    }
  }
}

void matvec_avx2(const double* C, const double* x, double* w, int K) {
  for (int i = 0; i < K; ++i) w[i] = 0.0;
  for (int j = 0; j < K; ++j) {
    axpy_avx2(w, C + static_cast<long>(j) * K, x[j], K);
  }
}

void rank1_update_avx2(double* C, const double* w, double beta, int K) {
  for (int j = 0; j < K; ++j) {
    axpy_avx2(C + static_cast<long>(j) * K, w, beta * w[j], K);
  }
}

}  // namespace

const Kernels* avx2_kernels_impl() {
  static const Kernels k{lagged_crossprod_avx2, matvec_avx2, rank1_update_avx2,
                         "avx2"};
  return &k;
}

}  // namespace rgcov::kernels
