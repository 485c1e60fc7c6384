#include "rgcov/kernels.hpp"

namespace rgcov::kernels {

namespace {

void lagged_crossprod_scalar(const double* vc, int K, int T, int h, double* out) {
  for (int t = h; t < T; ++t) {
    const double* x = vc + static_cast<long>(t) * K;
    const double* y = vc + static_cast<long>(t - h) * K;
    for (int j = 0; j < K; ++j) {
      const double yj = y[j];
      double* col = out + static_cast<long>(j) * K;
      for (int i = 0; i < K; ++i) col[i] += x[i] * yj;
    }
  }
}

void matvec_scalar(const double* C, const double* x, double* w, int K) {
  for (int i = 0; i < K; ++i) w[i] = 0.0;
  for (int j = 0; j < K; ++j) {
    const double xj = x[j];
    const double* col = C + static_cast<long>(j) * K;
    for (int i = 0; i < K; ++i) w[i] += col[i] * xj;
  }
}

void rank1_update_scalar(double* C, const double* w, double beta, int K) {
  for (int j = 0; j < K; ++j) {
    const double bwj = beta * w[j];
    double* col = C + static_cast<long>(j) * K;
    for (int i = 0; i < K; ++i) col[i] += w[i] * bwj;
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{lagged_crossprod_scalar, matvec_scalar,
                         rank1_update_scalar, "scalar"};
  return k;
}

}  // namespace rgcov::kernels
