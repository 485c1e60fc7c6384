#include "rgcov/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "rgcov/kernels.hpp"

namespace rgcov {

namespace {

void check_finite(const Matrix& v, const char* what) {
  if (!v.allFinite()) {
    throw_error(ErrorKind::Data, std::string(what) + " contains non-finite values");
  }
}

Matrix centered(const Matrix& v) {
  Vector mean = v.rowwise().mean();
  return v.colwise() - mean;
}

}  // namespace

Matrix autocovariance(const Matrix& v, int lag) {
  const int T = static_cast<int>(v.cols());
  const int K = static_cast<int>(v.rows());
  require(T >= 1 && K >= 1, ErrorKind::Domain, "autocovariance: empty series");
  require(lag >= 0, ErrorKind::Domain, "autocovariance: lag must be non-negative");
  require(lag < T, ErrorKind::Domain, "autocovariance: lag must be smaller than the series length");
  check_finite(v, "autocovariance input");

  Matrix vc = centered(v);
  Matrix out = Matrix::Zero(K, K);
  kernels::active_kernels().lagged_crossprod(vc.data(), K, T, lag, out.data());
  out /= static_cast<double>(T);
  return out;
}

std::vector<Matrix> autocovariances(const Matrix& v, int max_lag) {
  const int T = static_cast<int>(v.cols());
  const int K = static_cast<int>(v.rows());
  require(T >= 1 && K >= 1, ErrorKind::Domain, "autocovariance: empty series");
  require(max_lag >= 0, ErrorKind::Domain, "autocovariance: lag must be non-negative");
  require(max_lag < T, ErrorKind::Domain, "autocovariance: lag must be smaller than the series length");
  check_finite(v, "autocovariance input");

  Matrix vc = centered(v);
  std::vector<Matrix> out;
  out.reserve(max_lag + 1);
  for (int h = 0; h <= max_lag; ++h) {
    Matrix g = Matrix::Zero(K, K);
    kernels::active_kernels().lagged_crossprod(vc.data(), K, T, h, g.data());
    g /= static_cast<double>(T);
    out.push_back(std::move(g));
  }
  return out;
}

Matrix ridge(const Matrix& m, double delta) {
  require(m.rows() == m.cols(), ErrorKind::Domain, "ridge: matrix must be square");
  require(delta >= 0.0, ErrorKind::Domain, "ridge: delta must be non-negative");
  Matrix out = m;
  out.diagonal().array() += delta;
  return out;
}

Matrix sm_update(const Matrix& c_prev, const Vector& x, double rho2) {
  const int K = static_cast<int>(c_prev.rows());
  require(c_prev.cols() == K, ErrorKind::Domain, "sm_update: matrix must be square");
  require(x.size() == K, ErrorKind::Domain, "sm_update: vector dimension mismatch");
  require(rho2 > 0.0, ErrorKind::Domain, "sm_update: rho2 must be positive");

  Matrix c = c_prev;
  Vector w(K);
  const kernels::Kernels& k = kernels::active_kernels();
  k.matvec(c.data(), x.data(), w.data(), K);
  const double denom = 1.0 + rho2 * x.dot(w);
  require(std::abs(denom) > 1e-300, ErrorKind::NearSingular,
          "sm_update: update denominator vanished");
  k.rank1_update(c.data(), w.data(), -rho2 / denom, K);
  return c;
}

Matrix recursive_inverse(const Matrix& xs, double rho1, double rho2) {
  const int K = static_cast<int>(xs.rows());
  const int T = static_cast<int>(xs.cols());
  require(K >= 1, ErrorKind::Domain, "recursive_inverse: empty vectors");
  require(T >= 1, ErrorKind::Domain, "recursive_inverse: needs at least one observation");
  require(rho1 > 0.0, ErrorKind::Domain, "recursive_inverse: rho1 must be positive");
  require(rho2 > 0.0, ErrorKind::Domain, "recursive_inverse: rho2 must be positive");
  check_finite(xs, "recursive_inverse input");

  // Closed-form seed: (rho1 I + rho2 x1 x1')^{-1}.
  Vector x1 = xs.col(0);
  Matrix c = Matrix::Identity(K, K) / rho1;
  const double seed_denom = 1.0 + (rho2 / rho1) * x1.squaredNorm();
  c.noalias() -= (rho2 / (rho1 * rho1 * seed_denom)) * (x1 * x1.transpose());

  const kernels::Kernels& k = kernels::active_kernels();
  Vector w(K);
  for (int t = 1; t < T; ++t) {
    k.matvec(c.data(), xs.col(t).data(), w.data(), K);
    const double denom = 1.0 + rho2 * xs.col(t).dot(w);
    require(std::abs(denom) > 1e-300, ErrorKind::NearSingular,
            "recursive_inverse: update denominator vanished");
    k.rank1_update(c.data(), w.data(), -rho2 / denom, K);
  }
  return c;
}

SpectralDecomposition sym_eigen(const Matrix& m) {
  const int K = static_cast<int>(m.rows());
  require(m.cols() == K && K >= 1, ErrorKind::Domain, "sym_eigen: matrix must be square");
  check_finite(m, "sym_eigen input");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * scale, ErrorKind::Domain,
          "sym_eigen: matrix is not symmetric within tolerance");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  require(solver.info() == Eigen::Success, ErrorKind::Internal,
          "sym_eigen: eigensolver failed to converge");

  // Eigen returns ascending order; flip to descending and fix signs.
  SpectralDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (int j = 0; j < K; ++j) {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < K; ++i) {
      const double a = std::abs(out.vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (out.vectors(arg, j) < 0.0) out.vectors.col(j) = -out.vectors.col(j);
  }
  return out;
}

Matrix inv_sqrt(const Matrix& m, double floor) {
  SpectralDecomposition d = sym_eigen(m);
  const int K = static_cast<int>(d.values.size());
  const double lambda_max = d.values(0);
  if (floor < 0.0) floor = 1e-12 * std::max(lambda_max, 0.0);
  for (int i = 0; i < K; ++i) {
    if (d.values(i) <= floor) {
      std::ostringstream msg;
      msg << "inv_sqrt: eigenvalue " << d.values(i) << " (position " << i
          << " in descending order) is at or below the floor " << floor;
      throw_error(ErrorKind::NearSingular, msg.str());
    }
  }
  Vector inv_roots = d.values.array().sqrt().inverse();
  return d.vectors * inv_roots.asDiagonal() * d.vectors.transpose();
}

double sym_cond(const Matrix& m) {
  SpectralDecomposition d = sym_eigen(m);
  const double hi = d.values.cwiseAbs().maxCoeff();
  const double lo = d.values.cwiseAbs().minCoeff();
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace rgcov
