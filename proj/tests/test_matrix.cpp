#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "rgcov/matrix.hpp"
#include "rgcov/random.hpp"
#include "rgcov/types.hpp"

using rgcov::Error;
using rgcov::Matrix;
using rgcov::Rng;
using rgcov::Vector;

namespace {

Matrix random_spd(int k, Rng& rng, double ridge = 0.5) {
  Matrix g(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) g(i, j) = rng.normal();
  return g * g.transpose() / k + ridge * Matrix::Identity(k, k);
}

}  // namespace

TEST_CASE("autocovariance hand oracle") {
  Matrix v(1, 3);
  v << 1.0, 2.0, 3.0;
  // Centered values (-1, 0, 1); lag 0: (1+0+1)/3 = 2/3.
  Matrix g0 = rgcov::autocovariance(v, 0);
  CHECK(g0.rows() == 1);
  CHECK(g0(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // Lag 1: sum over t=1..2 of c_t*c_{t-1} = (0)(-1) + (1)(0) = 0, /3.
  Matrix g1 = rgcov::autocovariance(v, 1);
  CHECK(g1(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("autocovariance matches direct Eigen computation") {
  Rng rng(5);
  int k = 3, t_len = 40;
  Matrix v(k, t_len);
  for (int j = 0; j < t_len; ++j)
    for (int i = 0; i < k; ++i) v(i, j) = rng.normal();
  Vector mean = v.rowwise().mean();
  Matrix c = v.colwise() - mean;
  for (int h : {0, 1, 2, 5}) {
    Matrix expect = Matrix::Zero(k, k);
    for (int t = h; t < t_len; ++t)
      expect += c.col(t) * c.col(t - h).transpose();
    expect /= static_cast<double>(t_len);
    Matrix got = rgcov::autocovariance(v, h);
    CHECK((expect - got).norm() < 1e-13 * std::max(1.0, expect.norm()));
  }
  auto all_lags = rgcov::autocovariances(v, 5);
  CHECK(all_lags.size() == 6);
  CHECK((all_lags[0] - rgcov::autocovariance(v, 0)).norm() == 0.0);
  CHECK((all_lags[5] - rgcov::autocovariance(v, 5)).norm() == 0.0);
  // Gamma(0) symmetric positive semi-definite.
  CHECK((all_lags[0] - all_lags[0].transpose()).norm() < 1e-14);
}

TEST_CASE("autocovariance domain errors") {
  Matrix empty(2, 0);
  CHECK_THROWS_AS((void)rgcov::autocovariance(empty, 0), Error);
  Matrix v(1, 4);
  v << 1, 2, 3, 4;
  CHECK_THROWS_AS((void)rgcov::autocovariance(v, 4), Error);
  CHECK_THROWS_AS((void)rgcov::autocovariance(v, -1), Error);
}

TEST_CASE("ridge adds delta on the diagonal only") {
  Matrix m(2, 2);
  m << 1.0, 0.25, 0.25, 2.0;
  Matrix r = rgcov::ridge(m, 0.5);
  CHECK(r(0, 0) == 1.5);
  CHECK(r(1, 1) == 2.5);
  CHECK(r(0, 1) == 0.25);
  CHECK_THROWS_AS((void)rgcov::ridge(m, -0.1), Error);
}

TEST_CASE("sm_update hand oracle") {
  // C = I (2x2), x = e1, rho2 = 1: (I + e1 e1')^{-1} = diag(1/2, 1).
  Matrix c = Matrix::Identity(2, 2);
  Vector x(2);
  x << 1.0, 0.0;
  Matrix u = rgcov::sm_update(c, x, 1.0);
  CHECK(u(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(u(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(u(0, 1)) < 1e-15);
}

TEST_CASE("recursive_inverse hand oracle") {
  // Single observation e1 with rho1 = rho2 = 1:
  // (I + e1 e1')^{-1} = I - e1 e1' / 2.
  Matrix xs(2, 1);
  xs << 1.0, 0.0;
  Matrix inv = rgcov::recursive_inverse(xs, 1.0, 1.0);
  Matrix expect = Matrix::Identity(2, 2);
  expect(0, 0) = 0.5;
  CHECK((inv - expect).norm() < 1e-14);
}

TEST_CASE("recursive_inverse equals dense inverse on random problems") {
  Rng rng(99);
  for (int k : {2, 5, 12}) {
    int t_len = 3 * k + 7;
    double rho1 = 0.3, rho2 = 1.0 / t_len;
    Matrix xs(k, t_len);
    for (int t = 0; t < t_len; ++t)
      for (int i = 0; i < k; ++i) xs(i, t) = rng.normal();
    Matrix target = rho1 * Matrix::Identity(k, k) +
                    rho2 * (xs * xs.transpose());
    Matrix dense = target.inverse();
    Matrix rec = rgcov::recursive_inverse(xs, rho1, rho2);
    CHECK((dense - rec).norm() < 1e-9 * std::max(1.0, dense.norm()));
  }
}

TEST_CASE("recursive_inverse rejects bad scalars") {
  Matrix xs = Matrix::Ones(2, 1);
  CHECK_THROWS_AS((void)rgcov::recursive_inverse(xs, 0.0, 1.0), Error);
  CHECK_THROWS_AS((void)rgcov::recursive_inverse(xs, 1.0, -1.0), Error);
  Matrix empty(2, 0);
  CHECK_THROWS_AS((void)rgcov::recursive_inverse(empty, 1.0, 1.0), Error);
}

TEST_CASE("sym_eigen returns descending eigenvalues and orthonormal vectors") {
  Rng rng(17);
  Matrix m = random_spd(5, rng);
  auto dec = rgcov::sym_eigen(m);
  for (int i = 0; i + 1 < dec.values.size(); ++i)
    CHECK(dec.values(i) >= dec.values(i + 1));
  Matrix recon = dec.vectors *
                 dec.values.asDiagonal() * dec.vectors.transpose();
  CHECK((recon - m).norm() < 1e-11 * std::max(1.0, m.norm()));
  Matrix gram = dec.vectors.transpose() * dec.vectors;
  CHECK((gram - Matrix::Identity(5, 5)).norm() < 1e-12);
}

TEST_CASE("inv_sqrt inverts the square") {
  Rng rng(23);
  Matrix m = random_spd(4, rng);
  Matrix s = rgcov::inv_sqrt(m);
  Matrix should_be_inv = s * s;
  CHECK((should_be_inv * m - Matrix::Identity(4, 4)).norm() < 1e-10);

  // Singular matrix is an error (a zero eigenvalue sits at any floor).
  Matrix sing = Matrix::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS((void)rgcov::inv_sqrt(sing), Error);
  // An explicit floor below the smallest eigenvalue keeps it usable.
  Matrix ok = rgcov::inv_sqrt(m, 1e-15);
  CHECK(ok.allFinite());
}

TEST_CASE("sym_cond measures conditioning") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 1.0;
  CHECK(rgcov::sym_cond(d) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(rgcov::sym_cond(Matrix::Identity(3, 3)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}
