#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "rgcov/matrix.hpp"
#include "rgcov/random.hpp"
#include "rgcov/types.hpp"
#include "rgcov/var_process.hpp"

using rgcov::Error;
using rgcov::ErrorKind;
using rgcov::Matrix;
using rgcov::NoiseSpec;
using rgcov::Rng;
using rgcov::VarModel;
using rgcov::Vector;

namespace {

VarModel model_from_phi(Matrix phi, double dof = 4.0) {
  VarModel m;
  m.n = static_cast<int>(phi.rows());
  m.p = 1;
  m.phi = {std::move(phi)};
  m.noise = NoiseSpec::student_t(dof);
  return m;
}

}  // namespace

TEST_CASE("residuals identity: simulated path reproduces its innovations") {
  // With custom noise we know the exact innovations; on the purely causal
  // side the recursion is forward, so residuals over the kept window must
  // equal the injected innovations exactly.
  Matrix phi(2, 2);
  phi << 0.5, 0.1, 0.0, 0.3;
  VarModel m = model_from_phi(phi);
  const int T = 50, burn = 20;
  Rng rng(8);
  Matrix eps(2, T + 2 * burn);
  for (int j = 0; j < eps.cols(); ++j)
    for (int i = 0; i < 2; ++i) eps(i, j) = rng.normal();
  Matrix y = rgcov::simulate_with_innovations(m, eps, T, burn);
  REQUIRE(y.rows() == 2);
  REQUIRE(y.cols() == T);
  Matrix u = rgcov::residuals(y, m.phi);
  REQUIRE(u.cols() == T - 1);
  // Residual t matches the innovation used at kept position t+1.
  Matrix expect = eps.block(0, burn + 1, 2, T - 1);
  CHECK((u - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("companion matrix layout") {
  Matrix p1(2, 2), p2(2, 2);
  p1 << 0.1, 0.2, 0.3, 0.4;
  p2 << 0.5, 0.6, 0.7, 0.8;
  Matrix c = rgcov::companion({p1, p2});
  REQUIRE(c.rows() == 4);
  CHECK((c.block(0, 0, 2, 2) - p1).norm() == 0.0);
  CHECK((c.block(0, 2, 2, 2) - p2).norm() == 0.0);
  CHECK((c.block(2, 0, 2, 2) - Matrix::Identity(2, 2)).norm() == 0.0);
  CHECK(c.block(2, 2, 2, 2).norm() == 0.0);
}

TEST_CASE("classify counts eigenvalues by modulus") {
  Matrix phi(2, 2);
  phi << 0.5, 0.0, 0.0, 2.0;
  auto cls = rgcov::classify({phi});
  CHECK(cls.n_causal == 1);
  CHECK(cls.n_noncausal == 1);
  REQUIRE(cls.moduli.size() == 2);
  CHECK(cls.moduli[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cls.moduli[1] == doctest::Approx(2.0).epsilon(1e-12));

  Matrix unit(1, 1);
  unit << 1.0;
  CHECK_THROWS_AS((void)rgcov::classify({unit}), Error);
  try {
    (void)rgcov::classify({unit});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnitRoot);
  }
}

TEST_CASE("decompose diagonal matrix: identity basis") {
  Matrix phi(2, 2);
  phi << 0.5, 0.0, 0.0, 2.0;
  auto split = rgcov::decompose(phi);
  CHECK(split.n1 == 1);
  CHECK(split.n2 == 1);
  CHECK(split.j1(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(split.j2(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  Matrix j = Matrix::Zero(2, 2);
  j.topLeftCorner(1, 1) = split.j1;
  j.bottomRightCorner(1, 1) = split.j2;
  CHECK((split.a * j * split.a_inv - phi).norm() < 1e-12);
  CHECK((split.a * split.a_inv - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("decompose handles complex pairs as rotation blocks") {
  // Companion of the noncausal cycle with complex pair modulus sqrt(2) plus
  // one causal real eigenvalue 0.4.
  Matrix basis(3, 3);
  basis << 1.0, 0.2, -0.1,
           0.1, 1.1, 0.3,
           -0.2, 0.15, 0.9;
  Matrix blocks = Matrix::Zero(3, 3);
  blocks(0, 0) = 0.4;
  blocks(1, 1) = 1.0;  blocks(1, 2) = 1.0;
  blocks(2, 1) = -1.0; blocks(2, 2) = 1.0;  // eigenvalues 1 +- i
  Matrix phi = basis * blocks * basis.inverse();

  auto split = rgcov::decompose(phi);
  CHECK(split.n1 == 1);
  CHECK(split.n2 == 2);
  Matrix j = Matrix::Zero(3, 3);
  j.topLeftCorner(1, 1) = split.j1;
  j.bottomRightCorner(2, 2) = split.j2;
  CHECK((split.a * j * split.a_inv - phi).norm() < 1e-9);
  // The 2x2 block encodes the pair: trace 2a, det a^2 + b^2.
  CHECK(split.j2.trace() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(split.j2.determinant() == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("component maps reconstruct the series") {
  Matrix phi(3, 3);
  phi << 0.2, 0.1, 0.0,
         0.05, 0.3, 0.1,
         0.0, 0.2, 1.6;
  auto split = rgcov::decompose(phi);
  CHECK(split.n1 + split.n2 == 3);
  Rng rng(44);
  Matrix y(3, 20);
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i < 3; ++i) y(i, j) = rng.normal();
  Matrix y1 = split.a_row1 * y;
  Matrix y2 = split.a_row2 * y;
  Matrix recon = split.a1 * y1 + split.a2 * y2;
  CHECK((recon - y).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("decompose error taxonomy") {
  Matrix unit(2, 2);
  unit << 1.0, 0.0, 0.0, 0.5;
  CHECK_THROWS_AS((void)rgcov::decompose(unit), Error);

  // Jordan block: defective, not diagonalizable.
  Matrix jordan(2, 2);
  jordan << 0.5, 1.0, 0.0, 0.5;
  try {
    (void)rgcov::decompose(jordan);
    CHECK_MESSAGE(false, "expected NotDiagonalizable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotDiagonalizable);
  }
}

TEST_CASE("pure causal AR(1): simulate matches theoretical autocorrelation") {
  Matrix phi(1, 1);
  phi << 0.6;
  VarModel m = model_from_phi(phi, 5.0);
  Matrix y = rgcov::simulate(m, 20000, 300, 71);
  auto g = rgcov::autocovariances(y, 1);
  double rho = g[1](0, 0) / g[0](0, 0);
  CHECK(rho == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("pure noncausal AR(1): lag-1 autocorrelation is 1/phi") {
  // y_t = 2 y_{t-1} + eps has the two-sided stationary solution with the
  // same autocorrelation as a causal AR(1) with coefficient 1/2.
  Matrix phi(1, 1);
  phi << 2.0;
  VarModel m = model_from_phi(phi, 5.0);
  Matrix y = rgcov::simulate(m, 20000, 300, 72);
  REQUIRE(y.allFinite());
  auto g = rgcov::autocovariances(y, 1);
  double rho = g[1](0, 0) / g[0](0, 0);
  CHECK(rho == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("simulate is deterministic in the seed") {
  Matrix phi(2, 2);
  phi << 0.3, 0.1, 0.0, 1.8;
  VarModel m = model_from_phi(phi);
  Matrix a = rgcov::simulate(m, 100, 150, 5);
  Matrix b = rgcov::simulate(m, 100, 150, 5);
  Matrix c = rgcov::simulate(m, 100, 150, 6);
  CHECK((a - b).norm() == 0.0);
  CHECK((a - c).norm() != 0.0);
}

TEST_CASE("mixed VAR(2) simulation stays stationary") {
  // p = 2 with a noncausal companion root.
  Matrix p1(2, 2), p2(2, 2);
  p1 << 0.2, 0.0, 0.1, 1.7;
  p2 << 0.05, 0.0, 0.0, 0.1;
  VarModel m;
  m.n = 2;
  m.p = 2;
  m.phi = {p1, p2};
  m.noise = NoiseSpec::student_t(5.0);
  auto cls = rgcov::classify(m.phi);
  CHECK(cls.n_noncausal >= 1);
  Matrix y = rgcov::simulate(m, 400, 250, 9);
  CHECK(y.allFinite());
  CHECK(y.cwiseAbs().maxCoeff() < 1e4);
  // Residuals of the true model over the kept window behave like noise:
  // their lag-0 covariance is finite and nondegenerate.
  Matrix u = rgcov::residuals(y, m.phi);
  CHECK(u.allFinite());
  Matrix g0 = rgcov::autocovariance(u, 0);
  CHECK(g0(0, 0) > 0.0);
  CHECK(g0(1, 1) > 0.0);
}

TEST_CASE("large mixed system simulates finite paths") {
  std::vector<double> eigs{-0.437, -0.374, -0.360, -0.263, -0.248,
                           -0.201, -0.162, -0.105, -0.004, 0.320,
                           0.277,  0.200,  0.162,  0.164,  1.5};
  Matrix phi = rgcov::var_from_spectrum(eigs, 0.25, 2024);
  auto cls = rgcov::classify({phi});
  CHECK(cls.n_causal == 14);
  CHECK(cls.n_noncausal == 1);
  VarModel m = model_from_phi(phi);
  Matrix y = rgcov::simulate(m, 500, 200, 3);
  CHECK(y.rows() == 15);
  CHECK(y.allFinite());
}

TEST_CASE("var_from_spectrum reproduces the requested eigenvalues") {
  std::vector<double> eigs{0.20, 0.41, 1.5};
  Matrix phi = rgcov::var_from_spectrum(eigs, 0.25, 11);
  Matrix phi2 = rgcov::var_from_spectrum(eigs, 0.25, 11);
  CHECK((phi - phi2).norm() == 0.0);  // deterministic
  auto cls = rgcov::classify({phi});
  REQUIRE(cls.moduli.size() == 3);
  CHECK(cls.moduli[0] == doctest::Approx(0.20).epsilon(1e-8));
  CHECK(cls.moduli[1] == doctest::Approx(0.41).epsilon(1e-8));
  CHECK(cls.moduli[2] == doctest::Approx(1.5).epsilon(1e-8));
}

TEST_CASE("student-t noise has heavy tails but draws stay finite") {
  Rng rng(15);
  Matrix x = rgcov::draw_student_t(4.0, Matrix(), 2, 50000, rng);
  REQUIRE(x.rows() == 2);
  CHECK(x.allFinite());
  // Variance of t(4) is dof/(dof-2) = 2.
  double v = x.row(0).squaredNorm() / x.cols();
  CHECK(v == doctest::Approx(2.0).epsilon(0.25));
  CHECK_THROWS_AS((void)rgcov::draw_student_t(2.0, Matrix(), 1, 10, rng),
                  Error);
}

TEST_CASE("model JSON round-trip") {
  Matrix p1(2, 2), p2(2, 2);
  p1 << 0.25, -0.1, 0.3, 1.5;
  p2 << 0.01, 0.02, 0.03, 0.04;
  VarModel m;
  m.n = 2;
  m.p = 2;
  m.phi = {p1, p2};
  Matrix scale(2, 2);
  scale << 1.0, 0.2, 0.2, 1.5;
  m.noise = NoiseSpec::student_t(4.5, scale);
  std::string text = rgcov::to_json(m);
  VarModel back = rgcov::var_model_from_json(text);
  CHECK(back.n == 2);
  CHECK(back.p == 2);
  REQUIRE(back.phi.size() == 2);
  CHECK((back.phi[0] - p1).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((back.phi[1] - p2).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(back.noise.dof == doctest::Approx(4.5).epsilon(1e-15));
  CHECK((back.noise.scale - scale).cwiseAbs().maxCoeff() < 1e-15);
}
