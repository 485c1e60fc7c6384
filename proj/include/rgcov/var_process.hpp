#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rgcov/random.hpp"
#include "rgcov/types.hpp"

namespace rgcov {

// Innovation distribution for simulation. StudentT is the serializable kind;
// Custom hands full control to caller code (tests, bootstrap) and cannot be
// written to JSON.
struct NoiseSpec {
  enum class Kind { StudentT, Custom };

  Kind kind = Kind::StudentT;
  double dof = 4.0;
  Matrix scale;  // empty means identity

  // dim x count innovations for a given seed; used when kind == Custom.
  std::function<Matrix(int dim, int count, std::uint64_t seed)> custom;

  static NoiseSpec student_t(double dof, Matrix scale = Matrix());
  static NoiseSpec custom_source(
      std::function<Matrix(int, int, std::uint64_t)> fn);
};

// VAR(p) model y_t = Phi_1 y_{t-1} + ... + Phi_p y_{t-p} + eps_t.
struct VarModel {
  int n = 0;
  int p = 0;
  std::vector<Matrix> phi;
  NoiseSpec noise;
};

// Eigenvalue classification of the companion matrix.
struct Classification {
  int n_causal = 0;     // moduli < 1 (companion-level count, multiplicities included)
  int n_noncausal = 0;  // moduli > 1
  std::vector<double> moduli;  // ascending
};

// Real-block causal/noncausal split Phi = A * blockdiag(J1, J2) * A^{-1},
// J1 holding the eigenvalues inside the unit circle and J2 those outside.
// Complex pairs a +- bi appear as 2x2 blocks [[a, b], [-b, a]].
struct CausalNoncausalSplit {
  int n1 = 0;
  int n2 = 0;
  Matrix j1;      // n1 x n1
  Matrix j2;      // n2 x n2
  Matrix a;       // full n x n basis
  Matrix a_inv;
  Matrix a1;      // first n1 columns of a
  Matrix a2;      // last n2 columns
  Matrix a_row1;  // first n1 rows of a_inv (the causal component map, y*1 = A^1 y)
  Matrix a_row2;  // last n2 rows (the noncausal component map)
};

// Residuals u_t = y_t - sum_k Phi_k y_{t-k}, t = p+1..T; n x (T-p).
Matrix residuals(const Matrix& y, const std::vector<Matrix>& phi);

// Companion matrix of a VAR(p); np x np.
Matrix companion(const std::vector<Matrix>& phi);

// Classify companion eigenvalues. Throws UnitRoot when any modulus is within
// 1e-8 of one.
Classification classify(const std::vector<Matrix>& phi);

// Real-block eigendecomposition split for a single coefficient matrix
// (p = 1 view). Throws UnitRoot near the unit circle, NotDiagonalizable when
// the eigenvector basis is numerically defective.
CausalNoncausalSplit decompose(const Matrix& phi);

// Same at the companion level for p >= 1.
CausalNoncausalSplit decompose_companion(const VarModel& model);

// Strictly stationary two-sided simulation: causal components recurse
// forward, noncausal components recurse backward, `burn` observations are
// dropped at each end. Deterministic in (model, T, burn, seed).
Matrix simulate(const VarModel& model, int T, int burn, std::uint64_t seed);

// Deterministic core used by simulate() and the specification-test bootstrap:
// the caller supplies all innovations (n x (T + 2*burn) matrix).
Matrix simulate_with_innovations(const VarModel& model, const Matrix& eps, int T, int burn);

// Multivariate Student-t draws: x = chol(scale) z sqrt(dof/w) with one
// chi-square mixing variable per column. dof > 2 required.
Matrix draw_student_t(double dof, const Matrix& scale, int dim, int count, Rng& rng);

// Draw innovations according to a NoiseSpec.
Matrix draw_noise(const NoiseSpec& noise, int dim, int count, std::uint64_t seed);

// Build an n x n coefficient matrix with prescribed real eigenvalues, using a
// seeded well-conditioned random basis A = I + mixing * G (resampled until
// cond(A) < 10). Records of the construction live in the returned matrix
// itself (serialize it); the same (eigenvalues, mixing, seed) always gives
// the same matrix.
Matrix var_from_spectrum(const std::vector<double>& eigenvalues, double mixing,
                         std::uint64_t seed);

// JSON (de)serialization of models. Only StudentT noise round-trips.
std::string to_json(const VarModel& model);
VarModel var_model_from_json(const std::string& json_text);

}  // namespace rgcov
