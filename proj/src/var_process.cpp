#include "rgcov/var_process.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <json.hpp>
#include <sstream>

namespace rgcov {

namespace {

constexpr double kUnitCircleTol = 1e-8;

void check_model_shapes(int n, int p, const std::vector<Matrix>& phi) {
  require(n >= 1, ErrorKind::Domain, "model dimension must be >= 1");
  require(p >= 1, ErrorKind::Domain, "model order must be >= 1");
  require(static_cast<int>(phi.size()) == p, ErrorKind::Domain,
          "number of coefficient matrices must equal the model order");
  for (const Matrix& m : phi) {
    require(m.rows() == n && m.cols() == n, ErrorKind::Domain,
            "coefficient matrices must be n x n");
    require(m.allFinite(), ErrorKind::Data, "coefficient matrix has non-finite entries");
  }
}

}  // namespace

NoiseSpec NoiseSpec::student_t(double dof, Matrix scale) {
  NoiseSpec s;
  s.kind = Kind::StudentT;
  s.dof = dof;
  s.scale = std::move(scale);
  return s;
}

NoiseSpec NoiseSpec::custom_source(std::function<Matrix(int, int, std::uint64_t)> fn) {
  NoiseSpec s;
  s.kind = Kind::Custom;
  s.custom = std::move(fn);
  return s;
}

Matrix residuals(const Matrix& y, const std::vector<Matrix>& phi) {
  const int n = static_cast<int>(y.rows());
  const int T = static_cast<int>(y.cols());
  const int p = static_cast<int>(phi.size());
  check_model_shapes(n, p, phi);
  require(T > p, ErrorKind::Domain, "series too short for the model order");
  require(y.allFinite(), ErrorKind::Data, "series has non-finite entries");

  Matrix u = y.rightCols(T - p);
  for (int k = 1; k <= p; ++k) {
    u.noalias() -= phi[k - 1] * y.middleCols(p - k, T - p);
  }
  return u;
}

Matrix companion(const std::vector<Matrix>& phi) {
  const int p = static_cast<int>(phi.size());
  require(p >= 1, ErrorKind::Domain, "companion: empty coefficient list");
  const int n = static_cast<int>(phi[0].rows());
  check_model_shapes(n, p, phi);

  Matrix c = Matrix::Zero(static_cast<long>(n) * p, static_cast<long>(n) * p);
  for (int k = 0; k < p; ++k) c.block(0, k * n, n, n) = phi[k];
  if (p > 1) {
    c.block(n, 0, static_cast<long>(n) * (p - 1), static_cast<long>(n) * (p - 1)) =
        Matrix::Identity(static_cast<long>(n) * (p - 1), static_cast<long>(n) * (p - 1));
  }
  return c;
}

Classification classify(const std::vector<Matrix>& phi) {
  Matrix c = companion(phi);
  Eigen::EigenSolver<Matrix> solver(c, /*computeEigenvectors=*/false);
  require(solver.info() == Eigen::Success, ErrorKind::Internal,
          "classify: eigensolver failed");

  Classification out;
  const auto& vals = solver.eigenvalues();
  out.moduli.reserve(vals.size());
  for (long i = 0; i < vals.size(); ++i) out.moduli.push_back(std::abs(vals(i)));
  std::sort(out.moduli.begin(), out.moduli.end());
  for (double m : out.moduli) {
    if (std::abs(m - 1.0) < kUnitCircleTol) {
      std::ostringstream msg;
      msg << "eigenvalue modulus " << m << " is within " << kUnitCircleTol
          << " of the unit circle";
      throw_error(ErrorKind::UnitRoot, msg.str());
    }
    if (m < 1.0) {
      ++out.n_causal;
    } else {
      ++out.n_noncausal;
    }
  }
  return out;
}

namespace {

// One real-block unit: either a real eigenvalue with its eigenvector, or a
// complex pair contributing two basis columns and a 2x2 rotation-scaling block.
struct SpectralUnit {
  double modulus = 0.0;
  int width = 1;          // 1 for real, 2 for a complex pair
  double re = 0.0;        // eigenvalue (real part)
  double im = 0.0;        // positive imaginary part for pairs, 0 for real
  Matrix columns;         // n x width basis columns
};

std::vector<SpectralUnit> spectral_units(const Matrix& phi) {
  const int n = static_cast<int>(phi.rows());
  Eigen::EigenSolver<Matrix> solver(phi);
  require(solver.info() == Eigen::Success, ErrorKind::Internal,
          "decompose: eigensolver failed");
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();

  std::vector<bool> used(n, false);
  std::vector<SpectralUnit> units;
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    const std::complex<double> lam = vals(i);
    const double imag_tol = 1e-10 * (1.0 + std::abs(lam));
    if (std::abs(lam.imag()) <= imag_tol) {
      SpectralUnit u;
      u.modulus = std::abs(lam.real());
      u.width = 1;
      u.re = lam.real();
      u.columns.resize(n, 1);
      Eigen::VectorXcd v = vecs.col(i);
      // Rotate the phase so the largest-modulus coordinate is real positive,
      // making the real representative deterministic.
      int arg = 0;
      double best = -1.0;
      for (int r = 0; r < n; ++r) {
        if (std::abs(v(r)) > best) {
          best = std::abs(v(r));
          arg = r;
        }
      }
      require(best > 0.0, ErrorKind::NotDiagonalizable, "decompose: zero eigenvector");
      v *= std::conj(v(arg)) / std::abs(v(arg));
      Vector vr = v.real();
      const double norm = vr.norm();
      require(norm > 1e-12, ErrorKind::NotDiagonalizable,
              "decompose: eigenvector collapsed to zero after phase alignment");
      u.columns.col(0) = vr / norm;
      used[i] = true;
      units.push_back(std::move(u));
    } else {
      // Find the conjugate partner.
      int partner = -1;
      for (int j = i + 1; j < n; ++j) {
        if (used[j]) continue;
        if (std::abs(vals(j) - std::conj(lam)) <= 1e-8 * (1.0 + std::abs(lam))) {
          partner = j;
          break;
        }
      }
      require(partner >= 0, ErrorKind::NotDiagonalizable,
              "decompose: complex eigenvalue without a conjugate partner");
      used[i] = true;
      used[partner] = true;

      // Work with the member whose imaginary part is positive.
      std::complex<double> lam_pos = lam.imag() > 0.0 ? lam : vals(partner);
      Eigen::VectorXcd v = lam.imag() > 0.0 ? vecs.col(i) : vecs.col(partner);
      int arg = 0;
      double best = -1.0;
      for (int r = 0; r < n; ++r) {
        if (std::abs(v(r)) > best) {
          best = std::abs(v(r));
          arg = r;
        }
      }
      require(best > 0.0, ErrorKind::NotDiagonalizable, "decompose: zero eigenvector");
      v *= std::conj(v(arg)) / std::abs(v(arg));
      v /= v.norm();

      SpectralUnit u;
      u.modulus = std::abs(lam_pos);
      u.width = 2;
      u.re = lam_pos.real();
      u.im = lam_pos.imag();
      u.columns.resize(n, 2);
      u.columns.col(0) = v.real();
      u.columns.col(1) = v.imag();
      units.push_back(std::move(u));
    }
  }

  std::stable_sort(units.begin(), units.end(),
                   [](const SpectralUnit& a, const SpectralUnit& b) {
                     return a.modulus < b.modulus;
                   });
  return units;
}

}  // namespace

CausalNoncausalSplit decompose(const Matrix& phi) {
  const int n = static_cast<int>(phi.rows());
  require(phi.cols() == n && n >= 1, ErrorKind::Domain, "decompose: matrix must be square");
  require(phi.allFinite(), ErrorKind::Data, "decompose: non-finite entries");

  std::vector<SpectralUnit> units = spectral_units(phi);
  for (const SpectralUnit& u : units) {
    if (std::abs(u.modulus - 1.0) < kUnitCircleTol) {
      throw_error(ErrorKind::UnitRoot, "decompose: eigenvalue modulus within tolerance of one");
    }
  }

  CausalNoncausalSplit split;
  for (const SpectralUnit& u : units) {
    if (u.modulus < 1.0) {
      split.n1 += u.width;
    } else {
      split.n2 += u.width;
    }
  }

  split.a.resize(n, n);
  split.j1 = Matrix::Zero(split.n1, split.n1);
  split.j2 = Matrix::Zero(split.n2, split.n2);
  int col = 0, c1 = 0, c2 = 0;
  for (const SpectralUnit& u : units) {
    split.a.block(0, col, n, u.width) = u.columns;
    const bool causal = u.modulus < 1.0;
    Matrix block;
    if (u.width == 1) {
      block = Matrix::Constant(1, 1, u.re);
    } else {
      block.resize(2, 2);
      block << u.re, u.im, -u.im, u.re;
    }
    if (causal) {
      split.j1.block(c1, c1, u.width, u.width) = block;
      c1 += u.width;
    } else {
      split.j2.block(c2, c2, u.width, u.width) = block;
      c2 += u.width;
    }
    col += u.width;
  }

  // Reorder columns: all causal units first. Units are modulus-sorted and no
  // modulus equals one, so causal units already precede noncausal ones.
  Eigen::FullPivLU<Matrix> lu(split.a);
  require(lu.isInvertible(), ErrorKind::NotDiagonalizable,
          "decompose: eigenvector basis is numerically singular");
  split.a_inv = lu.inverse();

  // Verify the real-block reconstruction; a defective matrix that slipped
  // through shows up here.
  Matrix j_full = Matrix::Zero(n, n);
  j_full.block(0, 0, split.n1, split.n1) = split.j1;
  j_full.block(split.n1, split.n1, split.n2, split.n2) = split.j2;
  const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  const double err = (split.a * j_full * split.a_inv - phi).cwiseAbs().maxCoeff();
  require(err <= 1e-9 * scale, ErrorKind::NotDiagonalizable,
          "decompose: real-block reconstruction failed (matrix close to defective)");

  split.a1 = split.a.leftCols(split.n1);
  split.a2 = split.a.rightCols(split.n2);
  split.a_row1 = split.a_inv.topRows(split.n1);
  split.a_row2 = split.a_inv.bottomRows(split.n2);
  return split;
}

CausalNoncausalSplit decompose_companion(const VarModel& model) {
  check_model_shapes(model.n, model.p, model.phi);
  return decompose(companion(model.phi));
}

Matrix draw_student_t(double dof, const Matrix& scale, int dim, int count, Rng& rng) {
  require(dof > 2.0, ErrorKind::Domain,
          "student-t innovations require dof > 2 (finite variance)");
  require(dim >= 1 && count >= 0, ErrorKind::Domain, "draw_student_t: bad dimensions");

  Matrix chol = Matrix::Identity(dim, dim);
  if (scale.size() != 0) {
    require(scale.rows() == dim && scale.cols() == dim, ErrorKind::Domain,
            "scale matrix dimension mismatch");
    Eigen::LLT<Matrix> llt(scale);
    require(llt.info() == Eigen::Success, ErrorKind::Domain,
            "scale matrix must be symmetric positive definite");
    chol = llt.matrixL();
  }

  Matrix out(dim, count);
  Vector z(dim);
  for (int t = 0; t < count; ++t) {
    // Draw order fixed for reproducibility: mixing variable first, then the
    // normal vector, column by column.
    const double w = rng.chi_square(dof);
    for (int i = 0; i < dim; ++i) z(i) = rng.normal();
    out.col(t) = chol * z * std::sqrt(dof / w);
  }
  return out;
}

Matrix draw_noise(const NoiseSpec& noise, int dim, int count, std::uint64_t seed) {
  if (noise.kind == NoiseSpec::Kind::Custom) {
    require(static_cast<bool>(noise.custom), ErrorKind::Config,
            "custom noise source is empty");
    Matrix e = noise.custom(dim, count, seed);
    require(e.rows() == dim && e.cols() == count, ErrorKind::Config,
            "custom noise source returned wrong dimensions");
    return e;
  }
  Rng rng(seed);
  return draw_student_t(noise.dof, noise.scale, dim, count, rng);
}

Matrix simulate_with_innovations(const VarModel& model, const Matrix& eps, int T, int burn) {
  check_model_shapes(model.n, model.p, model.phi);
  require(T >= 1, ErrorKind::Domain, "simulate: T must be >= 1");
  require(burn >= model.p, ErrorKind::Domain,
          "simulate: burn-in must be at least the model order");
  const int n = model.n;
  const int total = T + 2 * burn;
  require(eps.rows() == n && eps.cols() == total, ErrorKind::Domain,
          "innovation matrix must be n x (T + 2*burn)");
  require(eps.allFinite(), ErrorKind::Data, "innovations contain non-finite values");

  CausalNoncausalSplit split = decompose_companion(model);
  const int n1 = split.n1;
  const int n2 = split.n2;

  // Companion innovations are [eps_t; 0]; their split coordinates only need
  // the first n columns of a_inv.
  Matrix b1 = split.a_row1.leftCols(n);  // n1 x n
  Matrix b2 = split.a_row2.leftCols(n);  // n2 x n

  Matrix s1 = Matrix::Zero(n1, total);
  if (n1 > 0) {
    s1.col(0) = b1 * eps.col(0);
    for (int t = 1; t < total; ++t) {
      s1.col(t).noalias() = split.j1 * s1.col(t - 1);
      s1.col(t).noalias() += b1 * eps.col(t);
    }
  }

  Matrix s2 = Matrix::Zero(n2, total);
  if (n2 > 0) {
    Eigen::PartialPivLU<Matrix> j2_lu(split.j2);
    for (int t = total - 2; t >= 0; --t) {
      Vector rhs = s2.col(t + 1) - b2 * eps.col(t + 1);
      s2.col(t) = j2_lu.solve(rhs);
    }
  }

  // Companion state -> observables (top n rows).
  Matrix top1 = split.a1.topRows(n);
  Matrix top2 = split.a2.topRows(n);
  Matrix y(n, T);
  for (int t = 0; t < T; ++t) {
    const int src = burn + t;
    y.col(t).noalias() = top1 * s1.col(src);
    y.col(t).noalias() += top2 * s2.col(src);
  }
  require(y.allFinite(), ErrorKind::Internal, "simulate: output has non-finite values");
  return y;
}

Matrix simulate(const VarModel& model, int T, int burn, std::uint64_t seed) {
  check_model_shapes(model.n, model.p, model.phi);
  require(T >= 1, ErrorKind::Domain, "simulate: T must be >= 1");
  require(burn >= model.p, ErrorKind::Domain,
          "simulate: burn-in must be at least the model order");
  // Classify early for a clear unit-root diagnostic before drawing noise.
  classify(model.phi);
  Matrix eps = draw_noise(model.noise, model.n, T + 2 * burn, seed);
  return simulate_with_innovations(model, eps, T, burn);
}

Matrix var_from_spectrum(const std::vector<double>& eigenvalues, double mixing,
                         std::uint64_t seed) {
  const int n = static_cast<int>(eigenvalues.size());
  require(n >= 1, ErrorKind::Domain, "var_from_spectrum: empty eigenvalue list");
  require(mixing >= 0.0, ErrorKind::Domain, "var_from_spectrum: mixing must be >= 0");
  for (double lam : eigenvalues) {
    require(std::abs(std::abs(lam) - 1.0) >= kUnitCircleTol, ErrorKind::UnitRoot,
            "var_from_spectrum: eigenvalue on the unit circle");
  }

  Rng rng(seed);
  Matrix a(n, n);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) a(i, j) = (i == j ? 1.0 : 0.0) + mixing * rng.normal();
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
    if (cond < 10.0) {
      Vector d = Eigen::Map<const Vector>(eigenvalues.data(), n);
      return a * d.asDiagonal() * a.inverse();
    }
  }
  throw_error(ErrorKind::Internal,
              "var_from_spectrum: could not draw a well-conditioned basis");
}

std::string to_json(const VarModel& model) {
  check_model_shapes(model.n, model.p, model.phi);
  nlohmann::json j;
  j["n"] = model.n;
  j["p"] = model.p;
  nlohmann::json phis = nlohmann::json::array();
  for (const Matrix& m : model.phi) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    phis.push_back(rows);
  }
  j["phi"] = phis;
  nlohmann::json noise;
  if (model.noise.kind != NoiseSpec::Kind::StudentT) {
    // Custom sources are process-local; record a marker that cannot be
    // reconstructed so round-trips fail loudly instead of silently.
    noise["kind"] = "custom";
    j["noise"] = noise;
    return j.dump(2);
  }
  noise["kind"] = "student_t";
  noise["dof"] = model.noise.dof;
  if (model.noise.scale.size() != 0) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < model.noise.scale.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < model.noise.scale.cols(); ++c)
        row.push_back(model.noise.scale(r, c));
      rows.push_back(row);
    }
    noise["scale"] = rows;
  }
  j["noise"] = noise;
  return j.dump(2);
}

namespace {

Matrix matrix_from_json(const nlohmann::json& rows, const char* what) {
  require(rows.is_array() && !rows.empty(), ErrorKind::Config,
          std::string(what) + " must be a non-empty array of rows");
  const int r = static_cast<int>(rows.size());
  require(rows[0].is_array() && !rows[0].empty(), ErrorKind::Config,
          std::string(what) + " rows must be non-empty arrays");
  const int c = static_cast<int>(rows[0].size());
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    require(rows[i].is_array() && static_cast<int>(rows[i].size()) == c,
            ErrorKind::Config, std::string(what) + " rows have inconsistent lengths");
    for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

VarModel var_model_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_error(ErrorKind::Config, std::string("model is not valid JSON: ") + e.what());
  }
  require(j.contains("n") && j.contains("p") && j.contains("phi"), ErrorKind::Config,
          "model JSON requires fields n, p, phi");
  VarModel model;
  model.n = j.at("n").get<int>();
  model.p = j.at("p").get<int>();
  const nlohmann::json& phis = j.at("phi");
  require(phis.is_array(), ErrorKind::Config, "phi must be an array of matrices");
  for (const auto& entry : phis) {
    model.phi.push_back(matrix_from_json(entry, "phi"));
  }
  if (j.contains("noise")) {
    const nlohmann::json& noise = j.at("noise");
    const std::string kind = noise.value("kind", "student_t");
    require(kind == "student_t", ErrorKind::Config, "unknown noise kind: " + kind);
    model.noise.kind = NoiseSpec::Kind::StudentT;
    model.noise.dof = noise.value("dof", 4.0);
    if (noise.contains("scale")) {
      model.noise.scale = matrix_from_json(noise.at("scale"), "noise scale");
    }
  }
  check_model_shapes(model.n, model.p, model.phi);
  return model;
}

}  // namespace rgcov
