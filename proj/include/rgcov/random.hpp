#pragma once

#include <cstdint>
#include <random>

namespace rgcov {

// Deterministic random source. std::mt19937_64 has a fully specified sequence,
// but the std:: distributions on top of it are implementation-defined, so all
// variate generation here is hand-rolled: identical seeds give identical
// streams on every platform and standard library. Reports produced from seeded
// runs are therefore byte-identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();

  // Uniform on (0, 1) — never returns 0, safe for logs.
  double uniform_pos();

  // Standard normal (Box–Muller, cached second variate).
  double normal();

  // Gamma(shape, 1), shape > 0 (Marsaglia–Tsang; boosted for shape < 1).
  double gamma(double shape);

  // Chi-square with df > 0.
  double chi_square(double df);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace rgcov
