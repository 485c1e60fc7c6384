#include "rgcov/random.hpp"

#include <cmath>

#include "rgcov/types.hpp"

namespace rgcov {

double Rng::uniform() {
  // Top 53 bits -> [0, 1).
  return (engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform_pos();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

double Rng::gamma(double shape) {
  require(shape > 0.0, ErrorKind::Domain, "gamma shape must be positive");
  if (shape < 1.0) {
    // Boost trick: X ~ Gamma(shape+1), then X * U^(1/shape) ~ Gamma(shape).
    double x = gamma(shape + 1.0);
    double u = uniform_pos();
    return x * std::pow(u, 1.0 / shape);
  }
  // Marsaglia–Tsang squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::chi_square(double df) {
  require(df > 0.0, ErrorKind::Domain, "chi_square df must be positive");
  return 2.0 * gamma(0.5 * df);
}

}  // namespace rgcov
