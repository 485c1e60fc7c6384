#pragma once

#include <string>
#include <vector>

#include "rgcov/types.hpp"

namespace rgcov {

// Residual transforms a_j. The named set covers the standard battery of
// linear/power/sign/absolute/logarithmic shapes; PowerExp(p, t) is the
// exponentially damped power family |u|^p * exp(-t |u|) whose damping keeps
// every member square integrable.
enum class TransformKind {
  Linear,
  Square,
  Cube,
  Sign,
  Abs,
  AbsCube,
  LogAbs,
  LogAbsSq,
  LogAbsCube,
  SqrtAbs,
  PowerExp,
};

// |u| is floored at this value inside logarithms.
inline constexpr double kLogGuard = 1e-12;

struct Transform {
  TransformKind kind = TransformKind::Linear;
  int power = 0;       // PowerExp only
  double damping = 0;  // PowerExp only

  double operator()(double u) const;
  std::string name() const;
};

struct TransformSpec {
  std::vector<Transform> items;

  int size() const { return static_cast<int>(items.size()); }
};

// A transformed series: K = J * n rows, T columns. Row (j-1)*n + i holds
// a_j applied to component i (1-based), i.e. transform-major blocks with the
// linear block (when first in the spec) equal to the input.
struct TransformedSeries {
  Matrix values;
  int source_dim = 0;      // n
  int num_transforms = 0;  // J
};

// Apply a transform battery to an n x T series.
TransformedSeries apply(const Matrix& u, const TransformSpec& spec);

// The ten named transforms in canonical order: linear, square, cube, sign,
// abs, abscube, logabs, logabssq, logabscube, sqrtabs.
TransformSpec named_battery();

// Damped-power generator system: PowerExp(p, j/n_points) for p = 0..p_max
// (outer) and j = 1..n_points (inner). (p_max+1)*n_points members.
TransformSpec dense_subsystem(int n_points, int p_max);

// JSON round-trip. The serialized form is an array whose entries are either
// a transform name string or {"powerexp": {"p": int, "t": double}}.
std::string to_json(const TransformSpec& spec);
TransformSpec transform_spec_from_json(const std::string& json_text);

// Parse a comma-separated list like "linear,square,powerexp:2:0.5".
TransformSpec transform_spec_from_csv(const std::string& list);

}  // namespace rgcov
