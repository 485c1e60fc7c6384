#include <doctest.h>

#include <cmath>

#include "rgcov/random.hpp"
#include "rgcov/transforms.hpp"
#include "rgcov/types.hpp"

using rgcov::Error;
using rgcov::Matrix;
using rgcov::Transform;
using rgcov::TransformKind;
using rgcov::TransformSpec;

TEST_CASE("named battery order and pointwise values") {
  TransformSpec spec = rgcov::named_battery();
  REQUIRE(spec.size() == 10);
  CHECK(spec.items[0].name() == "linear");
  CHECK(spec.items[1].name() == "square");
  CHECK(spec.items[2].name() == "cube");
  CHECK(spec.items[3].name() == "sign");
  CHECK(spec.items[4].name() == "abs");
  CHECK(spec.items[5].name() == "abscube");
  CHECK(spec.items[6].name() == "logabs");
  CHECK(spec.items[7].name() == "logabssq");
  CHECK(spec.items[8].name() == "logabscube");
  CHECK(spec.items[9].name() == "sqrtabs");

  const double u = -1.7;
  CHECK(spec.items[0](u) == u);
  CHECK(spec.items[1](u) == doctest::Approx(u * u).epsilon(1e-15));
  CHECK(spec.items[2](u) == doctest::Approx(u * u * u).epsilon(1e-15));
  CHECK(spec.items[3](u) == -1.0);
  CHECK(spec.items[3](0.0) == 0.0);
  CHECK(spec.items[3](2.0) == 1.0);
  CHECK(spec.items[4](u) == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(spec.items[5](u) == doctest::Approx(1.7 * 1.7 * 1.7).epsilon(1e-15));
  CHECK(spec.items[6](u) == doctest::Approx(std::log(1.7)).epsilon(1e-15));
  CHECK(spec.items[7](u) ==
        doctest::Approx(std::pow(std::log(1.7), 2)).epsilon(1e-14));
  CHECK(spec.items[8](u) ==
        doctest::Approx(std::pow(std::log(1.7), 3)).epsilon(1e-14));
  CHECK(spec.items[9](u) == doctest::Approx(std::sqrt(1.7)).epsilon(1e-15));
}

TEST_CASE("log transforms guard |u| away from zero") {
  TransformSpec spec = rgcov::named_battery();
  const Transform& logabs = spec.items[6];
  CHECK(logabs(0.0) == doctest::Approx(std::log(rgcov::kLogGuard)).epsilon(1e-15));
  CHECK(std::isfinite(logabs(1e-300)));
}

TEST_CASE("powerexp hand oracle") {
  Transform t;
  t.kind = TransformKind::PowerExp;
  t.power = 2;
  t.damping = 0.5;
  // |1|^2 * exp(-0.5*|1|) = exp(-0.5).
  CHECK(t(1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(t(-1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(t(0.0) == 0.0);
  CHECK(t.name() == "powerexp:2:0.5");
}

TEST_CASE("dense subsystem enumerates damped powers") {
  TransformSpec a = rgcov::dense_subsystem(1, 1);
  CHECK(a.size() == 2);
  TransformSpec b = rgcov::dense_subsystem(2, 0);
  CHECK(b.size() == 2);
  TransformSpec c = rgcov::dense_subsystem(4, 2);
  CHECK(c.size() == 12);
  // Outer loop is the power, inner the damping grid j/n_points.
  CHECK(c.items[0].power == 0);
  CHECK(c.items[0].damping == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(c.items[3].power == 0);
  CHECK(c.items[3].damping == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.items[4].power == 1);
  CHECK(c.items[11].power == 2);
  CHECK_THROWS_AS((void)rgcov::dense_subsystem(0, 1), Error);
  CHECK_THROWS_AS((void)rgcov::dense_subsystem(1, -1), Error);
}

TEST_CASE("apply layout: transform-major blocks, linear block is the input") {
  Matrix u(2, 3);
  u << 1.0, -2.0, 0.5,
       3.0, 0.25, -1.0;
  TransformSpec spec;
  spec.items.push_back(Transform{});  // linear
  Transform sq;
  sq.kind = TransformKind::Square;
  spec.items.push_back(sq);

  auto ts = rgcov::apply(u, spec);
  CHECK(ts.source_dim == 2);
  CHECK(ts.num_transforms == 2);
  REQUIRE(ts.values.rows() == 4);
  REQUIRE(ts.values.cols() == 3);
  // Rows 0..1: linear block equals the input.
  CHECK((ts.values.topRows(2) - u).norm() == 0.0);
  // Rows 2..3: squares, componentwise.
  CHECK(ts.values(2, 1) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(ts.values(3, 0) == doctest::Approx(9.0).epsilon(1e-15));
}

TEST_CASE("apply rejects empty inputs") {
  TransformSpec spec = rgcov::named_battery();
  Matrix empty(0, 5);
  CHECK_THROWS_AS((void)rgcov::apply(empty, spec), Error);
  Matrix u(1, 4);
  u << 1, 2, 3, 4;
  TransformSpec none;
  CHECK_THROWS_AS((void)rgcov::apply(u, none), Error);
}

TEST_CASE("transform spec JSON round-trip") {
  TransformSpec spec = rgcov::named_battery();
  Transform pe;
  pe.kind = TransformKind::PowerExp;
  pe.power = 3;
  pe.damping = 0.25;
  spec.items.push_back(pe);

  std::string text = rgcov::to_json(spec);
  TransformSpec back = rgcov::transform_spec_from_json(text);
  REQUIRE(back.size() == spec.size());
  for (int i = 0; i < spec.size(); ++i) {
    CHECK(back.items[i].name() == spec.items[i].name());
    for (double x : {-2.0, -0.3, 0.0, 0.7, 5.0})
      CHECK(back.items[i](x) == spec.items[i](x));
  }
}

TEST_CASE("transform spec CSV parser") {
  TransformSpec spec =
      rgcov::transform_spec_from_csv("linear,square,powerexp:2:0.5");
  REQUIRE(spec.size() == 3);
  CHECK(spec.items[0].name() == "linear");
  CHECK(spec.items[1].name() == "square");
  CHECK(spec.items[2].kind == TransformKind::PowerExp);
  CHECK(spec.items[2].power == 2);
  CHECK(spec.items[2].damping == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS((void)rgcov::transform_spec_from_csv("nonsense"), Error);
  CHECK_THROWS_AS((void)rgcov::transform_spec_from_csv(""), Error);
}
