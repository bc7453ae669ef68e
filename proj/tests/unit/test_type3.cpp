#include "support.hpp"

#include "t3star/design.hpp"
#include "t3star/errors.hpp"
#include "t3star/model.hpp"
#include "t3star/type3.hpp"

#include <doctest.h>

#include <cmath>

using namespace t3star;
using t3test::frame;
using t3test::random_vector;
using t3test::saturated2;
using t3test::tuples;

namespace {

const EffectTuple k10 = EffectTuple::parse("10");
const EffectTuple k01 = EffectTuple::parse("01");
const EffectTuple k11 = EffectTuple::parse("11");

// Classical balanced SS for effect j: y' K H_j K' y / n.
double classical_ss(const Design& d, const EffectTuple& j, const Vector& y) {
  const Matrix k = incidence_matrix(d);
  const Vector totals = k.transpose() * y;
  return totals.dot(effect_H(j, d.space()) * totals) / d.cell_counts().front();
}

}  // namespace

TEST_CASE("context blocks for the saturated two-factor model") {
  const Design d = Design::from_counts(FactorSpace({2, 2}), {2, 1, 1, 3});
  const EffectContext ctx = build_context(frame(d, saturated2()), k10);
  const Matrix k = incidence_matrix(d);
  CHECK((ctx.x2 - k * effect_E(k11, d.space())).norm() < 1e-14);
  CHECK((ctx.x1 - k * effect_E(k10, d.space())).norm() < 1e-14);
  CHECK(ctx.x0.cols() == 3);
  CHECK(subspace_equal(ctx.x_star, ctx.frame->x()));
  CHECK(ctx.df3 == 1);
}

TEST_CASE("balanced projector is the classical Kronecker projector") {
  for (int n : {1, 2}) {
    const Design d = Design::from_counts(FactorSpace({2, 2}), {n, n, n, n});
    const EffectContext ctx = build_context(frame(d, saturated2()), k10);
    const Matrix k = incidence_matrix(d);
    CHECK((ctx.p3 - k * effect_H(k10, d.space()) * k.transpose() / n).norm() < 1e-12);
  }
}

TEST_CASE("hand values for the balanced 2x2 with y = (1, 2, 3, 5)") {
  const Design d = Design::from_counts(FactorSpace({2, 2}), {1, 1, 1, 1});
  const auto f = frame(d, saturated2());
  Vector y(4);
  y << 1, 2, 3, 5;
  CHECK(std::abs(*type3_ss(y, build_context(f, k10)).ss - 6.25) < 1e-12);
  CHECK(std::abs(*type3_ss(y, build_context(f, k01)).ss - 2.25) < 1e-12);
  CHECK(std::abs(*type3_ss(y, build_context(f, k11)).ss - 0.25) < 1e-12);
}

TEST_CASE("balanced three-factor design matches the classical formulas") {
  const FactorSpace s({2, 3, 2});
  const Design d = Design::from_counts(s, std::vector<int>(12, 2));
  const auto f = frame(d, t3test::single_part({"000", "100", "010", "001", "110", "101", "011", "111"}));
  std::mt19937_64 rng(41);
  const Vector y = random_vector(rng, d.observations());
  for (const EffectTuple& j : all_effects(3)) {
    if (j.is_intercept()) continue;
    const EffectContext ctx = build_context(f, j);
    const double want = classical_ss(d, j, y);
    CHECK(*type3_ss(y, ctx).ss == doctest::Approx(want).epsilon(1e-10));
    CHECK(type2_ss(y, ctx).ss == doctest::Approx(want).epsilon(1e-10));
    CHECK(ctx.df3 == effect_rank(j, s));
  }
}

TEST_CASE("Table 1 design: df and estimable split") {
  const auto f = frame(t3test::table1_design(), saturated2());
  const EffectContext a = build_context(f, k10);
  CHECK(a.df3 == 2);
  CHECK(integral_trace(a.p3) == 2);
  const Type3Result ra = type3_structure(a);
  CHECK(ra.estimable_df == 0);
  CHECK(ra.lagniappe_df == 2);
  const Type3Result rab = type3_structure(build_context(f, k11));
  CHECK(rab.df == 1);
  CHECK(rab.estimable_df == 1);
  CHECK(rab.lagniappe_df == 0);
}

TEST_CASE("Table 1 tested spans equal the coefficient grids") {
  const auto f = frame(t3test::table1_design(), saturated2());
  CHECK(subspace_distance(tested_eta_contrasts(build_context(f, k10)),
                          orthonormal_basis(t3test::table1_a_star())) < 1e-8);
  CHECK(subspace_distance(tested_eta_contrasts(build_context(f, k01)),
                          orthonormal_basis(t3test::table1_b_star())) < 1e-8);
  CHECK(subspace_distance(tested_eta_contrasts(build_context(f, k11)),
                          orthonormal_basis(t3test::table1_ab())) < 1e-8);
}

TEST_CASE("Table 1 contrasts split half and half") {
  const auto f = frame(t3test::table1_design(), saturated2());
  const Basis a = tested_eta_contrasts(build_context(f, k10));
  for (Index c = 0; c < a.rank(); ++c) {
    for (const auto& [j, share] : contrast_decomposition(a.vectors().col(c), f->space())) {
      const double want = (j == k10 || j == k11) ? 0.5 : 0.0;
      CHECK(std::abs(share - want) < 1e-9);
    }
    CHECK(std::abs(a.vectors().col(c).sum()) < 1e-12);
  }
}

TEST_CASE("lagniappe direction has positive non-centrality") {
  // eta with H10 eta = 0 but a non-zero A* contrast.
  const Design d = t3test::table1_design();
  const auto f = frame(d, saturated2());
  const EffectContext ctx = build_context(f, k10);
  const Vector c = tested_eta_contrasts(ctx).vectors().col(0);
  const Vector eta = c - effect_H(k10, d.space()) * c;
  CHECK((effect_H(k10, d.space()) * eta).norm() < 1e-12);
  CHECK(ncp(ctx.p3, incidence_matrix(d) * eta, 1.0) > 1e-3);
}

TEST_CASE("all cells filled: tested span is the target effect") {
  const Design d = Design::from_counts(FactorSpace({2, 3}), {1, 3, 2, 2, 1, 3});
  const auto f = frame(d, saturated2());
  for (const EffectTuple& j : {k10, k01, k11}) {
    const Type3Result r = type3_structure(build_context(f, j));
    CHECK(r.lagniappe_df == 0);
    CHECK(subspace_distance(r.tested, orthonormal_basis(effect_H(j, d.space()))) < 1e-9);
  }
}

TEST_CASE("target effects") {
  const FactorSpace s({3, 2});
  const TargetEffect t = target_effect(tuples({"00", "10", "01", "11"}), k10, s);
  CHECK(t.effects == tuples({"10"}));
  CHECK((t.h_star - effect_H(k10, s)).norm() < 1e-14);

  const TargetEffect u = target_effect(tuples({"00", "10", "11"}), k11, s);
  CHECK(u.effects == tuples({"01", "11"}));
  Matrix want = Matrix::Zero(6, 6);
  const Matrix sb = Matrix::Identity(2, 2) - Matrix::Constant(2, 2, 0.5);
  for (int i = 0; i < 3; ++i) want.block(2 * i, 2 * i, 2, 2) = sb;
  CHECK((u.h_star - want).norm() < 1e-14);
  CHECK(u.rank == 3);
}

TEST_CASE("GLH form with G3 equals the Type III* SS") {
  std::mt19937_64 rng(43);
  const Design d = Design::from_counts(FactorSpace({3, 3}), {2, 0, 1, 1, 3, 0, 0, 1, 2});
  const auto f = frame(d, saturated2());
  for (int rep = 0; rep < 5; ++rep) {
    const Vector y = random_vector(rng, d.observations());
    for (const EffectTuple& j : {k10, k01, k11}) {
      const EffectContext ctx = build_context(f, j);
      const SumOfSquares g = glh_ss(y, ctx.x_star, type3_glh_matrix(ctx));
      const double s3 = *type3_ss(y, ctx).ss;
      CHECK(g.df == ctx.df3);
      CHECK(std::abs(g.ss - s3) <= 1e-8 * std::abs(s3));
    }
  }
}

TEST_CASE("GLH for one estimable contrast matches the scalar formula") {
  // One factor at 3 levels, n = 2, c = (1, -1, 0).
  const Design d = Design::from_counts(FactorSpace({3}), {2, 2, 2});
  const ModelSpec spec = t3test::single_part({"0", "1"});
  const Matrix x = model_matrix(d, spec);
  Vector c(3);
  c << 1, -1, 0;
  const Matrix e = effect_E_concat(tuples({"0", "1"}), d.space());
  const Matrix g = e.transpose() * c;
  Vector y(6);
  y << 1.0, 1.4, 2.2, 2.9, 0.3, -0.1;
  const double diff = (1.0 + 1.4) / 2 - (2.2 + 2.9) / 2;
  const double want = diff * diff / (c.squaredNorm() / 2.0);
  const SumOfSquares r = glh_ss(y, x, g);
  CHECK(r.df == 1);
  CHECK(r.ss == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("GLH rejects a non-estimable G") {
  const Design d = t3test::table1_design();
  const Matrix x = model_matrix(d, t3test::single_part({"00", "10"}));
  Matrix g = Matrix::Zero(x.cols(), 1);
  g(1, 0) = 1.0;  // a single level coefficient alongside the intercept
  CHECK_THROWS_AS(glh_ss(Vector::Ones(d.observations()), x, g), EstimabilityError);
}

TEST_CASE("RMFM SS is the difference of residual sums of squares") {
  std::mt19937_64 rng(47);
  const Matrix full = t3test::random_matrix(rng, 10, 4);
  const Matrix restricted = full.leftCols(2);
  const Vector y = random_vector(rng, 10);
  auto sse = [&](const Matrix& x) { return (y - projector(x) * y).squaredNorm(); };
  const SumOfSquares r = rmfm_ss(y, full, restricted);
  CHECK(r.df == 2);
  CHECK(r.ss == doctest::Approx(sse(restricted) - sse(full)).epsilon(1e-10));
  CHECK_THROWS_AS(rmfm_ss(y, restricted, full.rightCols(2)), PreconditionError);
}

TEST_CASE("Type II and Type III* df agree on unbalanced designs") {
  const Design d = Design::from_counts(FactorSpace({3, 2, 2}),
                                       {1, 0, 2, 1, 0, 3, 1, 1, 2, 0, 1, 1});
  const auto f = frame(d, t3test::single_part({"000", "100", "010", "001", "110", "011"}));
  for (const EffectTuple& j : f->spec().parts[0].effects) {
    const EffectContext ctx = build_context(f, j);
    CHECK(ctx.df3 == ctx.rank_x01 - ctx.rank_x0);
    CHECK(numerical_rank(ctx.x_star) - numerical_rank(t3star::hcat(ctx.x0, ctx.x2_star)) == ctx.df3);
  }
}

TEST_CASE("Type II equals Type III* for main effects when balanced") {
  const Design d = Design::from_counts(FactorSpace({3, 2}), std::vector<int>(6, 2));
  const auto f = frame(d, saturated2());
  std::mt19937_64 rng(53);
  const Vector y = random_vector(rng, d.observations());
  for (const EffectTuple& j : {k10, k01}) {
    const EffectContext ctx = build_context(f, j);
    CHECK(type2_ss(y, ctx).ss == doctest::Approx(*type3_ss(y, ctx).ss).epsilon(1e-12));
  }
}

TEST_CASE("Type III* estimable functions span G3") {
  const auto f = frame(Design::from_counts(FactorSpace({3, 3}), {2, 0, 1, 1, 3, 0, 0, 1, 2}), saturated2());
  for (const EffectTuple& j : {k10, k01, k11}) {
    const EffectContext ctx = build_context(f, j);
    CHECK(subspace_distance(estimable_functions_basis(ctx), adjusted_effect_functions(ctx)) < 1e-8);
  }
}

TEST_CASE("estimable mean shift gives positive non-centrality") {
  const Design d = Design::from_counts(FactorSpace({3, 3}), {2, 0, 1, 1, 3, 0, 0, 1, 2});
  const auto f = frame(d, saturated2());
  const EffectContext ctx = build_context(f, k11);
  const Type3Result r = type3_structure(ctx);
  REQUIRE(r.estimable_df > 0);
  const Vector eta = r.estimable.vectors().col(0);
  CHECK(ncp(ctx.p3, incidence_matrix(d) * eta, 1.0) > 1e-6);
  CHECK_THROWS_AS(ncp(ctx.p3, incidence_matrix(d) * eta, 0.0), InputError);
}

TEST_CASE("errors") {
  const auto f = frame(t3test::table1_design(), t3test::single_part({"00", "10"}));
  CHECK_THROWS_AS(build_context(f, k11), InputError);
  CHECK_THROWS_AS(build_context(f, k10, 3), InputError);
  CHECK_THROWS_AS(type3_ss(Vector::Ones(2), build_context(f, k10)), DimensionError);
  Matrix bad = Matrix::Identity(2, 2) * 0.5;
  CHECK_THROWS_AS(integral_trace(bad.topLeftCorner(1, 1)), NumericalDegeneracyError);
}
