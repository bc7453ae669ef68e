#include "support.hpp"

#include "t3star/design.hpp"
#include "t3star/errors.hpp"
#include "t3star/model.hpp"

#include <doctest.h>

using namespace t3star;
using t3test::tuples;

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

}  // namespace

TEST_CASE("cell indexing is lexicographic with the first factor slowest") {
  const FactorSpace s({2, 3, 2});
  CHECK(s.cell_count() == 12);
  const std::vector<int> lv{1, 2, 0};
  CHECK(s.cell_index(lv) == 1 * 6 + 2 * 2 + 0);
  CHECK(s.cell_levels(10) == std::vector<int>{1, 2, 0});
  CHECK(s.names() == std::vector<std::string>{"A", "B", "C"});
  CHECK_THROWS_AS(FactorSpace({2, 1}), InputError);
}

TEST_CASE("effect tuples") {
  const EffectTuple a = EffectTuple::parse("10");
  CHECK(a.has(0));
  CHECK_FALSE(a.has(1));
  CHECK(a.bits() == "10");
  CHECK(a.order() == 1);
  CHECK(EffectTuple::parse("11").label(FactorSpace({2, 2})) == "A:B");
  CHECK(EffectTuple::intercept(2).label(FactorSpace({2, 2})) == "(Intercept)");
  CHECK(contains(EffectTuple::parse("11"), a));
  CHECK_FALSE(contains(a, EffectTuple::parse("01")));
  const auto all = all_effects(2);
  CHECK(all == tuples({"00", "10", "01", "11"}));
  CHECK_THROWS_AS(EffectTuple::parse("1x"), InputError);
}

TEST_CASE("closure and partition") {
  CHECK(closure(tuples({"10", "01"})) == tuples({"00", "10", "01"}));
  CHECK(closure(tuples({"11"})) == tuples({"00", "10", "01", "11"}));

  const EffectPartition p = partition_for_effect(tuples({"00", "10", "01", "11"}), EffectTuple::parse("10"));
  CHECK(p.not_containing == tuples({"00", "01"}));
  CHECK(p.designated == EffectTuple::parse("10"));
  CHECK(p.containing == tuples({"11"}));

  const EffectPartition q = partition_for_effect(tuples({"00", "10", "11"}), EffectTuple::parse("11"));
  CHECK(q.not_containing == tuples({"00", "10"}));
  CHECK(q.containing.empty());
}

TEST_CASE("incidence matrix") {
  const Design d = Design::from_counts(FactorSpace({2, 2}), {1, 1, 1, 1});
  CHECK(incidence_matrix(d) == Matrix::Identity(4, 4));

  const Matrix k = incidence_matrix(t3test::table1_design());
  CHECK(k.rows() == 6);
  CHECK(k.cols() == 9);
  for (int l : {0, 4, 8}) CHECK(k.col(l).isZero());
  CHECK(k.colwise().sum().sum() == 6);

  const Design rows(FactorSpace({2, 2}), {3, 0, 3});
  CHECK(rows.cell_counts() == std::vector<int>{1, 0, 0, 2});
  CHECK(rows.nonempty_cells() == 2);
  CHECK_THROWS_AS(Design(FactorSpace({2, 2}), {4}), InputError);
}

TEST_CASE("E and H matrices") {
  const FactorSpace s({2, 2});
  const Matrix e10 = effect_E(EffectTuple::parse("10"), s);
  CHECK(e10 == kron(Matrix::Identity(2, 2), Matrix::Ones(2, 1)));
  CHECK(effect_E(EffectTuple::parse("00"), s) == Matrix::Ones(4, 1));

  // H10 eta = (mean of row i) - (grand mean), entry by entry.
  const FactorSpace s3({3, 2});
  Vector eta(6);
  eta << 1.0, 4.0, -2.0, 7.0, 0.5, 3.0;
  const Vector h = effect_H(EffectTuple::parse("10"), s3) * eta;
  const double grand = eta.mean();
  for (int i = 0; i < 3; ++i) {
    const double row = (eta(2 * i) + eta(2 * i + 1)) / 2.0;
    CHECK(h(2 * i) == doctest::Approx(row - grand));
    CHECK(h(2 * i + 1) == doctest::Approx(row - grand));
  }

  const FactorSpace s4({2, 3, 4});
  CHECK((effect_H_sum(all_effects(3), s4) - Matrix::Identity(24, 24)).norm() < 1e-12);
  CHECK(effect_rank(EffectTuple::parse("101"), s4) == 3);
  CHECK(effect_rank(EffectTuple::parse("011"), s4) == 6);
  CHECK(numerical_rank(effect_H(EffectTuple::parse("011"), s4)) == 6);
}

TEST_CASE("span of E_J is the span of H over the closure") {
  const FactorSpace s({2, 2});
  const Matrix e = effect_E_concat(tuples({"10", "01"}), s);
  const Matrix h = effect_H_sum(closure(tuples({"10", "01"})), s);
  CHECK(subspace_equal(e, h));
}

TEST_CASE("model matrix with an additive covariate part") {
  const FactorSpace s({2, 2});
  const Design d = Design::from_counts(s, {2, 1, 1, 2});
  ModelSpec spec = t3test::saturated2();
  spec.parts.push_back({"x1", tuples({"00", "10", "01"})});
  Vector x(6);
  x << 0.5, -1.0, 2.0, 3.0, 0.0, 0.0;  // zero throughout cell 3
  const Matrix k0 = incidence_matrix(d);
  const Matrix k1 = x.asDiagonal() * k0;
  const Matrix want = t3star::hcat({&k0, &k1}, 6);

  const Matrix xm = model_matrix(d, spec, {{"x1", x}});
  Matrix expect(6, 9 + 5);
  expect << k0 * effect_E_concat(tuples({"00", "10", "01", "11"}), s),
      k1 * effect_E_concat(tuples({"00", "10", "01"}), s);
  CHECK((xm - expect).norm() < 1e-14);

  const ModelFrame f = ModelFrame::build(d, spec, {{"x1", x}});
  CHECK((f.cell_map() - want).norm() < 1e-14);
  CHECK(f.part_incidence(1).col(3).isZero());
  CHECK(f.part_count() == 2);
}

TEST_CASE("model spec validation") {
  const FactorSpace s({2, 2});
  ModelSpec dup = t3test::single_part({"00", "10", "10"});
  CHECK_THROWS_AS(dup.validate(s), InputError);
  ModelSpec bad_width = t3test::single_part({"00", "100"});
  CHECK_THROWS_AS(bad_width.validate(s), InputError);
  ModelSpec cov_first;
  cov_first.parts.push_back({"x", tuples({"00"})});
  CHECK_THROWS_AS(cov_first.validate(s), InputError);
  const Design d = Design::from_counts(s, {1, 1, 1, 1});
  ModelSpec missing = t3test::saturated2();
  missing.parts.push_back({"x1", tuples({"00"})});
  CHECK_THROWS_AS(model_matrix(d, missing, {}), InputError);
}
