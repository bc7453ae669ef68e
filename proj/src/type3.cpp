#include "t3star/type3.hpp"

#include "t3star/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace t3star {

namespace {

Basis basis_or_empty(const Matrix& m, const Tolerance& tol) {
  if (m.cols() == 0) return Basis(m.rows());
  return orthonormal_basis(m, tol);
}

// Rounding can push y'Py for a projector slightly below zero.
double clamp_nonnegative(double ss, double scale) {
  if (ss < 0.0 && ss > -1e-10 * std::max(1.0, scale)) return 0.0;
  return ss;
}

}  // namespace

EffectContext build_context(FramePtr frame, const EffectTuple& j_star, int part) {
  if (!frame) throw InputError("null model frame");
  if (part < 0 || part >= frame->part_count()) throw InputError("part index out of range");
  const ModelFrame& f = *frame;
  const Tolerance& tol = f.tolerance();
  const std::vector<EffectTuple>& effects = f.spec().parts[static_cast<std::size_t>(part)].effects;

  EffectContext ctx;
  ctx.part = part;
  ctx.partition = partition_for_effect(effects, j_star);
  const std::set<EffectTuple> containing(ctx.partition.containing.begin(),
                                         ctx.partition.containing.end());

  ctx.x1 = f.select_columns([&](const ColumnBlock& b) { return b.part == part && b.effect == j_star; });
  ctx.x2 = f.select_columns(
      [&](const ColumnBlock& b) { return b.part == part && containing.count(b.effect) > 0; });
  ctx.x0 = f.select_columns([&](const ColumnBlock& b) {
    return b.part != part || (b.effect != j_star && containing.count(b.effect) == 0);
  });

  ctx.basis_x0 = basis_or_empty(ctx.x0, tol);
  ctx.basis_x01 = orthonormal_basis(hcat(ctx.x0, ctx.x1), tol);
  ctx.rank_x0 = ctx.basis_x0.rank();
  ctx.rank_x01 = ctx.basis_x01.rank();

  const Matrix& u0 = ctx.basis_x0.vectors();
  ctx.x1_adj = ctx.x1 - u0 * (u0.transpose() * ctx.x1);

  ctx.n01 = relative_complement(ctx.basis_x01, f.column_basis(), tol);
  ctx.x2_star = ctx.x2 * (ctx.x2.transpose() * ctx.n01.vectors());
  ctx.x_star = hcat({&ctx.x0, &ctx.x1, &ctx.x2_star}, f.observations());
  ctx.e2 = ctx.partition.containing.empty()
               ? Matrix(f.space().cell_count(), 0)
               : effect_E_concat(ctx.partition.containing, f.space());

  ctx.frame = std::move(frame);
  ctx.p3 = type3_projector(ctx);
  ctx.df3 = integral_trace(ctx.p3);
  return ctx;
}

EffectContext build_context(const Design& design, const ModelSpec& spec,
                            const CovariateTable& covariates, const EffectTuple& j_star, int part) {
  auto frame = std::make_shared<const ModelFrame>(ModelFrame::build(design, spec, covariates));
  return build_context(std::move(frame), j_star, part);
}

Matrix type3_projector(const EffectContext& ctx) {
  // sp(X*) = sp(X), and sp(X0, X2*) is the direct sum of sp(X0) with the
  // part of sp(X2*) orthogonal to it, of rank rank(N01).
  const Matrix& u0 = ctx.basis_x0.vectors();
  const Matrix x2_adj = ctx.x2_star - u0 * (u0.transpose() * ctx.x2_star);
  const Basis extra = leading_basis(x2_adj, ctx.n01.rank());
  return ctx.frame->column_basis().projector() - ctx.basis_x0.projector() - extra.projector();
}

int integral_trace(const Matrix& p) {
  const double t = p.trace();
  const double r = std::round(t);
  if (!(std::abs(t - r) <= 1e-6)) {
    throw NumericalDegeneracyError("projector trace " + std::to_string(t) + " is not integral");
  }
  return static_cast<int>(r);
}

Matrix type2_projector(const EffectContext& ctx) {
  return ctx.basis_x01.projector() - ctx.basis_x0.projector();
}

SumOfSquares type2_ss(const Vector& y, const EffectContext& ctx) {
  if (y.size() != ctx.frame->observations()) throw DimensionError("response has the wrong length");
  const double full = (ctx.basis_x01.vectors().transpose() * y).squaredNorm();
  const double restricted = (ctx.basis_x0.vectors().transpose() * y).squaredNorm();
  return {clamp_nonnegative(full - restricted, y.squaredNorm()),
          static_cast<int>(ctx.rank_x01 - ctx.rank_x0)};
}

SumOfSquares glh_ss(const Vector& y, const Matrix& x, const Matrix& g, const Tolerance& tol) {
  if (g.rows() != x.cols()) throw DimensionError("G must have one row per column of X");
  if (y.size() != x.rows()) throw DimensionError("response has the wrong length");
  require_finite(g, "G");
  if (g.cols() == 0) return {0.0, 0};
  const Basis row_space = orthonormal_basis(x.transpose(), tol);
  const double x_scale = largest_singular_value(x);
  const Index df = numerical_rank(g, tol, x_scale);
  if (df == 0) return {0.0, 0};
  const Matrix& v = row_space.vectors();
  const double gap = (g - v * (v.transpose() * g)).norm();
  if (gap > tol.subspace_abs * std::max(1.0, g.norm())) {
    throw EstimabilityError("G'beta is not estimable: sp(G) is not inside the row space of X");
  }
  const Matrix ag = generalized_inverse(x, tol).transpose() * g;
  const Basis u = leading_basis(ag, df);
  const double ss = (u.vectors().transpose() * y).squaredNorm();
  return {clamp_nonnegative(ss, y.squaredNorm()), static_cast<int>(df)};
}

SumOfSquares rmfm_ss(const Vector& y, const Matrix& x_full, const Matrix& x_restricted,
                     const Tolerance& tol) {
  if (x_full.rows() != x_restricted.rows() || y.size() != x_full.rows()) {
    throw DimensionError("rmfm: row counts differ");
  }
  const Basis full = basis_or_empty(x_full, tol);
  const Basis restricted = basis_or_empty(x_restricted, tol);
  if (containment_gap(restricted, full) >= tol.subspace_abs) {
    throw PreconditionError("restricted model is not nested in the full model");
  }
  const double ss = (full.vectors().transpose() * y).squaredNorm() -
                    (restricted.vectors().transpose() * y).squaredNorm();
  return {clamp_nonnegative(ss, y.squaredNorm()), static_cast<int>(full.rank() - restricted.rank())};
}

Matrix type3_glh_matrix(const EffectContext& ctx) {
  const Index n = ctx.frame->observations();
  Matrix g = Matrix::Zero(ctx.x_star.cols(), n);
  g.middleRows(ctx.x0.cols(), ctx.x1.cols()) = ctx.x1_adj.transpose();
  return g;
}

Basis estimable_functions_basis(const EffectContext& ctx) {
  return leading_basis(ctx.x_star.transpose() * ctx.p3, ctx.df3);
}

Basis adjusted_effect_functions(const EffectContext& ctx) {
  return leading_basis(type3_glh_matrix(ctx), ctx.rank_x01 - ctx.rank_x0);
}

TargetEffect target_effect(const std::vector<EffectTuple>& part_effects,
                           const EffectTuple& j_star, const FactorSpace& space) {
  const EffectPartition p = partition_for_effect(part_effects, j_star);
  const std::vector<EffectTuple> below_star = closure({j_star});
  const std::vector<EffectTuple> below_rest = closure(p.not_containing);
  TargetEffect t;
  t.j_star = j_star;
  for (const EffectTuple& j : below_star) {
    if (std::find(below_rest.begin(), below_rest.end(), j) == below_rest.end()) {
      t.effects.push_back(j);
      t.rank += effect_rank(j, space);
    }
  }
  t.h_star = effect_H_sum(t.effects, space);
  return t;
}

Basis tested_eta_contrasts(const EffectContext& ctx) {
  const ModelFrame& f = *ctx.frame;
  const Matrix ki = f.part_incidence(ctx.part);
  return leading_basis(f.part_effects_projector(ctx.part) * (ki.transpose() * ctx.p3), ctx.df3);
}

EstimableSplit estimable_split(const EffectContext& ctx, const TargetEffect& target,
                               const Basis& tested) {
  const ModelFrame& f = *ctx.frame;
  const Tolerance& tol = f.tolerance();
  EstimableSplit s;
  const Basis h = leading_basis(target.h_star, target.rank);
  s.estimable = subspace_intersect(h, f.estimable_eta_functions(ctx.part), tol);
  s.estimable_df = static_cast<int>(s.estimable.rank());
  s.lagniappe_df = ctx.df3 - s.estimable_df;
  if (tested.rank() == ctx.df3 && ctx.df3 > 0) {
    s.lagniappe = relative_complement(s.estimable, tested, tol);
  } else {
    s.lagniappe = Basis(f.space().cell_count());
  }
  return s;
}

EstimableSplit estimable_split(const EffectContext& ctx, const TargetEffect& target) {
  return estimable_split(ctx, target, tested_eta_contrasts(ctx));
}

ContrastDecomposition contrast_decomposition(const Vector& c, const FactorSpace& space) {
  if (c.size() != space.cell_count()) throw DimensionError("contrast has the wrong length");
  const double norm = c.norm();
  if (!(norm > 0.0)) throw InputError("cannot decompose a zero contrast");
  const Vector u = c / norm;
  ContrastDecomposition out;
  for (const EffectTuple& j : all_effects(space.factor_count())) {
    out.emplace_back(j, u.dot(effect_H(j, space) * u));
  }
  return out;
}

double ncp(const Matrix& p, const Vector& mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw InputError("sigma2 must be positive");
  return quadratic_form(mu, p) / sigma2;
}

Type3Result type3_structure(const EffectContext& ctx) {
  const ModelFrame& f = *ctx.frame;
  Type3Result r;
  r.part = ctx.part;
  r.effect = ctx.effect();
  r.p3 = ctx.p3;
  r.df = ctx.df3;
  r.type2_df = static_cast<int>(ctx.rank_x01 - ctx.rank_x0);
  r.target = target_effect(f.spec().parts[static_cast<std::size_t>(ctx.part)].effects, ctx.effect(),
                           f.space());
  r.contrasts_available = f.parts_direct();
  r.tested = r.contrasts_available ? tested_eta_contrasts(ctx) : Basis(f.space().cell_count());
  EstimableSplit split = estimable_split(ctx, r.target, r.tested);
  r.estimable_df = split.estimable_df;
  r.lagniappe_df = split.lagniappe_df;
  r.estimable = std::move(split.estimable);
  r.lagniappe = std::move(split.lagniappe);
  for (Index k = 0; k < r.tested.rank(); ++k) {
    r.decomposition.push_back(contrast_decomposition(r.tested.vectors().col(k), f.space()));
  }
  return r;
}

Type3Result type3_ss(const Vector& y, const EffectContext& ctx) {
  if (y.size() != ctx.frame->observations()) throw DimensionError("response has the wrong length");
  require_finite(y, "response");
  Type3Result r = type3_structure(ctx);
  // P3 with zero trace is zero up to rounding.
  r.ss = ctx.df3 == 0 ? 0.0 : clamp_nonnegative(quadratic_form(y, ctx.p3), y.squaredNorm());
  return r;
}

}  // namespace t3star
