#include "t3star/anova.hpp"

#include "t3star/errors.hpp"
#include "t3star/fdist.hpp"

#include <algorithm>

namespace t3star {

namespace {

Basis embed(const Basis& b, int part, int parts, Index cells) {
  Matrix out = Matrix::Zero(cells * parts, b.rank());
  out.middleRows(static_cast<Index>(part) * cells, cells) = b.vectors();
  return Basis::unchecked(std::move(out));
}

// Restricted model for "C' eta_i = 0": beta such that C' E_i beta_i = 0.
SumOfSquares estimable_part_ss(const Vector& y, const EffectContext& ctx, const Basis& estimable) {
  const ModelFrame& f = *ctx.frame;
  if (estimable.rank() == 0) return {0.0, 0};
  const Matrix& x = f.x();
  Matrix constraint = Matrix::Zero(estimable.rank(), x.cols());
  for (const ColumnBlock& b : f.blocks()) {
    if (b.part != ctx.part) continue;
    constraint.middleCols(b.first, b.count) =
        estimable.vectors().transpose() * effect_E(b.effect, f.space());
  }
  const Basis keep = null_space(constraint, f.tolerance());
  return rmfm_ss(y, x, x * keep.vectors(), f.tolerance());
}

bool part0_has_intercept(const ModelFrame& f) {
  const auto& part0 = f.spec().parts.front().effects;
  return std::find(part0.begin(), part0.end(), EffectTuple::intercept(f.space().factor_count())) !=
         part0.end();
}

int effect_space_df(const ModelFrame& f) {
  Index intercept_rank = 0;
  if (part0_has_intercept(f)) {
    const EffectTuple zero = EffectTuple::intercept(f.space().factor_count());
    intercept_rank = numerical_rank(
        f.select_columns([&](const ColumnBlock& b) { return b.part == 0 && b.effect == zero; }),
        f.tolerance());
  }
  return static_cast<int>(f.rank() - intercept_rank);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::type2:
      return "type2";
    case Method::type3star:
      return "type3star";
    case Method::anova_estimable:
      return "anova-estimable";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  if (text == "type2") return Method::type2;
  if (text == "type3star") return Method::type3star;
  if (text == "anova-estimable") return Method::anova_estimable;
  throw InputError("unknown method '" + std::string(text) +
                   "' (expected type2, type3star or anova-estimable)");
}

std::optional<FTest> f_test(double ss, int df, double sse, int df_error) {
  if (df <= 0 || df_error <= 0 || !(sse > 0.0)) return std::nullopt;
  FTest t;
  t.f_stat = (ss / df) / (sse / df_error);
  t.p_value = f_upper_tail(t.f_stat, df, df_error);
  return t;
}

std::vector<std::pair<int, EffectTuple>> reported_effects(const ModelSpec& spec,
                                                          bool include_intercept) {
  std::vector<std::pair<int, EffectTuple>> out;
  for (std::size_t i = 0; i < spec.parts.size(); ++i) {
    for (const EffectTuple& j : spec.parts[i].effects) {
      if (i == 0 && j.is_intercept() && !include_intercept) continue;
      out.emplace_back(static_cast<int>(i), j);
    }
  }
  return out;
}

AnovaTable build_table(const Vector& y, const FramePtr& frame, Method method,
                       const TableOptions& options) {
  const ModelFrame& f = *frame;
  if (y.size() != f.observations()) throw DimensionError("response has the wrong length");
  require_finite(y, "response");

  AnovaTable t;
  t.method = method;
  t.observations = static_cast<int>(f.observations());
  t.model_rank = static_cast<int>(f.rank());
  t.df_error = t.observations - t.model_rank;
  const Matrix& u = f.column_basis().vectors();
  t.sse = (y - u * (u.transpose() * y)).squaredNorm();
  // A saturated fit leaves only rounding in the residual.
  if (t.df_error == 0) t.sse = 0.0;
  if (t.df_error > 0) {
    t.sigma2_hat = t.sse / t.df_error;
  } else {
    t.warnings.push_back("no error degrees of freedom; F statistics and p-values omitted");
  }

  const bool track_spans = method == Method::type3star && f.parts_direct();
  Basis spanned(f.space().cell_count() * f.part_count());
  for (const auto& [part, effect] : reported_effects(f.spec(), options.include_intercept)) {
    const EffectContext ctx = build_context(frame, effect, part);
    const Type3Result s = type3_structure(ctx);
    AnovaRow row;
    row.effect_label = f.effect_label(part, effect);
    row.part = part;
    row.effect = effect;
    row.method = method;
    switch (method) {
      case Method::type3star: {
        row.ss = std::max(0.0, quadratic_form(y, ctx.p3));
        row.df = s.df;
        row.estimable_df = s.estimable_df;
        row.lagniappe_df = s.lagniappe_df;
        if (track_spans) {
          spanned = subspace_sum(spanned, embed(s.tested, part, f.part_count(), f.space().cell_count()),
                                 f.tolerance());
        }
        break;
      }
      case Method::type2: {
        const SumOfSquares ss = type2_ss(y, ctx);
        row.ss = ss.ss;
        row.df = ss.df;
        row.estimable_df = s.estimable_df;
        row.lagniappe_df = ss.df - s.estimable_df;
        break;
      }
      case Method::anova_estimable: {
        const SumOfSquares ss = estimable_part_ss(y, ctx, s.estimable);
        row.ss = ss.ss;
        row.df = ss.df;
        row.estimable_df = ss.df;
        row.lagniappe_df = 0;
        break;
      }
    }
    if (auto ft = f_test(row.ss, row.df, t.sse, t.df_error)) {
      row.f_stat = ft->f_stat;
      row.p_value = ft->p_value;
    }
    t.rows.push_back(std::move(row));
  }
  if (track_spans) {
    const int rest = effect_space_df(f) - static_cast<int>(spanned.rank());
    if (rest > 0) t.unaccounted_df = rest;
  }
  return t;
}

AnovaTable build_table(const Vector& y, const Design& design, const ModelSpec& spec,
                       const CovariateTable& covariates, Method method,
                       const TableOptions& options) {
  auto frame = std::make_shared<const ModelFrame>(ModelFrame::build(design, spec, covariates));
  return build_table(y, frame, method, options);
}

std::vector<EffectContrasts> effect_contrasts(const FramePtr& frame, Method method,
                                              bool include_intercept) {
  const ModelFrame& f = *frame;
  std::vector<EffectContrasts> out;
  for (const auto& [part, effect] : reported_effects(f.spec(), include_intercept)) {
    const EffectContext ctx = build_context(frame, effect, part);
    const Type3Result s = type3_structure(ctx);
    EffectContrasts e;
    e.label = f.effect_label(part, effect);
    e.part = part;
    e.effect = effect;
    e.method = method;
    e.contrasts = Basis(f.space().cell_count());
    switch (method) {
      case Method::type3star:
        e.df = s.df;
        e.estimable_df = s.estimable_df;
        e.lagniappe_df = s.lagniappe_df;
        if (s.contrasts_available) e.contrasts = s.tested;
        break;
      case Method::type2:
        e.df = s.type2_df;
        e.estimable_df = s.estimable_df;
        e.lagniappe_df = s.type2_df - s.estimable_df;
        if (s.contrasts_available) {
          e.contrasts = leading_basis(
              f.part_effects_projector(part) * (f.part_incidence(part).transpose() * type2_projector(ctx)),
              s.type2_df);
        }
        break;
      case Method::anova_estimable:
        e.df = s.estimable_df;
        e.estimable_df = s.estimable_df;
        e.lagniappe_df = 0;
        if (s.contrasts_available) e.contrasts = s.estimable;
        break;
    }
    for (Index k = 0; k < e.contrasts.rank(); ++k) {
      e.decomposition.push_back(contrast_decomposition(e.contrasts.vectors().col(k), f.space()));
    }
    out.push_back(std::move(e));
  }
  return out;
}

EstimabilityReport estimability_report(const FramePtr& frame) {
  const ModelFrame& f = *frame;
  const Tolerance& tol = f.tolerance();
  const Index cells = f.space().cell_count();
  const int parts = f.part_count();

  EstimabilityReport rep;
  rep.contrasts_available = f.parts_direct();

  const bool has_intercept = part0_has_intercept(f);
  rep.effect_space_df = effect_space_df(f);

  std::vector<Basis> spans;
  for (const auto& [part, effect] : reported_effects(f.spec())) {
    const EffectContext ctx = build_context(frame, effect, part);
    const Type3Result s = type3_structure(ctx);
    EffectEstimability e;
    e.label = f.effect_label(part, effect);
    e.part = part;
    e.effect = effect;
    e.target_effects = s.target.effects;
    e.target_df = s.target.rank;
    e.df = s.df;
    e.estimable_df = s.estimable_df;
    e.lagniappe_df = s.lagniappe_df;
    if (rep.contrasts_available && s.df > 0) {
      const Matrix pt = s.tested.projector();
      for (const EffectTuple& j : all_effects(f.space().factor_count())) {
        e.span_proportions.emplace_back(j, (pt * effect_H(j, f.space())).trace() / s.df);
      }
    }
    if (rep.contrasts_available) spans.push_back(embed(s.tested, part, parts, cells));
    rep.effects.push_back(std::move(e));
  }

  if (!rep.contrasts_available) return rep;

  for (std::size_t a = 0; a < spans.size(); ++a) {
    for (std::size_t b = a + 1; b < spans.size(); ++b) {
      rep.overlaps.push_back({rep.effects[a].label, rep.effects[b].label,
                              subspace_intersect(spans[a], spans[b], tol).rank()});
    }
  }

  Basis total(cells * parts);
  for (const Basis& s : spans) total = subspace_sum(total, s, tol);
  rep.accounted_df = static_cast<int>(total.rank());
  rep.unaccounted_df = rep.effect_space_df - *rep.accounted_df;

  if (parts == 1 && has_intercept) {
    const Basis& est = f.estimable_eta_functions(0);
    const Matrix w = est.vectors().transpose() * Vector::Ones(cells);
    Basis outer = est;
    if (w.norm() > tol.subspace_abs) {
      const Basis keep = null_space(w.transpose(), tol);
      outer = Basis::unchecked(est.vectors() * keep.vectors());
    }
    try {
      rep.unaccounted = relative_complement(total, outer, tol);
    } catch (const PreconditionError&) {
      rep.unaccounted.reset();
    }
  }
  return rep;
}

EstimabilityReport estimability_report(const Design& design, const ModelSpec& spec,
                                       const CovariateTable& covariates) {
  return estimability_report(
      std::make_shared<const ModelFrame>(ModelFrame::build(design, spec, covariates)));
}

}  // namespace t3star
