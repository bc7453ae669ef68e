#include "t3star/verify.hpp"

#include "t3star/errors.hpp"
#include "t3star/type3.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace t3star {

void SamplerConfig::validate() const {
  if (min_factors < 1 || max_factors < min_factors || max_factors > 16) {
    throw InputError("sampler factor range is invalid");
  }
  if (min_levels < 2 || max_levels < min_levels) throw InputError("sampler level range is invalid");
  if (!(max_empty_prob >= 0.0 && max_empty_prob < 1.0)) {
    throw InputError("empty-cell probability must lie in [0, 1)");
  }
  if (min_replicates < 1 || max_replicates < min_replicates) {
    throw InputError("sampler replicate range is invalid");
  }
  if (max_covariates < 0) throw InputError("covariate count must be non-negative");
  int smallest = 1;
  for (int k = 0; k < min_factors; ++k) smallest *= min_levels;
  if (max_cells < smallest) throw InputError("max_cells excludes every design");
}

namespace {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

Vector normal_vector(Rng& rng, Index n) {
  std::normal_distribution<double> z(0.0, 1.0);
  Vector v(n);
  for (Index k = 0; k < n; ++k) v(k) = z(rng);
  return v;
}

// Random subset of the non-intercept tuples, optionally closed downward.
std::vector<EffectTuple> random_effects(Rng& rng, int f, double p, bool closed) {
  std::vector<EffectTuple> pool;
  for (const EffectTuple& j : all_effects(f)) {
    if (!j.is_intercept()) pool.push_back(j);
  }
  std::vector<EffectTuple> pick;
  for (const EffectTuple& j : pool) {
    if (coin(rng, p)) pick.push_back(j);
  }
  if (pick.empty()) pick.push_back(pool[static_cast<std::size_t>(uniform_int(rng, 0, int(pool.size()) - 1))]);
  pick.push_back(EffectTuple::intercept(f));
  if (closed) pick = closure(pick);
  std::sort(pick.begin(), pick.end());
  pick.erase(std::unique(pick.begin(), pick.end()), pick.end());
  return pick;
}

bool every_level_seen(const FactorSpace& space, const std::vector<int>& counts) {
  for (int k = 0; k < space.factor_count(); ++k) {
    std::vector<bool> seen(static_cast<std::size_t>(space.levels(k)), false);
    for (int l = 0; l < space.cell_count(); ++l) {
      if (counts[static_cast<std::size_t>(l)] > 0) {
        seen[static_cast<std::size_t>(space.cell_levels(l)[static_cast<std::size_t>(k)])] = true;
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) return false;
  }
  return true;
}

std::string effect_list(const std::vector<EffectTuple>& effects) {
  std::string s;
  for (const EffectTuple& j : effects) {
    if (!s.empty()) s += ',';
    s += j.bits();
  }
  return s;
}

double x_scale(const ModelFrame& f) {
  return largest_singular_value(f.x());
}

Basis span_of(const Matrix& m, const Tolerance& tol, double scale) {
  if (m.cols() == 0) return Basis(m.rows());
  return orthonormal_basis(m, tol, scale);
}

Index rank_of(const Matrix& m, const Tolerance& tol, double scale) {
  if (m.cols() == 0 || m.rows() == 0) return 0;
  return numerical_rank(m, tol, scale);
}

struct EffectRef {
  int part;
  EffectTuple effect;
};

std::vector<EffectRef> model_effects(const ModelSpec& spec) {
  std::vector<EffectRef> out;
  for (std::size_t i = 0; i < spec.parts.size(); ++i) {
    for (const EffectTuple& j : spec.parts[i].effects) out.push_back({static_cast<int>(i), j});
  }
  return out;
}

std::string effect_name(const ModelFrame& f, const EffectRef& e) {
  return f.effect_label(e.part, e.effect) + " (" + e.effect.bits() + ")";
}

// Case bookkeeping shared by every check.
class CaseLog {
 public:
  CaseLog(CheckReport& report, const SampledCase& c) : report_(report), case_(c) {}

  void fail(const std::string& detail, double discrepancy) {
    report_.failures.push_back({case_.seed, case_.summary(), detail, discrepancy});
  }
  // Records the discrepancy and fails when it exceeds the bound.
  void expect_below(double discrepancy, double bound, const std::string& detail) {
    if (std::isnan(discrepancy)) {
      fail(detail + ": NaN", discrepancy);
      return;
    }
    report_.max_discrepancy = std::max(report_.max_discrepancy, discrepancy);
    if (discrepancy >= bound) fail(detail, discrepancy);
  }
  void effect() { ++report_.effects_checked; }
  void substantive() { substantive_ = true; }
  bool was_substantive() const { return substantive_; }

 private:
  CheckReport& report_;
  const SampledCase& case_;
  bool substantive_ = false;
};

// nu2 = nu3: nu3 ranked from scratch on X* and (X0, X2*), nu2 from the
// context's own ranks, both against trace(P3).
void check_nu(const EffectContext& ctx, double scale, const std::string& name, CaseLog& log) {
  const Tolerance& tol = ctx.frame->tolerance();
  const Index nu3 = rank_of(ctx.x_star, tol, scale) - rank_of(hcat(ctx.x0, ctx.x2_star), tol, scale);
  const Index nu2 = ctx.rank_x01 - ctx.rank_x0;
  if (nu2 != nu3 || nu3 != ctx.df3) {
    log.fail("nu2 = nu3 violated for " + name + ": nu2 " + std::to_string(nu2) + ", nu3 " +
                 std::to_string(nu3) + ", trace(P3) " + std::to_string(ctx.df3),
             std::abs(double(nu2 - nu3)));
  }
}

using CaseBody = std::function<void(const SampledCase&, CaseLog&)>;

CheckReport run_cases(const std::string& name, std::uint64_t salt, CaseKind kind,
                      const DesignSampler& sampler, int cases, const CaseBody& body) {
  if (cases < 0) throw InputError("case count must be non-negative");
  const auto start = std::chrono::steady_clock::now();
  CheckReport report;
  report.check_name = name;
  for (int k = 0; k < cases; ++k) {
    const SampledCase c = sampler.draw(sampler.case_seed(salt, k), kind);
    CaseLog log(report, c);
    try {
      body(c, log);
    } catch (const std::exception& e) {
      log.fail(std::string("exception: ") + e.what(), std::numeric_limits<double>::infinity());
      log.substantive();
    }
    ++report.cases_run;
    if (!log.was_substantive()) ++report.vacuous;
  }
  std::sort(report.failures.begin(), report.failures.end(),
            [](const CheckFailure& a, const CheckFailure& b) { return a.seed < b.seed; });
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

FramePtr frame_of(const SampledCase& c) {
  return std::make_shared<const ModelFrame>(ModelFrame::build(c.design, c.spec, c.covariates));
}

// One row per nonempty cell: the design as if every positive n were 1.
Matrix collapsed_incidence(const Design& d) {
  const std::vector<int>& counts = d.cell_counts();
  Matrix k0 = Matrix::Zero(d.nonempty_cells(), d.space().cell_count());
  Index row = 0;
  for (int l = 0; l < d.space().cell_count(); ++l) {
    if (counts[static_cast<std::size_t>(l)] > 0) k0(row++, l) = 1.0;
  }
  return k0;
}

// sp(blockdiag(P_{E_i}) A' P3): every tested cell-coefficient contrast,
// all parts stacked.
Basis stacked_tested(const EffectContext& ctx) {
  const ModelFrame& f = *ctx.frame;
  const Index a = f.space().cell_count();
  Matrix m = f.cell_map().transpose() * ctx.p3;
  for (int i = 0; i < f.part_count(); ++i) {
    m.middleRows(Index(i) * a, a) = f.part_effects_projector(i) * m.middleRows(Index(i) * a, a);
  }
  return leading_basis(m, ctx.df3);
}

constexpr std::uint64_t kSaltProp1 = 1;
constexpr std::uint64_t kSaltProp2 = 2;
constexpr std::uint64_t kSaltProp3 = 3;
constexpr std::uint64_t kSaltProp4 = 4;
constexpr std::uint64_t kSaltProp5 = 5;
constexpr std::uint64_t kSaltBalanced = 6;

}  // namespace

std::string SampledCase::summary() const {
  std::ostringstream s;
  s << "seed " << seed << " levels ";
  const auto& lv = design.space().levels();
  for (std::size_t k = 0; k < lv.size(); ++k) s << (k ? "x" : "") << lv[k];
  s << " n=" << design.observations()
    << " empty=" << design.space().cell_count() - design.nonempty_cells() << " counts=";
  for (std::size_t l = 0; l < design.cell_counts().size(); ++l) {
    s << (l ? "," : "") << design.cell_counts()[l];
  }
  s << " [";
  for (std::size_t i = 0; i < spec.parts.size(); ++i) {
    if (i) s << " | " << *spec.parts[i].covariate << ": ";
    s << effect_list(spec.parts[i].effects);
  }
  s << "]";
  return s.str();
}

DesignSampler::DesignSampler(std::uint64_t seed, SamplerConfig config)
    : seed_(seed), config_(config) {
  config_.validate();
}

std::uint64_t DesignSampler::case_seed(std::uint64_t salt, int index) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

SampledCase DesignSampler::draw(std::uint64_t case_seed, CaseKind kind) const {
  const SamplerConfig& cfg = config_;
  Rng rng(case_seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const int f = uniform_int(rng, cfg.min_factors, cfg.max_factors);
    std::vector<int> levels(static_cast<std::size_t>(f));
    long cells = 1;
    for (int& l : levels) {
      l = uniform_int(rng, cfg.min_levels, cfg.max_levels);
      cells *= l;
    }
    if (cells > cfg.max_cells) continue;
    FactorSpace space(levels);

    // Single-covariate cases need within-cell variation, or the covariate
    // columns fall inside the factor part and the case says nothing.
    const int lo = kind == CaseKind::one_covariate ? std::max(2, cfg.min_replicates) : cfg.min_replicates;
    const int hi = std::max(lo, cfg.max_replicates);
    std::vector<int> counts(static_cast<std::size_t>(cells), 0);
    if (kind == CaseKind::balanced) {
      std::fill(counts.begin(), counts.end(), uniform_int(rng, lo, hi));
    } else {
      const double p_empty = uniform_real(rng, 0.0, cfg.max_empty_prob);
      for (int& n : counts) {
        n = coin(rng, p_empty) ? 0 : uniform_int(rng, lo, hi);
      }
      if (!every_level_seen(space, counts)) continue;
    }

    SampledCase c;
    c.seed = case_seed;
    c.design = Design::from_counts(space, counts);
    const bool closed = kind == CaseKind::balanced || coin(rng, 0.75);
    c.spec.parts.push_back({std::nullopt, random_effects(rng, f, 0.6, closed)});

    int covariates = 0;
    if (kind == CaseKind::general) covariates = uniform_int(rng, 0, cfg.max_covariates);
    if (kind == CaseKind::one_covariate) covariates = 1;
    for (int i = 0; i < covariates; ++i) {
      const std::string name = "x" + std::to_string(i + 1);
      c.spec.parts.push_back({name, random_effects(rng, f, 0.4, true)});
      Vector x = normal_vector(rng, c.design.observations());
      // Occasionally a covariate is zero throughout a cell.
      for (int l = 0; l < space.cell_count(); ++l) {
        if (!coin(rng, 0.1)) continue;
        for (int r = 0; r < c.design.observations(); ++r) {
          if (c.design.row_cells()[static_cast<std::size_t>(r)] == l) x(r) = 0.0;
        }
      }
      c.covariates[name] = x;
    }
    c.spec.validate(space);
    return c;
  }
  throw NumericalDegeneracyError("design sampler rejected 10000 draws in a row");
}

bool CheckReport::passed() const {
  return failures.empty() && cases_run > 0 && non_vacuous_rate() >= kRequiredNonVacuousRate;
}

std::vector<std::string> check_names() {
  return {"prop1", "prop2_ncp", "prop3", "prop4_cellsize", "prop5_covariate", "balanced_equivalence"};
}

CheckReport check_prop1(const DesignSampler& sampler, int cases, const CheckTolerances& t) {
  return run_cases("prop1", kSaltProp1, CaseKind::general, sampler, cases,
                   [&](const SampledCase& c, CaseLog& log) {
    const FramePtr frame = frame_of(c);
    const double scale = x_scale(*frame);
    const Tolerance& tol = frame->tolerance();
    for (const EffectRef& e : model_effects(c.spec)) {
      const EffectContext ctx = build_context(frame, e.effect, e.part);
      const std::string name = effect_name(*frame, e);
      log.effect();
      check_nu(ctx, scale, name, log);
      const Basis lhs = span_of(ctx.x_star.transpose() * ctx.p3, tol, scale);
      const Basis rhs = span_of(type3_glh_matrix(ctx), tol, scale);
      if (lhs.rank() != rhs.rank()) {
        log.fail("rank of sp(X*'P3) " + std::to_string(lhs.rank()) + " vs sp(G3) " +
                     std::to_string(rhs.rank()) + " for " + name,
                 std::abs(double(lhs.rank() - rhs.rank())));
        continue;
      }
      if (lhs.rank() == 0) continue;
      log.substantive();
      log.expect_below(subspace_distance(lhs, rhs), t.subspace, "sp(X*'P3) != sp(G3) for " + name);
    }
  });
}

CheckReport check_prop2_ncp(const DesignSampler& sampler, int cases, const CheckTolerances& t) {
  return run_cases("prop2_ncp", kSaltProp2, CaseKind::general, sampler, cases,
                   [&](const SampledCase& c, CaseLog& log) {
    Rng rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
    const FramePtr frame = frame_of(c);
    const double scale = x_scale(*frame);
    const Tolerance& tol = frame->tolerance();
    const FactorSpace& space = frame->space();
    for (const EffectRef& e : model_effects(c.spec)) {
      const EffectContext ctx = build_context(frame, e.effect, e.part);
      const std::string name = effect_name(*frame, e);
      log.effect();
      check_nu(ctx, scale, name, log);

      const Matrix e1 = effect_E(e.effect, space);
      const Matrix e0 = ctx.partition.not_containing.empty()
                            ? Matrix(space.cell_count(), 0)
                            : effect_E_concat(ctx.partition.not_containing, space);
      const Basis b0 = span_of(e0, tol, 0.0);
      const Matrix e10 = e1 - b0.vectors() * (b0.vectors().transpose() * e1);

      auto mean_with = [&](const Vector& beta1) {
        Vector mu = ctx.x1 * beta1;
        if (ctx.x0.cols()) mu += ctx.x0 * normal_vector(rng, ctx.x0.cols());
        if (ctx.x2_star.cols()) mu += ctx.x2_star * normal_vector(rng, ctx.x2_star.cols());
        return mu;
      };

      // E_{1|0} beta1 = 0 forces a zero ncp.
      const Basis z = null_space(e10, tol);
      if (z.rank() > 0) {
        const Vector mu = mean_with(z.vectors() * normal_vector(rng, z.rank()));
        const double rel = ncp(ctx.p3, mu, 1.0) / std::max(1.0, mu.squaredNorm());
        log.expect_below(std::abs(rel), t.ncp_zero, "ncp not zero with E_{1|0} beta1 = 0 for " + name);
      }

      if (ctx.df3 == 0) continue;
      log.substantive();

      // A beta1 whose estimable part is non-zero: the estimable functions of
      // beta1 in this form are sp(X_{1|0}').
      const Basis w = span_of(ctx.x1_adj.transpose(), tol, scale);
      Vector dir = w.vectors() * normal_vector(rng, w.rank());
      dir /= dir.norm();
      const double delta = ncp(ctx.p3, mean_with(dir), 1.0);
      if (!(delta > t.ncp_positive)) {
        log.fail("ncp " + std::to_string(delta) + " for an estimable signal in " + name, delta);
      }

      // Fully estimable: delta3 = 0 exactly when E_{1|0} beta1 = 0, so the
      // two null spaces coincide.
      const Index r10 = rank_of(e10, tol, 0.0);
      if (r10 == ctx.df3) {
        const Basis tested_rows = span_of(ctx.x1.transpose() * ctx.p3, tol, scale);
        const Basis target_rows = span_of(e10.transpose(), tol, 0.0);
        log.expect_below(subspace_distance(tested_rows, target_rows), t.subspace,
                         "null(P3 X1) != null(E_{1|0}) in a fully estimable case for " + name);
      }
    }
  });
}

CheckReport check_prop3(const DesignSampler& sampler, int cases, const CheckTolerances& t) {
  return run_cases("prop3", kSaltProp3, CaseKind::general, sampler, cases,
                   [&](const SampledCase& c, CaseLog& log) {
    const FramePtr frame = frame_of(c);
    const double scale = x_scale(*frame);
    for (const EffectRef& e : model_effects(c.spec)) {
      const EffectContext ctx = build_context(frame, e.effect, e.part);
      const std::string name = effect_name(*frame, e);
      log.effect();
      check_nu(ctx, scale, name, log);
      if (ctx.e2.cols() == 0 || ctx.n01.rank() == 0) continue;
      const TargetEffect target =
          target_effect(c.spec.parts[static_cast<std::size_t>(e.part)].effects, e.effect, frame->space());
      const Matrix e2_star =
          ctx.e2 * (ctx.e2.transpose() * (frame->part_incidence(e.part).transpose() * ctx.n01.vectors()));
      const double size = e2_star.norm();
      if (size <= frame->tolerance().subspace_abs) continue;
      log.substantive();
      log.expect_below((target.h_star * e2_star).norm() / std::max(1.0, size), t.prop3,
                       "H_* E_{2*} != 0 for " + name);
    }
  });
}

CheckReport check_prop4_cellsize(const DesignSampler& sampler, int cases, const CheckTolerances& t) {
  return run_cases("prop4_cellsize", kSaltProp4, CaseKind::general, sampler, cases,
                   [&](const SampledCase& c, CaseLog& log) {
    const FramePtr frame = frame_of(c);
    const double scale = x_scale(*frame);
    // Without covariates the collapsed design K0; with covariates an
    // orthonormal basis of the row space of A stands in for it.
    Matrix other_map;
    if (c.covariates.empty()) {
      other_map = collapsed_incidence(c.design);
    } else {
      const Index r = numerical_rank(frame->cell_map(), frame->tolerance());
      other_map = leading_basis(frame->cell_map().transpose(), r).vectors().transpose();
    }
    const FramePtr other = std::make_shared<const ModelFrame>(
        ModelFrame::from_cell_map(frame->space(), other_map, c.spec, frame->tolerance()));
    for (const EffectRef& e : model_effects(c.spec)) {
      const EffectContext ctx = build_context(frame, e.effect, e.part);
      const EffectContext ctx2 = build_context(other, e.effect, e.part);
      const std::string name = effect_name(*frame, e);
      log.effect();
      check_nu(ctx, scale, name, log);
      if (ctx.df3 != ctx2.df3) {
        log.fail("df " + std::to_string(ctx.df3) + " vs " + std::to_string(ctx2.df3) +
                     " after collapsing cell sizes for " + name,
                 std::abs(double(ctx.df3 - ctx2.df3)));
        continue;
      }
      if (ctx.df3 == 0) continue;
      log.substantive();
      log.expect_below(subspace_distance(stacked_tested(ctx), stacked_tested(ctx2)), t.subspace,
                       "tested span changed after collapsing cell sizes for " + name);
    }
  });
}

CheckReport check_prop5_covariate(const DesignSampler& sampler, int cases, const CheckTolerances& t) {
  return run_cases("prop5_covariate", kSaltProp5, CaseKind::one_covariate, sampler, cases,
                   [&](const SampledCase& c, CaseLog& log) {
    Rng rng(c.seed ^ 0x5851f42d4c957f2dULL);
    const FramePtr frame = frame_of(c);
    const double scale = x_scale(*frame);
    const Tolerance& tol = frame->tolerance();
    const FactorSpace& space = frame->space();

    // Rescaling the covariate's non-zero values cell by cell leaves the row
    // space of K_1 alone, so the covariate part on its own tests the same
    // contrasts.
    {
      const Matrix k1 = frame->part_incidence(1);
      Vector factor(space.cell_count());
      for (Index l = 0; l < factor.size(); ++l) {
        factor(l) = uniform_real(rng, 0.5, 2.0) * (coin(rng, 0.5) ? 1.0 : -1.0);
      }
      const Matrix k1_rescaled = k1 * factor.asDiagonal();
      ModelSpec alone;
      alone.parts.push_back({std::nullopt, c.spec.parts[1].effects});
      const FramePtr fa = std::make_shared<const ModelFrame>(ModelFrame::from_cell_map(space, k1, alone, tol));
      const FramePtr fb =
          std::make_shared<const ModelFrame>(ModelFrame::from_cell_map(space, k1_rescaled, alone, tol));
      for (const EffectTuple& j : alone.parts[0].effects) {
        const EffectContext ca = build_context(fa, j, 0);
        const EffectContext cb = build_context(fb, j, 0);
        const std::string name = "x1:" + j.bits() + " alone";
        log.effect();
        if (ca.df3 != cb.df3) {
          log.fail("df changed under covariate rescaling for " + name, std::abs(double(ca.df3 - cb.df3)));
          continue;
        }
        if (ca.df3 == 0) continue;
        log.expect_below(subspace_distance(tested_eta_contrasts(ca), tested_eta_contrasts(cb)), t.subspace,
                         "tested span changed under covariate rescaling for " + name);
      }
    }

    // Direct-sum precondition; without it the case is vacuous.
    if (subspace_intersect(frame->part_basis(0), frame->part_basis(1), tol).rank() != 0) return;

    ModelSpec reduced_spec;
    reduced_spec.parts.push_back(c.spec.parts[0]);
    const FramePtr reduced =
        std::make_shared<const ModelFrame>(ModelFrame::build(c.design, reduced_spec, {}, tol));
    for (const EffectTuple& j : c.spec.parts[0].effects) {
      const EffectContext full = build_context(frame, j, 0);
      const EffectContext red = build_context(reduced, j, 0);
      const std::string name = effect_name(*frame, {0, j});
      log.effect();
      check_nu(full, scale, name, log);
      // sp[B'(I - P_{(A,C)})] against sp[B'(I - P_A)].
      const Basis with_cov = span_of(full.x1_adj.transpose(), tol, scale);
      const Basis without = span_of(red.x1_adj.transpose(), tol, scale);
      if (with_cov.rank() != without.rank()) {
        log.fail("tested rank " + std::to_string(with_cov.rank()) + " with the covariate vs " +
                     std::to_string(without.rank()) + " without for " + name,
                 std::abs(double(with_cov.rank() - without.rank())));
        continue;
      }
      if (with_cov.rank() == 0) continue;
      log.substantive();
      log.expect_below(subspace_distance(with_cov, without), t.subspace,
                       "tested functions differ once the covariate part is dropped for " + name);
    }
  });
}

CheckReport check_balanced_equivalence(const DesignSampler& sampler, int cases,
                                       const CheckTolerances& t) {
  return run_cases("balanced_equivalence", kSaltBalanced, CaseKind::balanced, sampler, cases,
                   [&](const SampledCase& c, CaseLog& log) {
    Rng rng(c.seed ^ 0xd1b54a32d192ed03ULL);
    const FramePtr frame = frame_of(c);
    const double scale = x_scale(*frame);
    const FactorSpace& space = frame->space();
    const Vector y = normal_vector(rng, c.design.observations()) * 3.0 +
                     Vector::Constant(c.design.observations(), uniform_real(rng, -5.0, 5.0));
    const Matrix k = incidence_matrix(c.design);
    const double reps = c.design.cell_counts().front();
    const Vector cell_totals = k.transpose() * y;
    for (const EffectTuple& j : c.spec.parts[0].effects) {
      const EffectContext ctx = build_context(frame, j, 0);
      const std::string name = effect_name(*frame, {0, j});
      log.effect();
      check_nu(ctx, scale, name, log);
      log.substantive();
      const int expected_df = effect_rank(j, space);
      if (ctx.df3 != expected_df) {
        log.fail("df " + std::to_string(ctx.df3) + " but rank(H_j) " + std::to_string(expected_df) +
                     " for " + name,
                 std::abs(double(ctx.df3 - expected_df)));
      }
      // Classical balanced SS: y' K H_j K' y / r.
      const double classical = cell_totals.dot(effect_H(j, space) * cell_totals) / reps;
      const double ss3 = quadratic_form(y, ctx.p3);
      log.expect_below(std::abs(ss3 - classical) / std::max(1.0, std::abs(classical)), t.balanced,
                       "SS3 differs from the balanced ANOVA SS for " + name);
    }
  });
}

CheckReport run_check(const std::string& name, const DesignSampler& sampler, int cases,
                      const CheckTolerances& tol) {
  if (name == "prop1") return check_prop1(sampler, cases, tol);
  if (name == "prop2_ncp") return check_prop2_ncp(sampler, cases, tol);
  if (name == "prop3") return check_prop3(sampler, cases, tol);
  if (name == "prop4_cellsize") return check_prop4_cellsize(sampler, cases, tol);
  if (name == "prop5_covariate") return check_prop5_covariate(sampler, cases, tol);
  if (name == "balanced_equivalence") return check_balanced_equivalence(sampler, cases, tol);
  throw InputError("unknown check '" + name + "'");
}

std::string report_json(const std::vector<CheckReport>& reports, std::uint64_t seed, int cases) {
  using nlohmann::ordered_json;
  ordered_json checks = ordered_json::array();
  bool all = true;
  for (const CheckReport& r : reports) {
    ordered_json failures = ordered_json::array();
    for (const CheckFailure& f : r.failures) {
      failures.push_back({{"seed", f.seed},
                          {"design", f.design},
                          {"detail", f.detail},
                          {"discrepancy", std::isfinite(f.discrepancy) ? ordered_json(f.discrepancy)
                                                                         : ordered_json(nullptr)}});
    }
    all = all && r.passed();
    checks.push_back({{"check", r.check_name},
                      {"passed", r.passed()},
                      {"cases_run", r.cases_run},
                      {"vacuous", r.vacuous},
                      {"non_vacuous_rate", r.non_vacuous_rate()},
                      {"effects_checked", r.effects_checked},
                      {"max_discrepancy", r.max_discrepancy},
                      {"failures", failures}});
  }
  ordered_json doc = {{"seed", seed}, {"cases", cases}, {"passed", all}, {"checks", checks}};
  return doc.dump(2) + '\n';
}

std::string report_text(const std::vector<CheckReport>& reports) {
  std::ostringstream s;
  for (const CheckReport& r : reports) {
    char line[256];
    std::snprintf(line, sizeof line,
                  "%-22s %s  cases %d  non-vacuous %.1f%%  effects %d  failures %zu  max discrepancy %.3g  "
                  "%.2fs\n",
                  r.check_name.c_str(), r.passed() ? "PASS" : "FAIL", r.cases_run,
                  100.0 * r.non_vacuous_rate(), r.effects_checked, r.failures.size(), r.max_discrepancy,
                  r.seconds);
    s << line;
    for (const CheckFailure& f : r.failures) {
      s << "  " << f.design << "\n    " << f.detail << " (discrepancy " << f.discrepancy << ")\n";
    }
  }
  return s.str();
}

}  // namespace t3star
