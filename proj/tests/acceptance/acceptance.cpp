// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include "t3star/anova.hpp"
#include "t3star/dataset.hpp"
#include "t3star/type3.hpp"
#include "t3star/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace t3star;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Loaded {
  Dataset data;
  FramePtr frame;
};

Loaded load(const std::string& file, const std::string& model) {
  const CsvTable t = read_csv(std::string(T3STAR_TEST_DIR) + "/data/" + file);
  const Schema s = infer_schema(t);
  Loaded l;
  l.data = load_dataset(t, s, parse_formula(model, s));
  l.frame = std::make_shared<const ModelFrame>(
      ModelFrame::build(l.data.design, l.data.spec, l.data.covariates));
  return l;
}

Matrix grids(std::initializer_list<std::initializer_list<double>> cols) {
  Matrix m(9, static_cast<Index>(cols.size()));
  Index c = 0;
  for (const auto& col : cols) {
    Index r = 0;
    for (double v : col) m(r++, c) = v;
    ++c;
  }
  return m;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome table1_spans() {
  const auto t0 = Clock::now();
  const Loaded l = load("table1.csv", "y ~ A*B");
  const std::vector<EffectContrasts> c = effect_contrasts(l.frame, Method::type3star);
  const double secs = seconds_since(t0);
  const Matrix want[3] = {
      grids({{0, 1, 1, 0, 0, -1, 0, -1, 0}, {0, 1, -1, 2, 0, 1, -2, -1, 0}}),
      grids({{0, 0, 0, 1, 0, -1, 1, -1, 0}, {0, 2, -2, 1, 0, -1, -1, 1, 0}}),
      grids({{0, 1, -1, -1, 0, 1, 1, -1, 0}}),
  };
  const Index dims[3] = {2, 2, 1};
  if (c.size() != 3) return {false, "expected 3 effects"};
  double worst = 0.0;
  bool ok = secs < 1.0;
  std::ostringstream d;
  for (int k = 0; k < 3; ++k) {
    const double dist = subspace_distance(c[k].contrasts, orthonormal_basis(want[k]));
    worst = std::max(worst, dist);
    ok = ok && c[k].contrasts.rank() == dims[k] && dist < 1e-8;
    d << c[k].label << " dim " << c[k].contrasts.rank() << "; ";
  }
  d << "max distance " << fmt(worst) << ", " << fmt(secs) << " s";
  return {ok, d.str()};
}

Outcome table1_proportions() {
  const Loaded l = load("table1.csv", "y ~ A*B");
  const std::vector<EffectContrasts> c = effect_contrasts(l.frame, Method::type3star);
  const EffectTuple a = EffectTuple::parse("10"), b = EffectTuple::parse("01"),
                    ab = EffectTuple::parse("11");
  double worst = 0.0;
  int vectors = 0;
  for (int k = 0; k < 2; ++k) {
    const EffectTuple& main = k == 0 ? a : b;
    for (const ContrastDecomposition& dec : c[static_cast<std::size_t>(k)].decomposition) {
      ++vectors;
      for (const auto& [j, share] : dec) {
        const double want = (j == main || j == ab) ? 0.5 : 0.0;
        worst = std::max(worst, std::abs(share - want));
      }
    }
  }
  return {vectors == 4 && worst <= 1e-9,
          std::to_string(vectors) + " contrasts, max deviation from 0.5/0.5 " + fmt(worst)};
}

Outcome table1_df() {
  const Loaded l = load("table1.csv", "y ~ A*B");
  const AnovaTable t3 = build_table(l.data.y, l.frame, Method::type3star);
  const AnovaTable est = build_table(l.data.y, l.frame, Method::anova_estimable);
  auto dfs = [](const AnovaTable& t) {
    std::vector<int> v;
    for (const AnovaRow& r : t.rows) v.push_back(r.df);
    return v;
  };
  const std::vector<int> d3 = dfs(t3), de = dfs(est);
  const int total = d3.size() == 3 ? d3[0] + d3[1] + d3[2] : -1;
  const bool ok = d3 == std::vector<int>{2, 2, 1} && de == std::vector<int>{0, 0, 1} &&
                  total == t3.model_rank - 1;
  std::ostringstream d;
  d << "type3star";
  for (int v : d3) d << ' ' << v;
  d << " (total " << total << " of " << t3.model_rank - 1 << "), anova-estimable";
  for (int v : de) d << ' ' << v;
  return {ok, d.str()};
}

Outcome block_design() {
  const Loaded l = load("blocks5x5.csv", "y ~ A*B");
  const EstimabilityReport r = estimability_report(l.frame);
  if (r.effects.size() != 3 || !r.unaccounted) return {false, "report incomplete"};
  // Mean of the 3x3 block cells minus mean of the 2x2 block cells.
  Vector c = Vector::Zero(25);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i < 3 && j < 3) c(i * 5 + j) = 1.0 / 9.0;
      if (i >= 3 && j >= 3) c(i * 5 + j) = -1.0 / 4.0;
    }
  }
  const Matrix& u = r.unaccounted->vectors();
  const double align = u.cols() ? (u.transpose() * c).norm() / c.norm() : 0.0;
  const bool ok = r.effects[0].df == 3 && r.effects[1].df == 3 && r.effects[2].df == 5 &&
                  r.unaccounted_df == 1 && r.effect_space_df == 12 && u.cols() == 1 &&
                  align > 1.0 - 1e-8;
  std::ostringstream d;
  d << "A* " << r.effects[0].df << ", B* " << r.effects[1].df << ", AB " << r.effects[2].df
    << ", unaccounted " << r.unaccounted_df.value_or(0) << " of " << r.effect_space_df
    << ", alignment 1 - " << fmt(1.0 - align);
  return {ok, d.str()};
}

Outcome proposition_suite() {
  const auto t0 = Clock::now();
  const DesignSampler sampler(42);
  bool ok = true;
  int failures = 0;
  std::ostringstream d;
  for (const std::string& name : check_names()) {
    const CheckReport r = run_check(name, sampler, 500);
    ok = ok && r.passed();
    failures += static_cast<int>(r.failures.size());
    d << name << ' ' << fmt(100.0 * r.non_vacuous_rate()) << "% ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  d << "non-vacuous; " << failures << " failures, " << fmt(secs) << " s";
  return {ok, d.str()};
}

Outcome dual_construction() {
  const DesignSampler sampler(2718);
  std::mt19937_64 rng(31415);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  int compared = 0;
  for (int k = 0; k < 100; ++k) {
    const SampledCase c = sampler.draw(sampler.case_seed(77, k), CaseKind::general);
    const FramePtr f = std::make_shared<const ModelFrame>(ModelFrame::build(c.design, c.spec, c.covariates));
    Vector y(c.design.observations());
    for (Index i = 0; i < y.size(); ++i) y(i) = normal(rng);
    for (std::size_t p = 0; p < c.spec.parts.size(); ++p) {
      for (const EffectTuple& j : c.spec.parts[p].effects) {
        const EffectContext ctx = build_context(f, j, static_cast<int>(p));
        const double s3 = *type3_ss(y, ctx).ss;
        const SumOfSquares g = glh_ss(y, ctx.x_star, type3_glh_matrix(ctx));
        if (g.df != ctx.df3) return {false, "df mismatch in case " + std::to_string(k)};
        if (ctx.df3 == 0) {
          if (s3 != 0.0 || g.ss != 0.0) return {false, "non-zero SS with 0 df"};
          continue;
        }
        worst = std::max(worst, std::abs(g.ss - s3) / std::abs(s3));
        ++compared;
      }
    }
  }
  return {worst <= 1e-8, std::to_string(compared) + " effects, max relative difference " + fmt(worst)};
}

Outcome hand_values() {
  const Loaded l = load("balanced2x2.csv", "y ~ A*B");
  const AnovaTable t = build_table(l.data.y, l.frame, Method::type3star);
  const double want[3] = {6.25, 2.25, 0.25};
  double worst = 0.0;
  if (t.rows.size() != 3) return {false, "expected 3 rows"};
  for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(t.rows[k].ss - want[k]));
  std::ostringstream d;
  d << "SS " << t.rows[0].ss << ", " << t.rows[1].ss << ", " << t.rows[2].ss << "; max error " << fmt(worst);
  return {worst <= 1e-12, d.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"Table 1 tested spans", table1_spans},
      {"Table 1 decomposition proportions", table1_proportions},
      {"df accounting, 3x3 example", table1_df},
      {"df accounting, two-block 5x5 example", block_design},
      {"proposition suite, 500 cases, seed 42", proposition_suite},
      {"GLH form equals Type III* SS on 100 designs", dual_construction},
      {"balanced 2x2 hand values", hand_values},
  };
  int failed = 0;
  int k = 0;
  for (const Criterion& c : criteria) {
    ++k;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", k, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", k - failed, k);
  return failed == 0 ? 0 : 1;
}
