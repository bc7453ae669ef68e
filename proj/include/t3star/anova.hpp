#pragma once

#include "t3star/design.hpp"
#include "t3star/model.hpp"
#include "t3star/type3.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace t3star {

enum class Method { type2, type3star, anova_estimable };

std::string to_string(Method m);
/// "type2", "type3star" or "anova-estimable"; throws InputError otherwise.
Method parse_method(std::string_view text);

struct AnovaRow {
  std::string effect_label;
  int part = 0;
  EffectTuple effect;
  Method method = Method::type3star;
  double ss = 0.0;
  int df = 0;
  int estimable_df = 0;
  int lagniappe_df = 0;
  std::optional<double> f_stat;
  std::optional<double> p_value;
};

struct AnovaTable {
  Method method = Method::type3star;
  std::vector<AnovaRow> rows;
  double sse = 0.0;
  int df_error = 0;
  std::optional<double> sigma2_hat;
  int observations = 0;
  int model_rank = 0;
  /// Type III* only: df of rank(X) minus the intercept left outside every
  /// tested span (the between-disconnected-parts remainder). Reported as a
  /// diagnostic, never as an effect row.
  std::optional<int> unaccounted_df;
  std::vector<std::string> warnings;
};

struct TableOptions {
  bool include_intercept = false;
};

struct FTest {
  double f_stat = 0.0;
  double p_value = 1.0;
};

/// Central F test of ss/df against sse/df_error. Empty when any df is zero
/// or sse is not positive.
std::optional<FTest> f_test(double ss, int df, double sse, int df_error);

AnovaTable build_table(const Vector& y, const FramePtr& frame, Method method,
                       const TableOptions& options = {});
AnovaTable build_table(const Vector& y, const Design& design, const ModelSpec& spec,
                       const CovariateTable& covariates, Method method,
                       const TableOptions& options = {});

/// Every reported effect of the model: all tuples of all parts, except the
/// intercept of part 0 unless requested.
std::vector<std::pair<int, EffectTuple>> reported_effects(const ModelSpec& spec,
                                                          bool include_intercept = false);

struct EffectEstimability {
  std::string label;
  int part = 0;
  EffectTuple effect;
  std::vector<EffectTuple> target_effects;  // J_*
  int target_df = 0;                        // rank(H_*)
  int df = 0;                               // Type III* df
  int estimable_df = 0;
  int lagniappe_df = 0;
  /// tr(P_T H_j) / df for each j in B^f: how the whole tested span splits
  /// across ANOVA effects. Empty when df is 0 or contrasts are unavailable.
  ContrastDecomposition span_proportions;
};

struct SpanOverlap {
  std::string first;
  std::string second;
  Index rank = 0;
};

struct EstimabilityReport {
  std::vector<EffectEstimability> effects;
  bool contrasts_available = true;
  /// rank(X) minus the rank of part 0's intercept column.
  int effect_space_df = 0;
  std::optional<int> accounted_df;
  std::optional<int> unaccounted_df;
  std::vector<SpanOverlap> overlaps;
  /// Cell-mean contrasts estimable in the model but outside every tested
  /// span; only produced for single-part models with an intercept.
  std::optional<Basis> unaccounted;
};

/// Cell-coefficient contrasts tested by one effect's SS under a method:
/// sp(P_{E_J} K' P) for the method's projector P (type2, type3star), or the
/// estimable part of the target effect (anova-estimable).
struct EffectContrasts {
  std::string label;
  int part = 0;
  EffectTuple effect;
  Method method = Method::type3star;
  int df = 0;
  int estimable_df = 0;
  int lagniappe_df = 0;
  /// Empty when the model's parts overlap.
  Basis contrasts;
  std::vector<ContrastDecomposition> decomposition;
};

std::vector<EffectContrasts> effect_contrasts(const FramePtr& frame, Method method,
                                              bool include_intercept = false);

EstimabilityReport estimability_report(const FramePtr& frame);
EstimabilityReport estimability_report(const Design& design, const ModelSpec& spec,
                                       const CovariateTable& covariates = {});

}  // namespace t3star
