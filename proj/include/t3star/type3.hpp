#pragma once

// Type III* sums of squares for one designated effect.
//
// For a designated tuple j* in covariate part i the columns of X split into
//   X1  the j* columns of part i,
//   X2  part-i columns whose tuple strictly contains j*,
//   X0  everything else (other parts never contain j*).
// With N01 spanning sp(X0, X1)^⊥ ∩ sp(X) and X2* = X2 X2' N01,
//   P3 = P_{(X0, X1, X2*)} - P_{(X0, X2*)}.
// P3 y is the projection of y onto sp(X_{1|0}) along sp(X0, X2*).

#include "t3star/design.hpp"
#include "t3star/linalg.hpp"
#include "t3star/model.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace t3star {

struct EffectContext {
  FramePtr frame;
  int part = 0;
  EffectPartition partition;

  Matrix x0;
  Matrix x1;
  Matrix x2;
  /// X_{1|0} = (I - P_{X0}) X1.
  Matrix x1_adj;
  Basis n01;
  Matrix x2_star;
  /// (X0, X1, X2*), in that column order.
  Matrix x_star;
  /// E_{J2} of the designated part, a_* x cols(X2).
  Matrix e2;

  Basis basis_x0;
  Basis basis_x01;
  Index rank_x0 = 0;
  Index rank_x01 = 0;

  Matrix p3;
  int df3 = 0;

  const EffectTuple& effect() const { return partition.designated; }
};

struct SumOfSquares {
  double ss = 0.0;
  int df = 0;
};

/// Sum of H_j over J_* = closure({j*}) \ closure(J0): the ANOVA effect the
/// designated tuple targets.
struct TargetEffect {
  EffectTuple j_star;
  std::vector<EffectTuple> effects;
  Matrix h_star;
  int rank = 0;
};

/// Proportion of a unit contrast's squared length falling in each sp(H_j),
/// over all of B^f in canonical order.
using ContrastDecomposition = std::vector<std::pair<EffectTuple, double>>;

struct EstimableSplit {
  int estimable_df = 0;
  int lagniappe_df = 0;
  Basis estimable;
  Basis lagniappe;
};

struct Type3Result {
  int part = 0;
  EffectTuple effect;
  Matrix p3;
  std::optional<double> ss;
  int df = 0;
  int type2_df = 0;
  TargetEffect target;
  /// False for multi-part models whose parts overlap; the contrast bases are
  /// then empty but the df split is still reported.
  bool contrasts_available = true;
  /// Tested contrasts on the designated part's cell coefficients (a_*-space).
  Basis tested;
  int estimable_df = 0;
  int lagniappe_df = 0;
  Basis estimable;
  Basis lagniappe;
  /// One decomposition per column of `tested`.
  std::vector<ContrastDecomposition> decomposition;
};

EffectContext build_context(FramePtr frame, const EffectTuple& j_star, int part = 0);
EffectContext build_context(const Design& design, const ModelSpec& spec,
                            const CovariateTable& covariates, const EffectTuple& j_star,
                            int part = 0);

/// P3 recomputed from the context's X* blocks.
Matrix type3_projector(const EffectContext& ctx);

/// Rounds a projector trace to an integer; throws NumericalDegeneracyError
/// when the trace is more than 1e-6 away from one.
int integral_trace(const Matrix& p);

Type3Result type3_ss(const Vector& y, const EffectContext& ctx);
/// Everything in Type3Result except the sum of squares.
Type3Result type3_structure(const EffectContext& ctx);

/// SS = y' P_{AG} y with A = (X^+)', so XA' = P_X. Requires sp(G) ⊆ sp(X').
SumOfSquares glh_ss(const Vector& y, const Matrix& x, const Matrix& g, const Tolerance& tol = {});
/// y' (P_full - P_restricted) y; requires sp(restricted) ⊆ sp(full).
SumOfSquares rmfm_ss(const Vector& y, const Matrix& x_full, const Matrix& x_restricted,
                     const Tolerance& tol = {});
/// y' (P_{(X0,X1)} - P_{X0}) y.
SumOfSquares type2_ss(const Vector& y, const EffectContext& ctx);
Matrix type2_projector(const EffectContext& ctx);

/// G3 = (0; X_{1|0}'; 0), rows aligned with the columns of X*.
Matrix type3_glh_matrix(const EffectContext& ctx);
/// sp(X*' P3), the Type III* estimable functions of beta_*.
Basis estimable_functions_basis(const EffectContext& ctx);
/// sp(G3); equal to estimable_functions_basis by construction of P3.
Basis adjusted_effect_functions(const EffectContext& ctx);

TargetEffect target_effect(const std::vector<EffectTuple>& part_effects,
                           const EffectTuple& j_star, const FactorSpace& space);

/// Basis of the cell-coefficient contrasts whose vanishing is equivalent to
/// zero non-centrality: sp(P_{E_{J_i}} K_i' P3).
Basis tested_eta_contrasts(const EffectContext& ctx);

EstimableSplit estimable_split(const EffectContext& ctx, const TargetEffect& target);
EstimableSplit estimable_split(const EffectContext& ctx, const TargetEffect& target,
                               const Basis& tested);

ContrastDecomposition contrast_decomposition(const Vector& c, const FactorSpace& space);

/// mu' P mu / sigma2.
double ncp(const Matrix& p, const Vector& mu, double sigma2);

}  // namespace t3star
