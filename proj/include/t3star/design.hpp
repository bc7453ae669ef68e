#pragma once

// The factorial universe: cells, effect tuples and the dummy-variable /
// ANOVA-effect matrices built from them.
//
// Cells are indexed lexicographically with factor 1 varying slowest, which is
// the order the Kronecker products in effect_E / effect_H produce.

#include "t3star/linalg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace t3star {

class FactorSpace {
 public:
  FactorSpace() = default;
  /// Every count must be >= 2. Names default to A, B, C, ...
  explicit FactorSpace(std::vector<int> levels, std::vector<std::string> names = {});

  int factor_count() const { return static_cast<int>(levels_.size()); }
  const std::vector<int>& levels() const { return levels_; }
  int levels(int factor) const { return levels_.at(static_cast<std::size_t>(factor)); }
  const std::vector<std::string>& names() const { return names_; }
  /// a_* = a_1 * ... * a_f.
  int cell_count() const { return cell_count_; }

  /// Lexicographic cell index of zero-based level indices.
  int cell_index(std::span<const int> level_indices) const;
  std::vector<int> cell_levels(int cell) const;

  bool operator==(const FactorSpace&) const = default;

 private:
  std::vector<int> levels_;
  std::vector<std::string> names_;
  int cell_count_ = 1;
};

/// Binary f-tuple naming a set of factors; bit k set means factor k+1 is
/// present. The all-zero tuple is the intercept "(1)".
class EffectTuple {
 public:
  EffectTuple() = default;
  EffectTuple(int factor_count, std::uint32_t mask);
  /// From a string of '0'/'1' characters, e.g. "10" for A in a two-factor
  /// space.
  static EffectTuple parse(const std::string& bits);
  static EffectTuple intercept(int factor_count) { return EffectTuple(factor_count, 0); }

  int factor_count() const { return f_; }
  std::uint32_t mask() const { return mask_; }
  bool has(int factor) const { return (mask_ >> factor) & 1u; }
  int order() const;
  bool is_intercept() const { return mask_ == 0; }

  /// "10", "011", ...
  std::string bits() const;
  /// "A", "A:B", or "(Intercept)" using the space's factor names.
  std::string label(const FactorSpace& space) const;

  bool operator==(const EffectTuple&) const = default;
  /// Canonical order: by interaction order, then earlier factors first.
  bool operator<(const EffectTuple& other) const;

 private:
  int f_ = 0;
  std::uint32_t mask_ = 0;
};

/// All 2^f tuples in canonical order.
std::vector<EffectTuple> all_effects(int factor_count);

/// True iff `outer` contains `inner` (componentwise >=).
bool contains(const EffectTuple& outer, const EffectTuple& inner);

/// Every tuple contained in at least one member of `effects`, canonical order.
std::vector<EffectTuple> closure(const std::vector<EffectTuple>& effects);

struct EffectPartition {
  std::vector<EffectTuple> not_containing;  // J0
  EffectTuple designated;                   // J1 = {j*}
  std::vector<EffectTuple> containing;      // J2, strictly containing j*
};

EffectPartition partition_for_effect(const std::vector<EffectTuple>& effects,
                                     const EffectTuple& designated);

/// Kronecker product over factors of 1_{a_k} (absent) or I_{a_k} (present).
Matrix effect_E(const EffectTuple& j, const FactorSpace& space);
/// Kronecker product over factors of U_{a_k} (absent) or S_{a_k} (present).
Matrix effect_H(const EffectTuple& j, const FactorSpace& space);
/// Sum of effect_H over a set of tuples.
Matrix effect_H_sum(const std::vector<EffectTuple>& effects, const FactorSpace& space);
/// Concatenation of effect_E over a set of tuples (a_* x sum of ranks).
Matrix effect_E_concat(const std::vector<EffectTuple>& effects, const FactorSpace& space);
/// rank(H_j) = prod_k (a_k - 1)^{j_k}.
int effect_rank(const EffectTuple& j, const FactorSpace& space);

class Design {
 public:
  Design() = default;
  /// One entry per observation row: its lexicographic cell index.
  Design(FactorSpace space, std::vector<int> row_cells);
  /// Rows laid out cell by cell in lexicographic order, `counts[l]` rows for
  /// cell l.
  static Design from_counts(FactorSpace space, const std::vector<int>& counts);

  const FactorSpace& space() const { return space_; }
  const std::vector<int>& row_cells() const { return row_cells_; }
  const std::vector<int>& cell_counts() const { return cell_counts_; }
  int observations() const { return static_cast<int>(row_cells_.size()); }
  int nonempty_cells() const;

 private:
  FactorSpace space_;
  std::vector<int> row_cells_;
  std::vector<int> cell_counts_;
};

/// n x a_* 0/1 matrix with a single 1 per row, in the row's cell column.
Matrix incidence_matrix(const Design& design);

struct CovariatePart {
  /// Absent for part 0 (the cell-mean part).
  std::optional<std::string> covariate;
  std::vector<EffectTuple> effects;
};

struct ModelSpec {
  std::vector<CovariatePart> parts;

  /// Part 0 has no covariate, every part has a non-empty effect set without
  /// duplicates, covariate names are unique and tuples match the space.
  void validate(const FactorSpace& space) const;
  int part_index(const std::string& covariate) const;
};

/// Covariate values per observation row, keyed by covariate name.
using CovariateTable = std::map<std::string, Vector>;

/// X = [K_0 E_{J_0}, K_1 E_{J_1}, ...] with K_i = Diag(x_i) K_0.
Matrix model_matrix(const Design& design, const ModelSpec& spec,
                    const CovariateTable& covariates = {});

}  // namespace t3star
