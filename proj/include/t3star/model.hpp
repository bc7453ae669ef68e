#pragma once

#include "t3star/design.hpp"
#include "t3star/linalg.hpp"

#include <memory>
#include <string>
#include <vector>

namespace t3star {

/// A contiguous run of model-matrix columns generated by one effect tuple in
/// one covariate part.
struct ColumnBlock {
  int part = 0;
  EffectTuple effect;
  Index first = 0;
  Index count = 0;
};

/// The mean model mu = sum_i K_i E_{J_i} beta_i in evaluated form.
///
/// `cell_map` is A = [K_0, K_1, ..., K_c] (n x parts*a_*). For a design it is
/// built from the incidence matrix and covariates; any other A with the same
/// row-space semantics may be supplied directly.
class ModelFrame {
 public:
  static ModelFrame build(const Design& design, const ModelSpec& spec,
                          const CovariateTable& covariates = {}, const Tolerance& tol = {});
  static ModelFrame from_cell_map(FactorSpace space, Matrix cell_map, ModelSpec spec,
                                  const Tolerance& tol = {});

  const FactorSpace& space() const { return space_; }
  const ModelSpec& spec() const { return spec_; }
  const Tolerance& tolerance() const { return tol_; }
  int part_count() const { return static_cast<int>(spec_.parts.size()); }
  Index observations() const { return x_.rows(); }

  const Matrix& x() const { return x_; }
  const Matrix& cell_map() const { return cell_map_; }
  /// K_i, the n x a_* block of the cell map for part i.
  Matrix part_incidence(int part) const;
  /// E_{J_i}.
  const Matrix& part_effects_matrix(int part) const { return part_e_.at(static_cast<std::size_t>(part)); }
  /// P_{E_{J_i}} = H over the closure of J_i.
  const Matrix& part_effects_projector(int part) const { return part_pe_.at(static_cast<std::size_t>(part)); }
  const std::vector<ColumnBlock>& blocks() const { return blocks_; }

  /// Columns of X whose block satisfies `keep`.
  template <typename Pred>
  Matrix select_columns(Pred keep) const {
    Index cols = 0;
    for (const ColumnBlock& b : blocks_) {
      if (keep(b)) cols += b.count;
    }
    Matrix out(x_.rows(), cols);
    Index at = 0;
    for (const ColumnBlock& b : blocks_) {
      if (!keep(b)) continue;
      out.middleCols(at, b.count) = x_.middleCols(b.first, b.count);
      at += b.count;
    }
    return out;
  }

  Index rank() const { return column_basis_.rank(); }
  const Basis& column_basis() const { return column_basis_; }
  const Basis& part_basis(int part) const { return part_basis_.at(static_cast<std::size_t>(part)); }

  /// Part i's eta functions that are estimable with all other parts free:
  /// sp(P_{E_i} K_i' (I - P_{X_others})), a_*-dimensional ambient.
  const Basis& estimable_eta_functions(int part) const {
    return estimable_eta_.at(static_cast<std::size_t>(part));
  }

  /// True when every pair of covariate parts meets only at 0.
  bool parts_direct() const { return parts_direct_; }
  /// rank(sp(X_i) ∩ sp(X_k)) for each pair i < k, in row-major pair order.
  const std::vector<Index>& part_overlap_ranks() const { return overlap_ranks_; }

  std::string effect_label(int part, const EffectTuple& effect) const;

 private:
  void finish();

  FactorSpace space_;
  ModelSpec spec_;
  Tolerance tol_;
  Matrix cell_map_;
  Matrix x_;
  std::vector<Matrix> part_e_;
  std::vector<Matrix> part_pe_;
  std::vector<ColumnBlock> blocks_;
  Basis column_basis_;
  std::vector<Basis> part_basis_;
  std::vector<Basis> estimable_eta_;
  std::vector<Index> overlap_ranks_;
  bool parts_direct_ = true;
};

using FramePtr = std::shared_ptr<const ModelFrame>;

}  // namespace t3star
