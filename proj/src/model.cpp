#include "t3star/model.hpp"

#include "t3star/errors.hpp"

namespace t3star {

ModelFrame ModelFrame::build(const Design& design, const ModelSpec& spec,
                             const CovariateTable& covariates, const Tolerance& tol) {
  spec.validate(design.space());
  const Matrix k0 = incidence_matrix(design);
  const Index a = design.space().cell_count();
  Matrix map(k0.rows(), a * static_cast<Index>(spec.parts.size()));
  for (std::size_t i = 0; i < spec.parts.size(); ++i) {
    const CovariatePart& part = spec.parts[i];
    auto block = map.middleCols(static_cast<Index>(i) * a, a);
    if (!part.covariate) {
      block = k0;
      continue;
    }
    auto it = covariates.find(*part.covariate);
    if (it == covariates.end()) throw InputError("missing covariate column " + *part.covariate);
    if (it->second.size() != k0.rows()) {
      throw DimensionError("covariate " + *part.covariate + " has the wrong length");
    }
    require_finite(it->second, "covariate");
    block = it->second.asDiagonal() * k0;
  }
  return from_cell_map(design.space(), std::move(map), spec, tol);
}

ModelFrame ModelFrame::from_cell_map(FactorSpace space, Matrix cell_map, ModelSpec spec,
                                     const Tolerance& tol) {
  tol.validate();
  spec.validate(space);
  const Index a = space.cell_count();
  if (cell_map.cols() != a * static_cast<Index>(spec.parts.size())) {
    throw DimensionError("cell map must have one a_*-column block per model part");
  }
  require_finite(cell_map, "cell map");
  ModelFrame f;
  f.space_ = std::move(space);
  f.spec_ = std::move(spec);
  f.tol_ = tol;
  f.cell_map_ = std::move(cell_map);
  f.finish();
  return f;
}

void ModelFrame::finish() {
  const Index a = space_.cell_count();
  const Index n = cell_map_.rows();
  Index cols = 0;
  for (std::size_t i = 0; i < spec_.parts.size(); ++i) {
    part_e_.push_back(effect_E_concat(spec_.parts[i].effects, space_));
    part_pe_.push_back(effect_H_sum(closure(spec_.parts[i].effects), space_));
    for (const EffectTuple& j : spec_.parts[i].effects) {
      const Index c = effect_E(j, space_).cols();
      blocks_.push_back({static_cast<int>(i), j, cols, c});
      cols += c;
    }
  }
  x_.resize(n, cols);
  Index at = 0;
  for (std::size_t i = 0; i < spec_.parts.size(); ++i) {
    const Matrix& e = part_e_[i];
    x_.middleCols(at, e.cols()) = cell_map_.middleCols(static_cast<Index>(i) * a, a) * e;
    at += e.cols();
  }

  column_basis_ = orthonormal_basis(x_, tol_);
  for (int i = 0; i < part_count(); ++i) {
    part_basis_.push_back(orthonormal_basis(select_columns([i](const ColumnBlock& b) { return b.part == i; }), tol_));
  }

  parts_direct_ = true;
  for (int i = 0; i < part_count(); ++i) {
    for (int k = i + 1; k < part_count(); ++k) {
      const Index r = subspace_intersect(part_basis_[static_cast<std::size_t>(i)],
                                         part_basis_[static_cast<std::size_t>(k)], tol_)
                          .rank();
      overlap_ranks_.push_back(r);
      if (r != 0) parts_direct_ = false;
    }
  }

  for (int i = 0; i < part_count(); ++i) {
    const Matrix ki = part_incidence(i);
    const Matrix& pe = part_pe_[static_cast<std::size_t>(i)];
    if (part_count() == 1) {
      estimable_eta_.push_back(leading_basis(pe * ki.transpose(), rank()));
      continue;
    }
    const Matrix others = select_columns([i](const ColumnBlock& b) { return b.part != i; });
    const Basis uo = orthonormal_basis(others, tol_);
    const Matrix resid = ki - uo.vectors() * (uo.vectors().transpose() * ki);
    estimable_eta_.push_back(leading_basis(pe * resid.transpose(), rank() - uo.rank()));
  }
}

Matrix ModelFrame::part_incidence(int part) const {
  if (part < 0 || part >= part_count()) throw InputError("part index out of range");
  const Index a = space_.cell_count();
  return cell_map_.middleCols(static_cast<Index>(part) * a, a);
}

std::string ModelFrame::effect_label(int part, const EffectTuple& effect) const {
  const CovariatePart& p = spec_.parts.at(static_cast<std::size_t>(part));
  if (!p.covariate) return effect.label(space_);
  if (effect.is_intercept()) return *p.covariate;
  return *p.covariate + ":" + effect.label(space_);
}

}  // namespace t3star
