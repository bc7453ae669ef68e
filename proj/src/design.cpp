#include "t3star/design.hpp"

#include "t3star/errors.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>

namespace t3star {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

void require_same_space(const EffectTuple& j, const FactorSpace& space) {
  if (j.factor_count() != space.factor_count()) {
    throw DimensionError("effect tuple " + j.bits() + " does not match a " +
                         std::to_string(space.factor_count()) + "-factor space");
  }
}

}  // namespace

FactorSpace::FactorSpace(std::vector<int> levels, std::vector<std::string> names)
    : levels_(std::move(levels)), names_(std::move(names)) {
  if (levels_.empty()) throw InputError("a factor space needs at least one factor");
  if (levels_.size() > 16) throw InputError("at most 16 factors are supported");
  for (int a : levels_) {
    if (a < 2) throw InputError("every factor needs at least 2 levels");
  }
  if (names_.empty()) {
    for (std::size_t k = 0; k < levels_.size(); ++k) {
      names_.push_back(k < 26 ? std::string(1, static_cast<char>('A' + k))
                              : "F" + std::to_string(k + 1));
    }
  } else if (names_.size() != levels_.size()) {
    throw InputError("factor names and level counts differ in length");
  }
  cell_count_ = 1;
  for (int a : levels_) {
    if (cell_count_ > (1 << 20) / a) throw InputError("too many cells");
    cell_count_ *= a;
  }
}

int FactorSpace::cell_index(std::span<const int> level_indices) const {
  if (level_indices.size() != levels_.size()) throw DimensionError("wrong number of level indices");
  int idx = 0;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    if (level_indices[k] < 0 || level_indices[k] >= levels_[k]) {
      throw InputError("level index out of range");
    }
    idx = idx * levels_[k] + level_indices[k];
  }
  return idx;
}

std::vector<int> FactorSpace::cell_levels(int cell) const {
  if (cell < 0 || cell >= cell_count_) throw InputError("cell index out of range");
  std::vector<int> out(levels_.size());
  for (std::size_t k = levels_.size(); k-- > 0;) {
    out[k] = cell % levels_[k];
    cell /= levels_[k];
  }
  return out;
}

EffectTuple::EffectTuple(int factor_count, std::uint32_t mask) : f_(factor_count), mask_(mask) {
  if (factor_count < 1 || factor_count > 16) throw InputError("factor count out of range");
  if (mask >> factor_count) throw InputError("effect tuple has bits beyond its factor count");
}

EffectTuple EffectTuple::parse(const std::string& bits) {
  std::uint32_t mask = 0;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] == '1') {
      mask |= 1u << k;
    } else if (bits[k] != '0') {
      throw InputError("effect tuple must be a string of 0s and 1s: " + bits);
    }
  }
  return EffectTuple(static_cast<int>(bits.size()), mask);
}

int EffectTuple::order() const { return std::popcount(mask_); }

std::string EffectTuple::bits() const {
  std::string s;
  for (int k = 0; k < f_; ++k) s += has(k) ? '1' : '0';
  return s;
}

std::string EffectTuple::label(const FactorSpace& space) const {
  require_same_space(*this, space);
  if (is_intercept()) return "(Intercept)";
  std::string s;
  for (int k = 0; k < f_; ++k) {
    if (!has(k)) continue;
    if (!s.empty()) s += ':';
    s += space.names()[static_cast<std::size_t>(k)];
  }
  return s;
}

bool EffectTuple::operator<(const EffectTuple& other) const {
  if (f_ != other.f_) return f_ < other.f_;
  if (order() != other.order()) return order() < other.order();
  // Earlier factors first: "10" before "01" means the lowest differing bit
  // set wins.
  const std::uint32_t diff = mask_ ^ other.mask_;
  if (diff == 0) return false;
  const std::uint32_t lowest = diff & (~diff + 1u);
  return (mask_ & lowest) != 0;
}

std::vector<EffectTuple> all_effects(int factor_count) {
  std::vector<EffectTuple> out;
  for (std::uint32_t m = 0; m < (1u << factor_count); ++m) out.emplace_back(factor_count, m);
  std::sort(out.begin(), out.end());
  return out;
}

bool contains(const EffectTuple& outer, const EffectTuple& inner) {
  if (outer.factor_count() != inner.factor_count()) {
    throw DimensionError("effect tuples of different length");
  }
  return (inner.mask() & ~outer.mask()) == 0;
}

std::vector<EffectTuple> closure(const std::vector<EffectTuple>& effects) {
  std::set<EffectTuple> out;
  for (const EffectTuple& j : effects) {
    // Enumerate every submask of j.
    std::uint32_t sub = j.mask();
    while (true) {
      out.emplace(j.factor_count(), sub);
      if (sub == 0) break;
      sub = (sub - 1) & j.mask();
    }
  }
  return {out.begin(), out.end()};
}

EffectPartition partition_for_effect(const std::vector<EffectTuple>& effects,
                                     const EffectTuple& designated) {
  if (std::find(effects.begin(), effects.end(), designated) == effects.end()) {
    throw InputError("designated effect " + designated.bits() + " is not in the model");
  }
  EffectPartition p;
  p.designated = designated;
  for (const EffectTuple& j : effects) {
    if (j == designated) continue;
    if (contains(j, designated)) {
      p.containing.push_back(j);
    } else {
      p.not_containing.push_back(j);
    }
  }
  return p;
}

Matrix effect_E(const EffectTuple& j, const FactorSpace& space) {
  require_same_space(j, space);
  Matrix out = Matrix::Ones(1, 1);
  for (int k = 0; k < space.factor_count(); ++k) {
    const int a = space.levels(k);
    const Matrix factor = j.has(k) ? Matrix(Matrix::Identity(a, a)) : Matrix(Matrix::Ones(a, 1));
    out = kron(out, factor);
  }
  return out;
}

Matrix effect_H(const EffectTuple& j, const FactorSpace& space) {
  require_same_space(j, space);
  Matrix out = Matrix::Ones(1, 1);
  for (int k = 0; k < space.factor_count(); ++k) {
    const int a = space.levels(k);
    const Matrix u = Matrix::Constant(a, a, 1.0 / a);
    const Matrix factor = j.has(k) ? Matrix(Matrix::Identity(a, a) - u) : u;
    out = kron(out, factor);
  }
  return out;
}

Matrix effect_H_sum(const std::vector<EffectTuple>& effects, const FactorSpace& space) {
  Matrix out = Matrix::Zero(space.cell_count(), space.cell_count());
  for (const EffectTuple& j : effects) out += effect_H(j, space);
  return out;
}

Matrix effect_E_concat(const std::vector<EffectTuple>& effects, const FactorSpace& space) {
  std::vector<Matrix> blocks;
  blocks.reserve(effects.size());
  for (const EffectTuple& j : effects) blocks.push_back(effect_E(j, space));
  std::vector<const Matrix*> ptrs;
  for (const Matrix& b : blocks) ptrs.push_back(&b);
  return hcat(ptrs, space.cell_count());
}

int effect_rank(const EffectTuple& j, const FactorSpace& space) {
  require_same_space(j, space);
  int r = 1;
  for (int k = 0; k < space.factor_count(); ++k) {
    if (j.has(k)) r *= space.levels(k) - 1;
  }
  return r;
}

Design::Design(FactorSpace space, std::vector<int> row_cells)
    : space_(std::move(space)), row_cells_(std::move(row_cells)) {
  cell_counts_.assign(static_cast<std::size_t>(space_.cell_count()), 0);
  for (int c : row_cells_) {
    if (c < 0 || c >= space_.cell_count()) {
      throw InputError("row cell index " + std::to_string(c) + " out of range");
    }
    ++cell_counts_[static_cast<std::size_t>(c)];
  }
}

Design Design::from_counts(FactorSpace space, const std::vector<int>& counts) {
  if (static_cast<int>(counts.size()) != space.cell_count()) {
    throw DimensionError("one count per cell is required");
  }
  std::vector<int> rows;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    if (counts[l] < 0) throw InputError("cell counts must be non-negative");
    rows.insert(rows.end(), static_cast<std::size_t>(counts[l]), static_cast<int>(l));
  }
  return Design(std::move(space), std::move(rows));
}

int Design::nonempty_cells() const {
  return static_cast<int>(std::count_if(cell_counts_.begin(), cell_counts_.end(),
                                        [](int c) { return c > 0; }));
}

Matrix incidence_matrix(const Design& design) {
  Matrix k = Matrix::Zero(design.observations(), design.space().cell_count());
  for (int r = 0; r < design.observations(); ++r) {
    k(r, design.row_cells()[static_cast<std::size_t>(r)]) = 1.0;
  }
  return k;
}

void ModelSpec::validate(const FactorSpace& space) const {
  if (parts.empty()) throw InputError("model has no parts");
  if (parts.front().covariate) throw InputError("part 0 must be the cell-mean part");
  std::set<std::string> names;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const CovariatePart& p = parts[i];
    if (i > 0) {
      if (!p.covariate) throw InputError("covariate part without a covariate name");
      if (!names.insert(*p.covariate).second) {
        throw InputError("covariate " + *p.covariate + " has more than one part");
      }
    }
    if (p.effects.empty()) throw InputError("model part with an empty effect set");
    std::set<EffectTuple> seen;
    for (const EffectTuple& j : p.effects) {
      require_same_space(j, space);
      if (!seen.insert(j).second) throw InputError("duplicate effect " + j.bits() + " in a part");
    }
  }
}

int ModelSpec::part_index(const std::string& covariate) const {
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].covariate == covariate) return static_cast<int>(i);
  }
  return -1;
}

Matrix model_matrix(const Design& design, const ModelSpec& spec, const CovariateTable& covariates) {
  spec.validate(design.space());
  const Matrix k0 = incidence_matrix(design);
  std::vector<Matrix> blocks;
  for (const CovariatePart& part : spec.parts) {
    Matrix ki = k0;
    if (part.covariate) {
      auto it = covariates.find(*part.covariate);
      if (it == covariates.end()) throw InputError("missing covariate column " + *part.covariate);
      if (it->second.size() != k0.rows()) {
        throw DimensionError("covariate " + *part.covariate + " has the wrong length");
      }
      require_finite(it->second, "covariate");
      ki = it->second.asDiagonal() * k0;
    }
    blocks.push_back(ki * effect_E_concat(part.effects, design.space()));
  }
  std::vector<const Matrix*> ptrs;
  for (const Matrix& b : blocks) ptrs.push_back(&b);
  return hcat(ptrs, k0.rows());
}

}  // namespace t3star
