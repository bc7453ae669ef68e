#pragma once

// Model formulas:
//
//   formula := response '~' term ('+' term)*
//   term    := product ('*' product)*      a*b expands to a + b + a:b
//   product := atom (':' atom)*
//   atom    := identifier | '`' any text '`' | '1'
//
// Factor-only terms go to the cell-mean part; a term holding one covariate
// goes to that covariate's part, with the bare covariate meaning the
// intercept tuple of that part. The cell-mean intercept is always present.

#include "t3star/design.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace t3star {

enum class ColumnKind { factor, covariate, response };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::factor;
  /// Declared or observed factor levels, sorted lexicographically.
  std::vector<std::string> levels;
};

struct Schema {
  std::vector<ColumnSchema> columns;

  const ColumnSchema* find(std::string_view name) const;
  std::vector<std::string> factor_names() const;
};

struct Term {
  /// Factor names in schema order.
  std::vector<std::string> factors;
  std::optional<std::string> covariate;

  bool operator==(const Term&) const = default;
};

struct Formula {
  std::string response;
  std::vector<Term> terms;
};

Formula parse_formula(std::string_view text, const Schema& schema);

/// Factors used by the formula, in schema order.
std::vector<std::string> formula_factors(const Formula& formula, const Schema& schema);
/// Covariates used by the formula, in order of first appearance.
std::vector<std::string> formula_covariates(const Formula& formula);

/// Part 0 gets the intercept plus factor-only terms; covariate parts follow in
/// order of first appearance. Effect tuples are indexed by `factors`.
ModelSpec to_model_spec(const Formula& formula, const std::vector<std::string>& factors);

/// Canonical formula for a model spec: part 0 terms by order then factor
/// position, then each covariate part.
Formula from_model_spec(const std::string& response, const ModelSpec& spec,
                        const std::vector<std::string>& factors);

std::string to_string(const Formula& formula);
std::string term_label(const Term& term);

}  // namespace t3star
