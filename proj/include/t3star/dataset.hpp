#pragma once

// CSV ingestion. Factor levels are ordered lexicographically by label so the
// cell index of a row does not depend on file order.

#include "t3star/design.hpp"
#include "t3star/formula.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace t3star {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position of `name`, or -1.
  int column(std::string_view name) const;
};

/// RFC 4180: comma separated, '"' quoting with "" escapes, LF or CRLF line
/// ends, optional UTF-8 byte order mark. Duplicate header names, ragged rows,
/// empty fields and a file without data rows are errors.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);

struct SchemaOverrides {
  /// Columns forced to be factors / covariates.
  std::vector<std::string> factors;
  std::vector<std::string> covariates;
  /// Declared factor levels; observed labels must be among them and unused
  /// ones become empty cells.
  std::map<std::string, std::vector<std::string>> levels;
};

/// A column whose every field parses as a finite number is a covariate,
/// anything else a factor, unless overridden.
Schema infer_schema(const CsvTable& table, const SchemaOverrides& overrides = {});

/// "A=a1,a2,a3" -> {"A", {"a1","a2","a3"}}.
std::pair<std::string, std::vector<std::string>> parse_level_declaration(std::string_view text);

struct Dataset {
  std::vector<std::string> factor_names;
  /// Level labels per factor, in cell-index order.
  std::vector<std::vector<std::string>> level_labels;
  Design design;
  CovariateTable covariates;
  Vector y;
  ModelSpec spec;
  Formula formula;

  /// "A=a1,B=b2" for cell l.
  std::string cell_label(int cell) const;
};

/// Builds the design for the factors the formula uses. Rows keep file order.
Dataset load_dataset(const CsvTable& table, const Schema& schema, const Formula& formula);

}  // namespace t3star
