#include "t3star/dataset.hpp"

#include "t3star/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace t3star {

int CsvTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return static_cast<int>(k);
  }
  return -1;
}

namespace {

std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string where(std::size_t line, const std::string& column) {
  return "line " + std::to_string(line) + ", column '" + column + "'";
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;      // inside quotes
  bool was_quoted = false;  // current field started with a quote
  std::size_t i = 0;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    was_quoted = false;
    // A blank line is skipped rather than read as one empty field.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        continue;
      }
      field += c;
      ++i;
      continue;
    }
    if (c == '"') {
      if (!field.empty() || was_quoted) {
        throw ParseError("quote inside an unquoted field", i);
      }
      quoted = true;
      was_quoted = true;
      ++i;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      was_quoted = false;
      ++i;
    } else if (c == '\n' || c == '\r') {
      end_record();
      i += (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ? 2 : 1;
    } else {
      if (was_quoted) throw ParseError("text after a closing quote", i);
      field += c;
      ++i;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", text.size());
  if (!field.empty() || !record.empty() || was_quoted) end_record();

  if (records.empty()) throw InputError("CSV input has no header row");
  CsvTable t;
  t.header = std::move(records.front());
  std::set<std::string> seen;
  for (const std::string& h : t.header) {
    if (h.empty()) throw InputError("CSV header has an empty column name");
    if (!seen.insert(h).second) throw InputError("duplicate column name '" + h + "'");
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw InputError("CSV record " + std::to_string(r + 1) + " has " +
                       std::to_string(records[r].size()) + " fields, expected " +
                       std::to_string(t.header.size()));
    }
    for (std::size_t k = 0; k < records[r].size(); ++k) {
      if (records[r][k].empty()) throw InputError("empty field at " + where(r + 1, t.header[k]));
    }
    t.rows.push_back(std::move(records[r]));
  }
  if (t.rows.empty()) throw InputError("CSV input has no data rows");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::pair<std::string, std::vector<std::string>> parse_level_declaration(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InputError("level declaration '" + std::string(text) + "' must look like NAME=l1,l2");
  }
  std::pair<std::string, std::vector<std::string>> out;
  out.first = std::string(text.substr(0, eq));
  std::string_view rest = text.substr(eq + 1);
  while (true) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    if (item.empty()) throw InputError("empty level in declaration for '" + out.first + "'");
    out.second.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

Schema infer_schema(const CsvTable& table, const SchemaOverrides& overrides) {
  auto listed = [](const std::vector<std::string>& v, const std::string& name) {
    return std::find(v.begin(), v.end(), name) != v.end();
  };
  for (const std::string& name : overrides.factors) {
    if (table.column(name) < 0) throw InputError("missing column '" + name + "'");
    if (listed(overrides.covariates, name)) {
      throw InputError("column '" + name + "' declared both factor and covariate");
    }
  }
  for (const std::string& name : overrides.covariates) {
    if (table.column(name) < 0) throw InputError("missing column '" + name + "'");
  }
  for (const auto& [name, levels] : overrides.levels) {
    if (table.column(name) < 0) throw InputError("missing column '" + name + "'");
    if (listed(overrides.covariates, name)) {
      throw InputError("levels declared for covariate '" + name + "'");
    }
  }

  Schema schema;
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    ColumnSchema c;
    c.name = table.header[k];
    bool numeric = true;
    for (const auto& row : table.rows) {
      if (!parse_number(row[k])) {
        numeric = false;
        break;
      }
    }
    const bool forced_factor = listed(overrides.factors, c.name) || overrides.levels.count(c.name);
    if (listed(overrides.covariates, c.name) || (numeric && !forced_factor)) {
      c.kind = ColumnKind::covariate;
    } else {
      c.kind = ColumnKind::factor;
      std::set<std::string> observed;
      for (const auto& row : table.rows) observed.insert(row[k]);
      auto declared = overrides.levels.find(c.name);
      if (declared != overrides.levels.end()) {
        const std::set<std::string> allowed(declared->second.begin(), declared->second.end());
        if (allowed.size() != declared->second.size()) {
          throw InputError("duplicate declared level for '" + c.name + "'");
        }
        for (const std::string& l : observed) {
          if (!allowed.count(l)) {
            throw InputError("level '" + l + "' of '" + c.name + "' is not among the declared levels");
          }
        }
        observed = allowed;
      }
      c.levels.assign(observed.begin(), observed.end());
    }
    schema.columns.push_back(std::move(c));
  }
  return schema;
}

std::string Dataset::cell_label(int cell) const {
  const std::vector<int> lv = design.space().cell_levels(cell);
  std::string s;
  for (std::size_t k = 0; k < lv.size(); ++k) {
    if (k) s += ',';
    s += factor_names[k] + "=" + level_labels[k][static_cast<std::size_t>(lv[k])];
  }
  return s;
}

Dataset load_dataset(const CsvTable& table, const Schema& schema, const Formula& formula) {
  if (table.rows.empty()) throw InputError("CSV input has no data rows");
  auto column_of = [&](const std::string& name) {
    const int k = table.column(name);
    if (k < 0) throw InputError("missing column '" + name + "'");
    return static_cast<std::size_t>(k);
  };
  auto numeric_column = [&](const std::string& name) {
    const std::size_t k = column_of(name);
    Vector v(static_cast<Index>(table.rows.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto x = parse_number(table.rows[r][k]);
      if (!x) {
        throw InputError("non-numeric value '" + table.rows[r][k] + "' at " + where(r + 2, name));
      }
      v(static_cast<Index>(r)) = *x;
    }
    return v;
  };

  Dataset d;
  d.formula = formula;
  d.factor_names = formula_factors(formula, schema);
  if (d.factor_names.empty()) throw InputError("the model must involve at least one factor");
  d.y = numeric_column(formula.response);
  for (const std::string& cov : formula_covariates(formula)) d.covariates[cov] = numeric_column(cov);

  std::vector<int> level_counts;
  std::vector<std::size_t> cols;
  for (const std::string& name : d.factor_names) {
    const ColumnSchema* c = schema.find(name);
    if (!c || c->kind != ColumnKind::factor) throw InputError("'" + name + "' is not a factor column");
    if (c->levels.size() < 2) {
      throw InputError("factor '" + name + "' needs at least 2 levels, has " +
                       std::to_string(c->levels.size()));
    }
    d.level_labels.push_back(c->levels);
    level_counts.push_back(static_cast<int>(c->levels.size()));
    cols.push_back(column_of(name));
  }
  FactorSpace space(level_counts, d.factor_names);

  std::vector<int> row_cells;
  row_cells.reserve(table.rows.size());
  std::vector<int> idx(cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto& labels = d.level_labels[k];
      const auto it = std::lower_bound(labels.begin(), labels.end(), table.rows[r][cols[k]]);
      if (it == labels.end() || *it != table.rows[r][cols[k]]) {
        throw InputError("unknown level '" + table.rows[r][cols[k]] + "' at " +
                         where(r + 2, d.factor_names[k]));
      }
      idx[k] = static_cast<int>(it - labels.begin());
    }
    row_cells.push_back(space.cell_index(idx));
  }
  d.design = Design(std::move(space), std::move(row_cells));
  d.spec = to_model_spec(formula, d.factor_names);
  d.spec.validate(d.design.space());
  return d;
}

}  // namespace t3star
