#include "t3star/render.hpp"

#include "t3star/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace t3star {

using nlohmann::ordered_json;

namespace {

// Round-trips through %.10g so the JSON writer emits at most 10 digits.
ordered_json num(double v) {
  return std::strtod(format_number(v).c_str(), nullptr);
}

template <typename T>
ordered_json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) return num(*v);
  return *v;
}

// Entries below this are rounding residue of exact zeros.
constexpr double kZero = 1e-12;

double clean(double v) { return std::abs(v) < kZero ? 0.0 : v; }

// Basis vectors are defined up to sign; fix it so the largest entry is
// positive, which keeps golden output stable.
Vector oriented(const Vector& v) {
  Index at = 0;
  v.cwiseAbs().maxCoeff(&at);
  return v(at) < 0 ? Vector(-v) : v;
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return right ? fill + s : s + fill;
}

// Rows of cells, column 0 left aligned, others right aligned.
std::string layout(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t k = 0; k < r.size(); ++k) width[k] = std::max(width[k], r[k].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) line += "  ";
      line += pad(r[k], width[k], k > 0);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

std::string method_title(Method m) {
  switch (m) {
    case Method::type2:
      return "Type II";
    case Method::type3star:
      return "Type III*";
    case Method::anova_estimable:
      return "Estimable-part";
  }
  return "?";
}

std::string join_labels(const std::vector<EffectTuple>& effects, const FactorSpace& space) {
  std::string s;
  for (const EffectTuple& j : effects) {
    if (!s.empty()) s += ", ";
    s += j.label(space);
  }
  return s;
}

}  // namespace

Format parse_format(std::string_view text) {
  if (text == "text") return Format::text;
  if (text == "json") return Format::json;
  throw InputError("unknown format '" + std::string(text) + "' (expected text or json)");
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string render(const AnovaTable& table, Format format) {
  if (format == Format::json) {
    ordered_json rows = ordered_json::array();
    for (const AnovaRow& r : table.rows) {
      rows.push_back({{"effect", r.effect_label},
                      {"method", to_string(r.method)},
                      {"ss", num(r.ss)},
                      {"df", r.df},
                      {"df_estimable", r.estimable_df},
                      {"df_lagniappe", r.lagniappe_df},
                      {"f", opt(r.f_stat)},
                      {"p", opt(r.p_value)}});
    }
    rows.push_back({{"effect", "Error"},
                    {"method", to_string(table.method)},
                    {"ss", num(table.sse)},
                    {"df", table.df_error},
                    {"df_estimable", nullptr},
                    {"df_lagniappe", nullptr},
                    {"f", nullptr},
                    {"p", nullptr}});
    ordered_json j = {{"method", to_string(table.method)},
                      {"observations", table.observations},
                      {"model_rank", table.model_rank},
                      {"rows", rows},
                      {"sigma2_hat", opt(table.sigma2_hat)},
                      {"unaccounted_df", opt(table.unaccounted_df)},
                      {"warnings", table.warnings}};
    return j.dump(2) + '\n';
  }

  std::string out = method_title(table.method) + " ANOVA (" + to_string(table.method) +
                    "), n = " + std::to_string(table.observations) +
                    ", rank(X) = " + std::to_string(table.model_rank) + "\n\n";
  std::vector<std::vector<std::string>> grid{{"Effect", "DF", "est+lag", "SS", "F", "p"}};
  for (const AnovaRow& r : table.rows) {
    grid.push_back({r.effect_label, std::to_string(r.df),
                    std::to_string(r.estimable_df) + "+" + std::to_string(r.lagniappe_df),
                    format_number(r.ss), r.f_stat ? format_number(*r.f_stat) : "-",
                    r.p_value ? format_number(*r.p_value) : "-"});
  }
  grid.push_back({"Error", std::to_string(table.df_error), "", format_number(table.sse), "", ""});
  out += layout(grid);
  if (table.sigma2_hat) out += "\nsigma2_hat = " + format_number(*table.sigma2_hat) + '\n';
  if (table.unaccounted_df) {
    out += "\nUnaccounted (between disconnected parts): " + std::to_string(*table.unaccounted_df) +
           " df\n";
  }
  for (const std::string& w : table.warnings) out += "warning: " + w + '\n';
  return out;
}

std::string render(const std::vector<EffectContrasts>& contrasts, const FactorSpace& space,
                   const std::vector<std::string>& cell_labels, Format format) {
  if (static_cast<int>(cell_labels.size()) != space.cell_count()) {
    throw DimensionError("one label per cell is required");
  }
  if (format == Format::json) {
    ordered_json effects = ordered_json::array();
    for (const EffectContrasts& e : contrasts) {
      ordered_json vecs = ordered_json::array();
      ordered_json decs = ordered_json::array();
      for (Index k = 0; k < e.contrasts.rank(); ++k) {
        const Vector v = oriented(e.contrasts.vectors().col(k));
        ordered_json col = ordered_json::array();
        for (Index l = 0; l < v.size(); ++l) col.push_back(num(clean(v(l))));
        vecs.push_back(col);
        ordered_json d = ordered_json::object();
        for (const auto& [j, share] : e.decomposition[static_cast<std::size_t>(k)]) {
          if (std::abs(share) > kZero) d[j.label(space)] = num(share);
        }
        decs.push_back(d);
      }
      effects.push_back({{"effect", e.label},
                         {"method", to_string(e.method)},
                         {"df", e.df},
                         {"df_estimable", e.estimable_df},
                         {"df_lagniappe", e.lagniappe_df},
                         {"contrasts", vecs},
                         {"decomposition", decs}});
    }
    ordered_json j = {{"cells", cell_labels}, {"effects", effects}};
    return j.dump(2) + '\n';
  }

  std::string out;
  for (const EffectContrasts& e : contrasts) {
    out += e.label + " (" + to_string(e.method) + "): df " + std::to_string(e.df) + ", estimable " +
           std::to_string(e.estimable_df) + ", lagniappe " + std::to_string(e.lagniappe_df) + '\n';
    if (e.contrasts.rank() == 0) {
      out += e.df > 0 ? "  contrasts unavailable (model parts overlap)\n\n" : "  no tested contrasts\n\n";
      continue;
    }
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> head{"  cell"};
    for (Index k = 0; k < e.contrasts.rank(); ++k) head.push_back("c" + std::to_string(k + 1));
    grid.push_back(head);
    std::vector<Vector> cols;
    for (Index k = 0; k < e.contrasts.rank(); ++k) cols.push_back(oriented(e.contrasts.vectors().col(k)));
    for (int l = 0; l < space.cell_count(); ++l) {
      std::vector<std::string> row{"  " + cell_labels[static_cast<std::size_t>(l)]};
      for (const Vector& v : cols) row.push_back(format_number(clean(v(l))));
      grid.push_back(row);
    }
    out += layout(grid);
    for (std::size_t k = 0; k < e.decomposition.size(); ++k) {
      std::string line = "  c" + std::to_string(k + 1) + " splits as";
      for (const auto& [j, share] : e.decomposition[k]) {
        if (std::abs(share) > kZero) line += " " + j.label(space) + " " + format_number(share);
      }
      out += line + '\n';
    }
    out += '\n';
  }
  return out;
}

std::string render(const EstimabilityReport& report, const FactorSpace& space,
                   const std::vector<std::string>& cell_labels, Format format) {
  if (format == Format::json) {
    ordered_json effects = ordered_json::array();
    for (const EffectEstimability& e : report.effects) {
      ordered_json target = ordered_json::array();
      for (const EffectTuple& j : e.target_effects) target.push_back(j.label(space));
      ordered_json shares = ordered_json::object();
      for (const auto& [j, share] : e.span_proportions) {
        if (std::abs(share) > kZero) shares[j.label(space)] = num(share);
      }
      effects.push_back({{"effect", e.label},
                         {"target", target},
                         {"target_df", e.target_df},
                         {"df", e.df},
                         {"df_estimable", e.estimable_df},
                         {"df_lagniappe", e.lagniappe_df},
                         {"span_proportions", shares}});
    }
    ordered_json overlaps = ordered_json::array();
    for (const SpanOverlap& o : report.overlaps) {
      overlaps.push_back({{"first", o.first}, {"second", o.second}, {"rank", o.rank}});
    }
    ordered_json unaccounted = nullptr;
    if (report.unaccounted) {
      unaccounted = ordered_json::array();
      for (Index k = 0; k < report.unaccounted->rank(); ++k) {
        const Vector v = oriented(report.unaccounted->vectors().col(k));
        ordered_json col = ordered_json::array();
        for (Index l = 0; l < v.size(); ++l) col.push_back(num(clean(v(l))));
        unaccounted.push_back(col);
      }
    }
    ordered_json j = {{"contrasts_available", report.contrasts_available},
                      {"effect_space_df", report.effect_space_df},
                      {"accounted_df", opt(report.accounted_df)},
                      {"unaccounted_df", opt(report.unaccounted_df)},
                      {"effects", effects},
                      {"overlaps", overlaps},
                      {"cells", cell_labels},
                      {"unaccounted_directions", unaccounted}};
    return j.dump(2) + '\n';
  }

  std::string out = "Estimability report\n\n";
  std::vector<std::vector<std::string>> grid{{"Effect", "DF", "estimable", "lagniappe", "target df", "target"}};
  for (const EffectEstimability& e : report.effects) {
    grid.push_back({e.label, std::to_string(e.df), std::to_string(e.estimable_df),
                    std::to_string(e.lagniappe_df), std::to_string(e.target_df),
                    join_labels(e.target_effects, space)});
  }
  out += layout(grid);
  out += "\nEffect space df (rank(X) less the intercept): " + std::to_string(report.effect_space_df) + '\n';
  if (!report.contrasts_available) {
    out += "Tested contrasts unavailable: model parts overlap.\n";
    return out;
  }
  out += "Accounted by tested spans: " + std::to_string(report.accounted_df.value_or(0)) + '\n';
  out += "Unaccounted: " + std::to_string(report.unaccounted_df.value_or(0)) + " of " +
         std::to_string(report.effect_space_df) + '\n';
  if (!report.overlaps.empty()) {
    out += "\nPairwise intersection ranks of tested spans\n";
    std::vector<std::vector<std::string>> og;
    for (const SpanOverlap& o : report.overlaps) og.push_back({"  " + o.first + " & " + o.second, std::to_string(o.rank)});
    out += layout(og);
  }
  bool any_shares = false;
  for (const EffectEstimability& e : report.effects) any_shares = any_shares || !e.span_proportions.empty();
  if (any_shares) {
    out += "\nShare of each tested span per ANOVA effect\n";
    for (const EffectEstimability& e : report.effects) {
      if (e.span_proportions.empty()) continue;
      std::string line = "  " + e.label + ":";
      for (const auto& [j, share] : e.span_proportions) {
        if (std::abs(share) > kZero) line += " " + j.label(space) + " " + format_number(share);
      }
      out += line + '\n';
    }
  }
  if (report.unaccounted && report.unaccounted->rank() > 0) {
    out += "\nUnaccounted directions\n";
    std::vector<std::vector<std::string>> grid2;
    std::vector<std::string> head{"  cell"};
    for (Index k = 0; k < report.unaccounted->rank(); ++k) head.push_back("u" + std::to_string(k + 1));
    grid2.push_back(head);
    for (int l = 0; l < space.cell_count(); ++l) {
      std::vector<std::string> row{"  " + cell_labels[static_cast<std::size_t>(l)]};
      for (Index k = 0; k < report.unaccounted->rank(); ++k) {
        row.push_back(format_number(clean(oriented(report.unaccounted->vectors().col(k))(l))));
      }
      grid2.push_back(row);
    }
    out += layout(grid2);
  }
  return out;
}

}  // namespace t3star
