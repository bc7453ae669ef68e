// t3star: Type III* ANOVA from a CSV file and a model formula.
//
//   t3star anova     --model "y ~ A*B" --data cells.csv [--method type3star] [--format text]
//   t3star contrasts --model "y ~ A*B" --data cells.csv
//   t3star describe  --model "y ~ A*B" --data cells.csv
//   t3star verify    --check all --cases 500 --seed 42
//
// Exit codes: 0 success, 1 input error, 2 numerical degeneracy, 3 a
// verification check failed.

#include "t3star/anova.hpp"
#include "t3star/dataset.hpp"
#include "t3star/errors.hpp"
#include "t3star/formula.hpp"
#include "t3star/render.hpp"
#include "t3star/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace t3star;

constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerifyFailed = 3;

struct ModelArgs {
  std::string model;
  std::string data;
  std::string method = "type3star";
  std::string format = "text";
  std::vector<std::string> factors;
  std::vector<std::string> covariates;
  std::vector<std::string> levels;
  bool intercept = false;
};

void add_model_options(CLI::App* cmd, ModelArgs& a, bool with_method) {
  cmd->add_option("--model", a.model, "model formula, e.g. \"y ~ A*B + x1\"")->required();
  cmd->add_option("--data", a.data, "CSV file with a header row")->required();
  if (with_method) {
    cmd->add_option("--method", a.method, "type2, type3star or anova-estimable")
        ->capture_default_str();
  }
  cmd->add_option("--format", a.format, "text or json")->capture_default_str();
  cmd->add_option("--factors", a.factors, "columns to treat as factors")->delimiter(',');
  cmd->add_option("--covariates", a.covariates, "columns to treat as covariates")->delimiter(',');
  cmd->add_option("--levels", a.levels, "declared levels, NAME=l1,l2,... (repeatable)");
}

struct Loaded {
  Dataset data;
  FramePtr frame;
  std::vector<std::string> cell_labels;
};

Loaded load(const ModelArgs& a) {
  const CsvTable table = read_csv(a.data);
  SchemaOverrides over;
  over.factors = a.factors;
  over.covariates = a.covariates;
  for (const std::string& decl : a.levels) over.levels.insert(parse_level_declaration(decl));
  const Schema schema = infer_schema(table, over);
  const Formula formula = parse_formula(a.model, schema);
  Loaded out;
  out.data = load_dataset(table, schema, formula);
  out.frame = std::make_shared<const ModelFrame>(
      ModelFrame::build(out.data.design, out.data.spec, out.data.covariates));
  for (int l = 0; l < out.data.design.space().cell_count(); ++l) {
    out.cell_labels.push_back(out.data.cell_label(l));
  }
  return out;
}

int run_anova(const ModelArgs& a) {
  const Method method = parse_method(a.method);
  const Format format = parse_format(a.format);
  const Loaded l = load(a);
  TableOptions opts;
  opts.include_intercept = a.intercept;
  std::cout << render(build_table(l.data.y, l.frame, method, opts), format);
  return 0;
}

int run_contrasts(const ModelArgs& a) {
  const Method method = parse_method(a.method);
  const Format format = parse_format(a.format);
  const Loaded l = load(a);
  std::cout << render(effect_contrasts(l.frame, method, a.intercept), l.frame->space(), l.cell_labels,
                      format);
  return 0;
}

int run_describe(const ModelArgs& a) {
  const Format format = parse_format(a.format);
  const Loaded l = load(a);
  std::cout << render(estimability_report(l.frame), l.frame->space(), l.cell_labels, format);
  return 0;
}

struct VerifyArgs {
  std::string check = "all";
  int cases = 500;
  std::uint64_t seed = 42;
  std::string format = "text";
  std::string output;
};

int run_verify(const VerifyArgs& v) {
  const Format format = parse_format(v.format);
  std::vector<std::string> names;
  if (v.check == "all") {
    names = check_names();
  } else {
    names.push_back(v.check);
  }
  const DesignSampler sampler(v.seed);
  std::vector<CheckReport> reports;
  for (const std::string& n : names) reports.push_back(run_check(n, sampler, v.cases));
  const std::string json = report_json(reports, v.seed, v.cases);
  if (!v.output.empty()) {
    std::ofstream out(v.output);
    if (!out) throw InputError("cannot write '" + v.output + "'");
    out << json;
  }
  std::cout << (format == Format::json ? json : report_text(reports));
  for (const CheckReport& r : reports) {
    if (!r.passed()) return kExitVerifyFailed;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type III* sums of squares, estimable functions and lagniappe df"};
  app.require_subcommand(1);

  ModelArgs anova_args;
  CLI::App* anova = app.add_subcommand("anova", "ANOVA table");
  add_model_options(anova, anova_args, true);
  anova->add_flag("--intercept", anova_args.intercept, "include the intercept row");

  ModelArgs contrast_args;
  CLI::App* contrasts = app.add_subcommand("contrasts", "tested cell-mean contrasts per effect");
  add_model_options(contrasts, contrast_args, true);

  ModelArgs describe_args;
  CLI::App* describe = app.add_subcommand("describe", "estimability report");
  add_model_options(describe, describe_args, false);

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "randomized identity checks");
  verify->add_option("--check", verify_args.check, "check name or all")->capture_default_str();
  verify->add_option("--cases", verify_args.cases, "cases per check")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--seed", verify_args.seed, "base seed")->capture_default_str();
  verify->add_option("--format", verify_args.format, "text or json")->capture_default_str();
  verify->add_option("--output", verify_args.output, "also write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (anova->parsed()) return run_anova(anova_args);
    if (contrasts->parsed()) return run_contrasts(contrast_args);
    if (describe->parsed()) return run_describe(describe_args);
    if (verify->parsed()) return run_verify(verify_args);
  } catch (const NumericalDegeneracyError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
