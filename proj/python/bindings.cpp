#include "t3star/anova.hpp"
#include "t3star/dataset.hpp"
#include "t3star/errors.hpp"
#include "t3star/formula.hpp"
#include "t3star/render.hpp"
#include "t3star/type3.hpp"
#include "t3star/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace t3star;

namespace {

struct Loaded {
  Dataset data;
  FramePtr frame;
  std::vector<std::string> cells;
};

Loaded load(const std::string& path, const std::string& model, const std::vector<std::string>& factors,
            const std::vector<std::string>& covariates) {
  const CsvTable table = read_csv(path);
  SchemaOverrides over;
  over.factors = factors;
  over.covariates = covariates;
  const Schema schema = infer_schema(table, over);
  Loaded l;
  l.data = load_dataset(table, schema, parse_formula(model, schema));
  l.frame = std::make_shared<const ModelFrame>(
      ModelFrame::build(l.data.design, l.data.spec, l.data.covariates));
  for (int c = 0; c < l.frame->space().cell_count(); ++c) l.cells.push_back(l.data.cell_label(c));
  return l;
}

ModelSpec single_part(const std::vector<std::string>& effects) {
  ModelSpec spec;
  spec.parts.push_back({std::nullopt, {}});
  for (const std::string& e : effects) spec.parts[0].effects.push_back(EffectTuple::parse(e));
  return spec;
}

py::dict type3_effect(const std::vector<int>& levels, const std::vector<int>& counts,
                      const std::vector<std::string>& effects, const Vector& y, const std::string& effect) {
  const Design d = Design::from_counts(FactorSpace(levels), counts);
  const auto f = std::make_shared<const ModelFrame>(ModelFrame::build(d, single_part(effects)));
  const Type3Result r = type3_ss(y, build_context(f, EffectTuple::parse(effect)));
  py::dict out;
  out["ss"] = *r.ss;
  out["df"] = r.df;
  out["df_estimable"] = r.estimable_df;
  out["df_lagniappe"] = r.lagniappe_df;
  out["contrasts"] = Matrix(r.tested.vectors());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Type III* sums of squares, estimable functions and lagniappe df";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalDegeneracyError>(m, "NumericalDegeneracyError", PyExc_ArithmeticError);

  m.def(
      "anova_json",
      [](const std::string& data, const std::string& model, const std::string& method, bool intercept,
         const std::vector<std::string>& factors, const std::vector<std::string>& covariates) {
        const Loaded l = load(data, model, factors, covariates);
        TableOptions opts;
        opts.include_intercept = intercept;
        return render(build_table(l.data.y, l.frame, parse_method(method), opts), Format::json);
      },
      py::arg("data"), py::arg("model"), py::arg("method") = "type3star", py::arg("intercept") = false,
      py::arg("factors") = std::vector<std::string>{}, py::arg("covariates") = std::vector<std::string>{});

  m.def(
      "contrasts_json",
      [](const std::string& data, const std::string& model, const std::string& method,
         const std::vector<std::string>& factors, const std::vector<std::string>& covariates) {
        const Loaded l = load(data, model, factors, covariates);
        return render(effect_contrasts(l.frame, parse_method(method)), l.frame->space(), l.cells, Format::json);
      },
      py::arg("data"), py::arg("model"), py::arg("method") = "type3star",
      py::arg("factors") = std::vector<std::string>{}, py::arg("covariates") = std::vector<std::string>{});

  m.def(
      "describe_json",
      [](const std::string& data, const std::string& model, const std::vector<std::string>& factors,
         const std::vector<std::string>& covariates) {
        const Loaded l = load(data, model, factors, covariates);
        return render(estimability_report(l.frame), l.frame->space(), l.cells, Format::json);
      },
      py::arg("data"), py::arg("model"), py::arg("factors") = std::vector<std::string>{},
      py::arg("covariates") = std::vector<std::string>{});

  m.def(
      "verify_json",
      [](const std::string& check, int cases, std::uint64_t seed) {
        std::vector<std::string> names = check == "all" ? check_names() : std::vector<std::string>{check};
        const DesignSampler sampler(seed);
        std::vector<CheckReport> reports;
        {
          py::gil_scoped_release release;
          for (const std::string& n : names) reports.push_back(run_check(n, sampler, cases));
        }
        return report_json(reports, seed, cases);
      },
      py::arg("check") = "all", py::arg("cases") = 500, py::arg("seed") = 42);

  m.def("type3_effect", &type3_effect, py::arg("levels"), py::arg("counts"), py::arg("effects"), py::arg("y"),
        py::arg("effect"),
        "Type III* SS, df split and tested cell-mean contrasts for one effect of a single-part model "
        "with rows laid out cell by cell.");

  m.def(
      "numerical_rank", [](const Matrix& a) { return numerical_rank(a); }, py::arg("a"));
  m.def(
      "subspace_distance",
      [](const Matrix& a, const Matrix& b) { return subspace_distance(a, b); }, py::arg("a"), py::arg("b"));
}
