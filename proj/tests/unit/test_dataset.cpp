#include "t3star/dataset.hpp"
#include "t3star/errors.hpp"

#include <doctest.h>

#include <string>

using namespace t3star;

namespace {

Dataset load(const std::string& csv, const std::string& model, const SchemaOverrides& over = {}) {
  const CsvTable t = parse_csv(csv);
  const Schema s = infer_schema(t, over);
  return load_dataset(t, s, parse_formula(model, s));
}

}  // namespace

TEST_CASE("CSV parsing") {
  const CsvTable t = parse_csv("\xEF\xBB\xBF" "a,b\r\n1,\"x, \"\"y\"\"\"\r\n\r\n2,z\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x, \"y\"");
  CHECK(t.rows[1][1] == "z");
  CHECK(t.column("b") == 1);
  CHECK(t.column("c") == -1);
  // Final line without a newline.
  CHECK(parse_csv("a\n1").rows.size() == 1);
}

TEST_CASE("CSV errors") {
  CHECK_THROWS_AS(parse_csv(""), InputError);
  CHECK_THROWS_AS(parse_csv("a,b\n"), InputError);
  CHECK_THROWS_AS(parse_csv("a,a\n1,2\n"), InputError);
  CHECK_THROWS_AS(parse_csv("a,\n1,2\n"), InputError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), InputError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,\n"), InputError);
  CHECK_THROWS_AS(parse_csv("a\n\"open\n"), ParseError);
  CHECK_THROWS_AS(parse_csv("a\nx\"y\n"), ParseError);
  CHECK_THROWS_AS(parse_csv("a\n\"x\"y\n"), ParseError);
  CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), InputError);
}

TEST_CASE("schema inference") {
  const CsvTable t = parse_csv("A,B,y,x\na1,1,2.5,0\na2,2,3.5,1e-3\n");
  const Schema s = infer_schema(t);
  CHECK(s.find("A")->kind == ColumnKind::factor);
  CHECK(s.find("B")->kind == ColumnKind::covariate);
  CHECK(s.find("x")->kind == ColumnKind::covariate);
  CHECK(s.find("A")->levels == std::vector<std::string>{"a1", "a2"});

  SchemaOverrides over;
  over.factors = {"B"};
  const Schema s2 = infer_schema(t, over);
  CHECK(s2.find("B")->kind == ColumnKind::factor);
  CHECK(s2.factor_names() == std::vector<std::string>{"A", "B"});

  SchemaOverrides both;
  both.factors = {"B"};
  both.covariates = {"B"};
  CHECK_THROWS_AS(infer_schema(t, both), InputError);
  SchemaOverrides missing;
  missing.factors = {"Z"};
  CHECK_THROWS_AS(infer_schema(t, missing), InputError);
}

TEST_CASE("levels sort lexicographically regardless of row order") {
  const Dataset d = load("A,B,y\nb,q,1\na,p,2\nb,p,3\na,q,4\n", "y ~ A*B");
  CHECK(d.level_labels[0] == std::vector<std::string>{"a", "b"});
  CHECK(d.design.row_cells() == std::vector<int>{3, 0, 2, 1});
  CHECK(d.y(0) == 1.0);
  CHECK(d.cell_label(1) == "A=a,B=q");
}

TEST_CASE("Table 1 pattern from a file") {
  const Dataset d = load("A,B,y\na1,b2,1\na1,b3,2\na2,b1,3\na2,b3,4\na3,b1,5\na3,b2,6\n", "y ~ A*B");
  CHECK(d.design.cell_counts() == std::vector<int>{0, 1, 1, 1, 0, 1, 1, 1, 0});
  CHECK(d.spec.parts[0].effects.size() == 4);
}

TEST_CASE("declared levels") {
  SchemaOverrides over;
  over.levels.insert(parse_level_declaration("A=a1,a2,a3"));
  const Dataset d = load("A,y\na1,1\na2,2\na1,3\n", "y ~ A", over);
  CHECK(d.design.cell_counts() == std::vector<int>{2, 1, 0});

  SchemaOverrides bad;
  bad.levels.insert(parse_level_declaration("A=a1,a3"));
  CHECK_THROWS_AS(load("A,y\na1,1\na2,2\n", "y ~ A", bad), InputError);
  CHECK_THROWS_AS(parse_level_declaration("A"), InputError);
  CHECK_THROWS_AS(parse_level_declaration("A=a1,,a2"), InputError);
  CHECK(parse_level_declaration("Dose=lo,hi").second == std::vector<std::string>{"lo", "hi"});
}

TEST_CASE("covariates and the response") {
  const Dataset d = load("A,x,y\na1,0.5,1\na2,1.5,2\na1,2.5,3\n", "y ~ A + x");
  REQUIRE(d.covariates.count("x") == 1);
  CHECK(d.covariates.at("x")(2) == 2.5);
  CHECK(d.spec.parts.size() == 2);

  SchemaOverrides over;
  over.covariates = {"x"};
  CHECK_THROWS_AS(load("A,x,y\na1,u,1\na2,1,2\n", "y ~ A + x", over), InputError);
  CHECK_THROWS_AS(load("A,y\na1,1\na1,2\n", "y ~ A"), InputError);  // one level
  CHECK_THROWS_AS(load("A,y\na1,p\na2,2\n", "y ~ A"), ParseError);  // factor response
}
