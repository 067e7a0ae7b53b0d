#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "encls.h"
#include "pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct FormulaHandle {
  encls_formula* f = nullptr;
  explicit FormulaHandle(const char* text)
      : f(encls_formula_parse_dimacs(text)) {}
  ~FormulaHandle() { encls_formula_free(f); }
};

struct Buffer {
  char* p = nullptr;
  ~Buffer() { encls_buffer_free(p); }
};

const char* kTriangleColoring =
    "p 3 3 u\n"
    "1 2\n"
    "2 3\n"
    "1 3\n";

}  // namespace

TEST_CASE("version string is stable") {
  CHECK(std::string(encls_version()) == "0.1.0");
}

TEST_CASE("formulas round trip through the C boundary") {
  FormulaHandle h("p cnf 3 2\n1 -2 0\n2 3 0\n");
  REQUIRE(h.f != nullptr);
  CHECK(encls_formula_num_vars(h.f) == 3);
  CHECK(encls_formula_num_clauses(h.f) == 2);

  Buffer out;
  REQUIRE(encls_formula_write_dimacs(h.f, &out.p) == ENCLS_OK);
  CHECK(std::string(out.p) == "p cnf 3 2\n1 -2 0\n2 3 0\n");
}

TEST_CASE("parse failures surface through encls_last_error") {
  encls_formula* f = encls_formula_parse_dimacs("p cnf junk\n");
  CHECK(f == nullptr);
  CHECK(std::string(encls_last_error()).size() > 0);

  CHECK(encls_formula_parse_dimacs(nullptr) == nullptr);
  CHECK(std::string(encls_last_error()) == "null text");

  CHECK(encls_formula_num_vars(nullptr) == 0);
  CHECK(encls_formula_num_clauses(nullptr) == 0);
  CHECK(encls_formula_write_dimacs(nullptr, nullptr) == ENCLS_ERR_CONFIG);
}

TEST_CASE("encls_encode produces DIMACS, a variable map, and the bound") {
  Buffer dimacs, varmap;
  long bound = -1;
  REQUIRE(encls_encode("coloring", kTriangleColoring, 3, &dimacs.p, &varmap.p,
                       &bound) == ENCLS_OK);
  CHECK(bound == 3);
  std::string d(dimacs.p);
  CHECK(d.rfind("p cnf 9 12", 0) == 0);
  json vm = json::parse(std::string(varmap.p));
  CHECK(vm.is_object());

  FormulaHandle h(dimacs.p);
  REQUIRE(h.f != nullptr);
  CHECK(encls_formula_num_vars(h.f) == 9);
  CHECK(encls_formula_num_clauses(h.f) == 12);
}

TEST_CASE("encls_encode falls back to the bound heuristic") {
  Buffer dimacs, varmap;
  long bound = -1;
  REQUIRE(encls_encode("coloring", kTriangleColoring, -1, &dimacs.p,
                       &varmap.p, &bound) == ENCLS_OK);
  CHECK(bound == 3);
}

TEST_CASE("encls_encode rejects bad schemes and bad instances") {
  Buffer dimacs, varmap;
  long bound = 0;
  CHECK(encls_encode("sudoku", kTriangleColoring, 3, &dimacs.p, &varmap.p,
                     &bound) == ENCLS_ERR_CONFIG);
  CHECK(std::string(encls_last_error()).find("sudoku") != std::string::npos);

  Buffer d2, v2;
  CHECK(encls_encode("coloring", "not a graph", 3, &d2.p, &v2.p, &bound) ==
        ENCLS_ERR_RUN);
  CHECK(d2.p == nullptr);
  CHECK(v2.p == nullptr);

  CHECK(encls_encode(nullptr, kTriangleColoring, 3, &d2.p, &v2.p, &bound) ==
        ENCLS_ERR_CONFIG);
}

TEST_CASE("encls_walksat fills a signed assignment") {
  FormulaHandle h("p cnf 2 2\n1 0\n-2 0\n");
  REQUIRE(h.f != nullptr);
  int assignment[2] = {0, 0};
  int found = 0;
  REQUIRE(encls_walksat(h.f, 5, 5.0, 0.5, assignment, &found) == ENCLS_OK);
  CHECK(found == 1);
  CHECK(assignment[0] == 1);
  CHECK(assignment[1] == -1);

  CHECK(encls_walksat(nullptr, 0, 1.0, 0.5, assignment, &found) ==
        ENCLS_ERR_CONFIG);
}

TEST_CASE("encls_walksat reports failure on an unsatisfiable formula") {
  FormulaHandle h("p cnf 1 2\n1 0\n-1 0\n");
  REQUIRE(h.f != nullptr);
  int assignment[1] = {0};
  int found = 7;
  REQUIRE(encls_walksat(h.f, 1, 0.2, 0.5, assignment, &found) == ENCLS_OK);
  CHECK(found == 0);
  CHECK((assignment[0] == 1 || assignment[0] == -1));
}

TEST_CASE("encls_mini_solve honors phases and reports status") {
  FormulaHandle h("p cnf 2 1\n1 2 0\n");
  REQUIRE(h.f != nullptr);

  int phases[2] = {1, -1};
  int status = -1;
  int model[2] = {0, 0};
  REQUIRE(encls_mini_solve(h.f, phases, 10.0, &status, model) == ENCLS_OK);
  CHECK(status == ENCLS_SAT);
  CHECK(model[0] == 1);
  CHECK(model[1] == -1);

  // NULL phases and NULL model are both allowed.
  REQUIRE(encls_mini_solve(h.f, nullptr, 10.0, &status, nullptr) == ENCLS_OK);
  CHECK(status == ENCLS_SAT);

  FormulaHandle u("p cnf 1 2\n1 0\n-1 0\n");
  REQUIRE(u.f != nullptr);
  REQUIRE(encls_mini_solve(u.f, nullptr, 10.0, &status, nullptr) == ENCLS_OK);
  CHECK(status == ENCLS_UNSAT);

  CHECK(encls_mini_solve(nullptr, nullptr, 1.0, &status, nullptr) ==
        ENCLS_ERR_CONFIG);
}

TEST_CASE("encls_run_verb encodes through a JSON config") {
  char tmpl[] = "/tmp/encls_capi_XXXXXX";
  REQUIRE(mkdtemp(tmpl) != nullptr);
  fs::path root = tmpl;
  fs::path inst = root / "tri.g";
  {
    std::ofstream o(inst);
    o << kTriangleColoring;
  }
  fs::path out = root / "enc";

  std::string cfg = R"({"scheme": "coloring"})";
  std::string inst_s = inst.string();
  std::string out_s = out.string();
  const char* args[] = {inst_s.c_str(), out_s.c_str(), "3"};

  CHECK(encls_run_verb("encode", cfg.c_str(), args, 3) == 0);
  CHECK(fs::exists(out / "formula.cnf"));
  CHECK(fs::exists(out / "varmap.json"));
  CHECK(fs::exists(out / "bundle.json"));

  // Bad bound text is a usage error.
  const char* bad_bound[] = {inst_s.c_str(), out_s.c_str(), "three"};
  CHECK(encls_run_verb("encode", cfg.c_str(), bad_bound, 3) == 2);

  // Missing args, stray args, unknown verbs, broken config: all exit 2.
  CHECK(encls_run_verb("encode", cfg.c_str(), args, 1) == 2);
  CHECK(encls_run_verb("split", cfg.c_str(), args, 3) == 2);
  CHECK(encls_run_verb("launder", cfg.c_str(), nullptr, 0) == 2);
  CHECK(encls_run_verb("encode", "{ nope", args, 3) == 2);
  CHECK(encls_run_verb(nullptr, cfg.c_str(), nullptr, 0) == 2);

  std::error_code ec;
  fs::remove_all(root, ec);
}

TEST_CASE("encls_request_stop raises the shared stop flag") {
  encls::pipeline_clear_stop();
  CHECK_FALSE(encls::pipeline_stop_requested());
  encls_request_stop();
  CHECK(encls::pipeline_stop_requested());
  encls::pipeline_clear_stop();
}
