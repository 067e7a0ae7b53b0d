#include <doctest.h>

#include <sstream>

#include "cnf.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace encls;

TEST_CASE("parse_dimacs handles the empty formula") {
  CnfFormula f = parse_dimacs("p cnf 0 0\n");
  CHECK(f.num_vars() == 0);
  CHECK(f.num_clauses() == 0);
}

TEST_CASE("parse_dimacs reads clauses, comments, and blank lines") {
  CnfFormula f = parse_dimacs("c a comment\n\np cnf 2 2\n1 2 0\n-1 2 0\n");
  CHECK(f.num_vars() == 2);
  REQUIRE(f.num_clauses() == 2);
  CHECK(f.clause(0)[0] == 1);
  CHECK(f.clause(0)[1] == 2);
  CHECK(f.clause(1)[0] == -1);
  CHECK(f.clause(1)[1] == 2);
}

TEST_CASE("parse_dimacs accepts clauses split across lines") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n1\n-2 3\n0\n");
  REQUIRE(f.num_clauses() == 1);
  CHECK(f.clause(0).size() == 3);
}

TEST_CASE("parse_dimacs rejects malformed input with the offending line") {
  CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), DimacsError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 3 0\n"), DimacsError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 x 0\n"), DimacsError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 2\n1 0\n"), DimacsError);
  try {
    parse_dimacs("p cnf 2 1\n1 3 0\n");
    FAIL("expected DimacsError");
  } catch (const DimacsError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("write_dimacs of the empty formula") {
  CHECK(write_dimacs(CnfFormula()) == "p cnf 0 0\n");
}

TEST_CASE("write_dimacs of a one-clause formula") {
  CnfFormula f(2);
  f.add_clause({1, 2});
  CHECK(write_dimacs(f) == "p cnf 2 1\n1 2 0\n");
}

TEST_CASE("formulas round-trip through DIMACS text") {
  Rng rng(42);
  for (int i = 0; i < 200; ++i) {
    CnfFormula f = oracle::random_formula(rng, 12, 20);
    CnfFormula back = parse_dimacs(write_dimacs(f));
    CHECK(back == f);
  }
}

TEST_CASE("count_unsat under a total assignment") {
  CnfFormula f(2);
  f.add_clause({1, 2});
  f.add_clause({-1, 2});
  f.add_clause({-2});
  Assignment a(2);
  a.set(1, false);
  a.set(2, false);
  ClauseCounts c = count_unsat(f, a);
  CHECK(c.unsat == 1);
  CHECK(c.undetermined == 0);
}

TEST_CASE("count_unsat marks clauses with unassigned literals undetermined") {
  CnfFormula f(2);
  f.add_clause({1, 2});
  f.add_clause({-1});
  Assignment a(2);
  a.set(1, true);
  ClauseCounts c = count_unsat(f, a);
  CHECK(c.unsat == 1);
  CHECK(c.undetermined == 0);
  a.unset(1);
  c = count_unsat(f, a);
  CHECK(c.unsat == 0);
  CHECK(c.undetermined == 2);
}

TEST_CASE("conflict_score counts made and broken clauses") {
  CnfFormula f(2);
  f.add_clause({1, 2});
  f.add_clause({-1, 2});
  f.add_clause({-2});
  Assignment a(2);
  a.set(1, false);
  a.set(2, false);
  FlipScore s = conflict_score(f, a, 2);
  CHECK(s.made == 1);
  CHECK(s.broken == 1);
  CHECK(s.score == 0);
}

TEST_CASE("conflict_score of a variable with no occurrences is zero") {
  CnfFormula f(3);
  f.add_clause({1, 2});
  Assignment a(3);
  a.set(1, true);
  a.set(2, false);
  a.set(3, false);
  FlipScore s = conflict_score(f, a, 3);
  CHECK(s.made == 0);
  CHECK(s.broken == 0);
  CHECK(s.score == 0);
}

TEST_CASE("conflict_score matches the brute-force unsat difference") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    CnfFormula f = oracle::random_formula(rng, 12, 30);
    Assignment a = oracle::random_total_assignment(rng, f.num_vars());
    Var v = 1 + static_cast<int>(rng.next_below(f.num_vars()));
    int before = oracle::count_unsat(f, a);
    FlipScore s = conflict_score(f, a, v);
    Assignment flipped = a;
    flipped.set(v, !a.value(v));
    int after = oracle::count_unsat(f, flipped);
    CHECK(after == before - s.score);
    CHECK(s.score == s.made - s.broken);
  }
}

TEST_CASE("unit_propagate extends over unit clauses") {
  CnfFormula f(1);
  f.add_clause({1});
  PropagateResult r = unit_propagate(f, Assignment(1));
  CHECK_FALSE(r.conflict);
  REQUIRE(r.assignment.is_assigned(1));
  CHECK(r.assignment.value(1));
}

TEST_CASE("unit_propagate reports conflicts") {
  CnfFormula f(1);
  f.add_clause({1});
  f.add_clause({-1});
  PropagateResult r = unit_propagate(f, Assignment(1));
  CHECK(r.conflict);
}

TEST_CASE("unit_propagate chains implications") {
  CnfFormula f(3);
  f.add_clause({-1, 2});
  f.add_clause({-2, 3});
  Assignment a(3);
  a.set(1, true);
  PropagateResult r = unit_propagate(f, a);
  CHECK_FALSE(r.conflict);
  CHECK(r.assignment.value(1));
  CHECK(r.assignment.value(2));
  CHECK(r.assignment.value(3));
}

TEST_CASE("unit_propagate leaves non-unit clauses alone") {
  CnfFormula f(2);
  f.add_clause({1, 2});
  PropagateResult r = unit_propagate(f, Assignment(2));
  CHECK_FALSE(r.conflict);
  CHECK(r.assignment.assigned_count() == 0);
}

TEST_CASE("complete_assignment fills unassigned variables with the default") {
  CnfFormula f(3);
  f.add_clause({1, 2, 3});
  Assignment a(3);
  a.set(2, false);
  Assignment t = complete_assignment(f, a, true);
  CHECK(t.is_total());
  CHECK(t.value(1));
  CHECK_FALSE(t.value(2));
  CHECK(t.value(3));
  Assignment fa = complete_assignment(f, a, false);
  CHECK(fa.is_total());
  CHECK_FALSE(fa.value(1));
}

TEST_CASE("complete_assignment widens a short assignment") {
  CnfFormula f(4);
  f.add_clause({4});
  Assignment a(2);
  a.set(1, true);
  Assignment t = complete_assignment(f, a, false);
  CHECK(t.size() == 4);
  CHECK(t.is_total());
  CHECK(t.value(1));
  CHECK_FALSE(t.value(4));
}

TEST_CASE("occurrence lists track polarity counts") {
  CnfFormula f(2);
  f.add_clause({1, -1, 2});
  f.add_clause({-2, 1});
  auto occ1 = f.occurrences(1);
  REQUIRE(occ1.size() == 2);
  CHECK(occ1[0].num_pos == 1);
  CHECK(occ1[0].num_neg == 1);
  CHECK(occ1[1].num_pos == 1);
  CHECK(occ1[1].num_neg == 0);
}
