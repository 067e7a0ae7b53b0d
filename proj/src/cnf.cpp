#include "cnf.hpp"

#include <cassert>
#include <cctype>
#include <charconv>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>

namespace encls {

void CnfFormula::add_clause(std::span<const Lit> lits) {
  assert(!lits.empty());
  uint32_t ci = static_cast<uint32_t>(num_clauses());
  for (Lit l : lits) {
    assert(l != 0);
    Var v = lit_var(l);
    assert(v <= num_vars_);
    lits_.push_back(l);
    auto& list = occ_[v];
    if (list.empty() || list.back().clause != ci) list.push_back({ci, 0, 0});
    if (l > 0)
      list.back().num_pos++;
    else
      list.back().num_neg++;
  }
  starts_.push_back(static_cast<uint32_t>(lits_.size()));
}

namespace {

// Tokenizer that tracks line numbers and skips `c` comment lines. A 'c'
// only opens a comment at the start of a line, so the 'cnf' keyword in
// the header is tokenized normally.
struct DimacsReader {
  std::istream& in;
  int line = 1;
  bool line_start = true;

  // Returns the next token, or empty at EOF. `tok_line` is set to the line
  // the token started on.
  std::string next(int& tok_line) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '\n') {
        line++;
        line_start = true;
        continue;
      }
      if (std::isspace(c)) continue;
      if (c == 'c' && line_start) {
        while ((c = in.get()) != EOF && c != '\n') {
        }
        if (c == '\n') line++;
        continue;
      }
      tok_line = line;
      line_start = false;
      tok.push_back(static_cast<char>(c));
      while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
      if (c == '\n') {
        line++;
        line_start = true;
      }
      return tok;
    }
    tok_line = line;
    return tok;
  }
};

long long parse_int(const std::string& tok, int line, const char* what) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw DimacsError(line, std::string("expected ") + what + ", got '" + tok + "'");
  return value;
}

}  // namespace

CnfFormula parse_dimacs(std::istream& in) {
  DimacsReader rd{in};
  int ln = 1;

  std::string tok = rd.next(ln);
  if (tok != "p") throw DimacsError(ln, "expected 'p cnf <vars> <clauses>' header");
  tok = rd.next(ln);
  if (tok != "cnf") throw DimacsError(ln, "malformed header: expected 'cnf'");
  tok = rd.next(ln);
  long long num_vars = parse_int(tok, ln, "variable count");
  tok = rd.next(ln);
  long long num_clauses = parse_int(tok, ln, "clause count");
  if (num_vars < 0 || num_clauses < 0) throw DimacsError(ln, "negative header counts");

  CnfFormula f;
  f.set_num_vars(static_cast<int>(num_vars));

  std::vector<Lit> clause;
  bool in_clause = false;
  int clause_line = ln;
  while (true) {
    tok = rd.next(ln);
    if (tok.empty()) break;
    long long lit = parse_int(tok, ln, "literal");
    if (lit == 0) {
      if (clause.empty())
        throw DimacsError(ln, "zero-length clause");
      if (f.num_clauses() == static_cast<size_t>(num_clauses))
        throw DimacsError(ln, "more clauses than the header declares");
      f.add_clause(clause);
      clause.clear();
      in_clause = false;
      continue;
    }
    if (lit > num_vars || lit < -num_vars)
      throw DimacsError(ln, "literal " + std::to_string(lit) + " exceeds declared " +
                                std::to_string(num_vars) + " variables");
    if (!in_clause) {
      in_clause = true;
      clause_line = ln;
    }
    clause.push_back(static_cast<Lit>(lit));
  }
  if (in_clause) throw DimacsError(clause_line, "unterminated clause at end of input");
  if (f.num_clauses() != static_cast<size_t>(num_clauses))
    throw DimacsError(ln, "clause count mismatch: header declares " +
                              std::to_string(num_clauses) + ", found " +
                              std::to_string(f.num_clauses()));
  return f;
}

CnfFormula parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_dimacs(in);
}

void write_dimacs(const CnfFormula& f, std::ostream& out) {
  out << "p cnf " << f.num_vars() << ' ' << f.num_clauses() << '\n';
  for (size_t i = 0; i < f.num_clauses(); ++i) {
    for (Lit l : f.clause(i)) out << l << ' ';
    out << "0\n";
  }
}

std::string write_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  write_dimacs(f, out);
  return out.str();
}

ClauseCounts count_unsat(const CnfFormula& f, const Assignment& a) {
  ClauseCounts counts;
  for (size_t i = 0; i < f.num_clauses(); ++i) {
    bool sat = false, open = false;
    for (Lit l : f.clause(i)) {
      if (a.satisfies(l)) {
        sat = true;
        break;
      }
      if (!a.is_assigned(lit_var(l))) open = true;
    }
    if (sat) continue;
    if (open)
      counts.undetermined++;
    else
      counts.unsat++;
  }
  return counts;
}

FlipScore conflict_score(const CnfFormula& f, const Assignment& a, Var v) {
  FlipScore fs;
  bool cur = a.value(v);
  for (const auto& occ : f.occurrences(v)) {
    auto cl = f.clause(occ.clause);
    // true literals not on v; v's own contribution before/after the flip
    int others = 0;
    for (Lit l : cl)
      if (lit_var(l) != v && a.satisfies(l)) others++;
    int v_now = cur ? occ.num_pos : occ.num_neg;
    int v_after = cur ? occ.num_neg : occ.num_pos;
    bool sat_now = others + v_now > 0;
    bool sat_after = others + v_after > 0;
    if (!sat_now && sat_after) fs.made++;
    if (sat_now && !sat_after) fs.broken++;
  }
  fs.score = fs.made - fs.broken;
  return fs;
}

PropagateResult unit_propagate(const CnfFormula& f, const Assignment& a) {
  PropagateResult res;
  res.assignment = a;
  if (res.assignment.size() < f.num_vars()) res.assignment.resize(f.num_vars());
  Assignment& cur = res.assignment;

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < f.num_clauses(); ++i) {
      bool sat = false;
      Lit unit = 0;  // the single distinct unassigned literal, if any
      int open = 0;  // distinct unassigned literals (duplicates count once)
      for (Lit l : f.clause(i)) {
        if (cur.satisfies(l)) {
          sat = true;
          break;
        }
        if (!cur.is_assigned(lit_var(l)) && l != unit) {
          // (x, -x) stays non-unit; (x, x) is a unit on x
          if (open == 0) unit = l;
          open++;
        }
      }
      if (sat || open > 1) continue;
      if (open == 0) {
        res.conflict = true;
        return res;
      }
      cur.set(lit_var(unit), lit_sign(unit));
      changed = true;
    }
  }
  return res;
}

Assignment complete_assignment(const CnfFormula& f, const Assignment& a,
                               bool default_value) {
  Assignment out = a;
  if (out.size() < f.num_vars()) out.resize(f.num_vars());
  for (Var v = 1; v <= f.num_vars(); ++v)
    if (!out.is_assigned(v)) out.set(v, default_value);
  return out;
}

}  // namespace encls
