#pragma once

// Restricted 3-CNF formulas: every clause has exactly three literals over
// three distinct variables. DIMACS parsing is strict — malformed clauses are
// rejected, never normalized.

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cfxlab/bits.hpp"
#include "cfxlab/rational.hpp"

namespace cfx {

// One literal: variable index (0-based) plus polarity.
struct Lit {
  uint32_t var = 0;
  bool neg = false;

  bool operator==(const Lit&) const = default;
};

struct Clause {
  std::array<Lit, 3> lits;

  bool operator==(const Clause&) const = default;
};

struct CnfFormula {
  uint32_t num_vars = 0;
  std::vector<Clause> clauses;

  bool operator==(const CnfFormula&) const = default;
};

// Total truth assignment over the formula's variables.
struct Assignment {
  std::vector<uint8_t> values;  // values[i] = truth of variable i

  size_t num_vars() const { return values.size(); }
  bool operator==(const Assignment&) const = default;

  std::string to_string() const {
    std::string s;
    for (size_t i = 0; i < values.size(); ++i) {
      if (i) s += ' ';
      s += 'x' + std::to_string(i + 1) + '=' + (values[i] ? '1' : '0');
    }
    return s;
  }
};

inline bool satisfies(const Assignment& a, const Clause& c) {
  for (const Lit& l : c.lits) {
    if (l.var >= a.values.size()) throw DimensionMismatch("literal beyond assignment");
    if (a.values[l.var] != static_cast<uint8_t>(l.neg)) return true;  // literal is true
  }
  return false;
}

inline bool satisfies(const Assignment& a, const CnfFormula& f) {
  for (const Clause& c : f.clauses)
    if (!satisfies(a, c)) return false;
  return true;
}

// ===========================================================================
// DIMACS
// ===========================================================================

// Standard DIMACS CNF: optional 'c' comment lines, one 'p cnf <vars>
// <clauses>' header, then 0-terminated clauses. Each clause must contain
// exactly three literals over three distinct variables.
inline CnfFormula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CnfFormula f;
  bool header_seen = false;
  size_t declared_clauses = 0;
  std::vector<int64_t> pending;
  size_t line_no = 0;

  auto fail = [&](const std::string& msg) {
    throw ParseError("dimacs line " + std::to_string(line_no) + ": " + msg);
  };

  auto flush_clause = [&]() {
    if (pending.size() != 3) {
      if (pending.size() < 3)
        fail("clause has fewer than three literals");
      else
        fail("clause has more than three literals");
    }
    Clause c;
    for (size_t i = 0; i < 3; ++i) {
      int64_t l = pending[i];
      uint32_t v = static_cast<uint32_t>(l < 0 ? -l : l) - 1;
      if (v >= f.num_vars) fail("literal references variable beyond header count");
      c.lits[i] = {v, l < 0};
    }
    for (size_t i = 0; i < 3; ++i)
      for (size_t j = i + 1; j < 3; ++j)
        if (c.lits[i].var == c.lits[j].var) fail("duplicate variable in clause");
    f.clauses.push_back(c);
    pending.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    if (tok == "c" || tok[0] == 'c') continue;
    if (tok == "p") {
      if (header_seen) fail("duplicate header");
      std::string fmt;
      int64_t nv = -1, nc = -1;
      if (!(ls >> fmt >> nv >> nc) || fmt != "cnf" || nv <= 0 || nc < 0)
        fail("malformed header (expected 'p cnf <vars> <clauses>')");
      f.num_vars = static_cast<uint32_t>(nv);
      declared_clauses = static_cast<size_t>(nc);
      header_seen = true;
      continue;
    }
    if (!header_seen) fail("clause before header");
    // Tokens on this line are literals; the first token was already read.
    do {
      int64_t l = 0;
      try {
        size_t pos = 0;
        l = std::stoll(tok, &pos);
        if (pos != tok.size()) fail("bad literal token '" + tok + "'");
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception&) {
        fail("bad literal token '" + tok + "'");
      }
      if (l == 0)
        flush_clause();
      else
        pending.push_back(l);
    } while (ls >> tok);
  }
  if (!header_seen) throw ParseError("dimacs: missing 'p cnf' header");
  if (!pending.empty()) throw ParseError("dimacs: unterminated clause at end of input");
  if (f.clauses.empty()) throw ParseError("dimacs: formula has no clauses");
  if (declared_clauses != f.clauses.size())
    throw ParseError("dimacs: header declares " + std::to_string(declared_clauses) +
                     " clauses but " + std::to_string(f.clauses.size()) + " were given");
  return f;
}

inline std::string to_dimacs(const CnfFormula& f) {
  std::string out = "p cnf " + std::to_string(f.num_vars) + " " + std::to_string(f.clauses.size()) + "\n";
  for (const Clause& c : f.clauses) {
    for (const Lit& l : c.lits)
      out += (l.neg ? "-" : "") + std::to_string(l.var + 1) + " ";
    out += "0\n";
  }
  return out;
}

// ===========================================================================
// reference SAT check (exhaustive; cross-validation only)
// ===========================================================================

// Returns the first satisfying assignment in counting order (variable 0 as
// the least significant bit), or nothing if unsatisfiable.
inline std::optional<Assignment> brute_force_sat(const CnfFormula& f, uint32_t max_vars = 26) {
  if (f.num_vars > max_vars)
    throw std::runtime_error("brute-force SAT limited to " + std::to_string(max_vars) +
                             " variables");
  Assignment a;
  a.values.assign(f.num_vars, 0);
  uint64_t total = uint64_t(1) << f.num_vars;
  for (uint64_t code = 0; code < total; ++code) {
    for (uint32_t i = 0; i < f.num_vars; ++i) a.values[i] = (code >> i) & 1u;
    if (satisfies(a, f)) return a;
  }
  return std::nullopt;
}

}  // namespace cfx
