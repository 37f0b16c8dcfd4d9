#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mflar/formula.hpp"

namespace mflar {

// Atom is an Atom or Equality formula.
struct Literal {
  bool positive;
  Formula atom;

  friend bool operator==(const Literal&, const Literal&) = default;
};

struct Clause {
  std::vector<Literal> literals;
  // Name of the input formula this clause came from; empty for built-in equality axioms.
  std::string origin;
};

struct ClausalForm {
  std::vector<Clause> clauses;
  bool has_equality = false;
};

inline constexpr std::string_view kSkolemFunctionPrefix = "skf_";
inline constexpr std::string_view kSkolemConstantPrefix = "skc_";

// CNF of axioms plus the negated conjecture. Skolem symbols are skf_<n>/skc_<n>;
// equality axioms (reflexivity, symmetry, transitivity, congruence) are appended
// whenever an equality literal occurs.
ClausalForm clausify(std::span<const NamedFormula> axioms,
                     const std::optional<NamedFormula>& conjecture);

ClausalForm clausify(const std::vector<Formula>& axioms, const Formula& conjecture);

std::string format_clause(const Clause& c);

}  // namespace mflar
