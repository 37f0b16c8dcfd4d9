#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mflar/formula.hpp"

namespace mflar::tptp {

enum class Role { axiom, conjecture };

std::string_view role_name(Role r);

std::string format_term(const Term& t);
// FOF formula text without the annotation wrapper.
std::string format_formula(const Formula& f);

// `fof(<name>, <role>, <formula>).` Throws OpenFormulaError listing free variables.
std::string serialize(const std::string& name, Role role, const Formula& f);

struct AnnotatedFormula {
  std::string name;
  std::string role;
  Formula formula;
};

// Reads the FOF subset this project emits (plus the usual connective variants).
// Comments are skipped; `include` directives are rejected.
std::vector<AnnotatedFormula> parse(std::string_view text);
Formula parse_formula(std::string_view text);

}  // namespace mflar::tptp
