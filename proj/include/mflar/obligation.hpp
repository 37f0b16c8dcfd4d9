#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mflar/article.hpp"
#include "mflar/formula.hpp"

namespace mflar {

// A constant introduced by `let`, standing for a variable of the given type.
struct ScopeConstant {
  std::string name;
  std::string type;
  std::string variable;
};

struct ResolvedRef {
  // As written after `by`.
  std::string cited;
  // Name in the generated problem.
  std::string name;
  RefTarget target = RefTarget::library;
  // Local propositions carry their formula (scope constants substituted).
  std::optional<Formula> formula;
};

struct Obligation {
  // e<K>_<item>__<article>
  std::string id;
  std::string article;
  std::string item_label;
  int item_position = 0;
  std::size_t step_index = 0;
  int e_ordinal = 0;
  // The step's formula with let variables replaced by scope constants.
  Formula conjecture = Formula::verum();
  std::vector<ResolvedRef> refs;
  std::vector<ScopeConstant> scope;
  std::map<std::string, std::string> reservations;
};

}  // namespace mflar
