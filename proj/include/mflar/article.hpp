#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mflar/formula.hpp"

namespace mflar {

struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

struct Reservation {
  std::string variable;
  std::string type;
};

struct FunctorDecl {
  std::string name;
  std::vector<std::string> params;
  std::string result_type;
  // k-index: 1-based declaration order.
  int ordinal = 0;
  SourcePos pos;
};

struct Proof;

// Where a `by` reference points.
enum class RefTarget { local_item, local_step, library };

struct Reference {
  std::string name;
  RefTarget target = RefTarget::library;
  // local_item: index into Article::items; local_step: step index within the item.
  std::size_t index = 0;
  SourcePos pos;
};

struct Justification {
  enum class Kind { by, proof };
  Kind kind = Kind::by;
  std::vector<Reference> refs;
  std::shared_ptr<const Proof> proof;
};

enum class StepKind { let, assume, aux, thus };

struct ProofStep {
  StepKind kind = StepKind::let;
  // 1-based textual order within the item, nested subproofs included.
  std::size_t index = 0;
  std::vector<std::string> vars;
  std::optional<std::string> label;
  std::optional<Formula> formula;
  std::optional<Justification> just;
  SourcePos pos;
};

struct Proof {
  std::vector<ProofStep> steps;
};

enum class ItemKind { definition, theorem };

struct Item {
  ItemKind kind = ItemKind::theorem;
  std::string label;
  // Per-kind ordinal: t1, t2, ... / d1, d2, ...
  int ordinal = 0;
  // 1-based position among all items.
  int position = 0;
  Formula formula = Formula::verum();
  std::optional<Proof> proof;
  SourcePos pos;
};

// Role of an identifier occurrence in the source text.
enum class TokenRole {
  article,
  variable,
  type,
  functor,
  predicate,
  label,
  reference,
};

std::string_view token_role_name(TokenRole r);

struct IdentToken {
  std::size_t offset = 0;
  std::size_t length = 0;
  SourcePos pos;
  std::string text;
  TokenRole role = TokenRole::variable;
  // Declaration site: binder/let/reserve token offset for variables, item index
  // for item labels, etc. Meaning depends on the role; see render.cpp.
  std::string anchor;
};

struct Article {
  std::string name;
  std::vector<Reservation> reservations;
  std::vector<FunctorDecl> functors;
  std::vector<Item> items;
  SymbolTable symbols;
  // Identifier occurrences of the parsed source; empty for synthesized articles.
  std::vector<IdentToken> identifiers;

  const std::string* reserved_type(const std::string& var) const;
  const FunctorDecl* functor(const std::string& name) const;
  const Item* item_by_label(const std::string& label) const;
};

// Throws SyntaxError (with line/column), ArityError, ReferenceError.
Article parse_article(std::string_view text);

// Parses one formula; free variables are permitted. New symbols are recorded in
// `symbols`, conflicting arities raise ArityError.
Formula parse_formula(std::string_view text, SymbolTable& symbols);

std::string print_formula(const Formula& f);
std::string pretty_print(const Article& a);

// Content equality: positions and identifier annotations are ignored.
bool structurally_equal(const Article& a, const Article& b);

// Library reference shape: t<N>_<article> / d<N>_<article>.
bool looks_like_library_ref(std::string_view name);

// Identifiers reserved for generated symbols.
bool is_reserved_symbol(std::string_view name);

std::size_t count_by_justifications(const Article& a);

}  // namespace mflar
