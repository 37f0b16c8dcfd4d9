#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mflar {

// Identifier classes shared by the article language and TPTP output.
bool is_variable_name(std::string_view s);
bool is_symbol_name(std::string_view s);

// First-order term. Cheap to copy, immutable after construction.
class Term {
 public:
  enum class Kind { variable, constant, application };

  static Term variable(std::string name);
  static Term constant(std::string name);
  // Zero-argument applications collapse to constants.
  static Term application(std::string functor, std::vector<Term> args);

  Kind kind() const { return node_->kind; }
  bool is_variable() const { return node_->kind == Kind::variable; }
  const std::string& name() const { return node_->name; }
  const std::vector<Term>& args() const { return node_->args; }

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator<(const Term& a, const Term& b);

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::vector<Term> args;
  };
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

class Formula {
 public:
  enum class Kind {
    atom,
    equality,
    negation,
    conjunction,
    disjunction,
    implication,
    equivalence,
    universal,
    existential,
    verum
  };

  static Formula atom(std::string predicate, std::vector<Term> args = {});
  static Formula equality(Term lhs, Term rhs);
  static Formula negation(Formula f);
  // Lists must have at least two members.
  static Formula conjunction(std::vector<Formula> fs);
  static Formula disjunction(std::vector<Formula> fs);
  static Formula implication(Formula antecedent, Formula consequent);
  static Formula equivalence(Formula lhs, Formula rhs);
  static Formula universal(std::vector<std::string> vars, Formula body);
  static Formula existential(std::vector<std::string> vars, Formula body);
  static Formula verum();

  Kind kind() const { return node_->kind; }
  bool is(Kind k) const { return node_->kind == k; }
  bool is_quantifier() const { return is(Kind::universal) || is(Kind::existential); }
  bool is_binary() const;

  // Atom predicate name.
  const std::string& predicate() const { return node_->name; }
  // Atom arguments, or {lhs, rhs} for equality.
  const std::vector<Term>& terms() const { return node_->terms; }
  // Operands of connectives; single element for negation and quantifier bodies.
  const std::vector<Formula>& children() const { return node_->children; }
  const Formula& body() const { return node_->children.front(); }
  const std::vector<std::string>& vars() const { return node_->vars; }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    Kind kind;
    std::string name;
    std::vector<Term> terms;
    std::vector<Formula> children;
    std::vector<std::string> vars;
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Verum for an empty list, the element for a singleton, a conjunction otherwise.
Formula conjoin(std::vector<Formula> fs);

struct NamedFormula {
  std::string name;
  Formula formula;
};

// Symbol kinds tracked for arity consistency.
enum class SymbolKind { predicate, functor };

struct SymbolInfo {
  SymbolKind kind;
  std::size_t arity;
};

class ArityError : public std::runtime_error {
 public:
  ArityError(std::string symbol, const std::string& what)
      : std::runtime_error(what), symbol_(std::move(symbol)) {}
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

// Records the kind/arity of every symbol seen; rejects conflicting uses.
class SymbolTable {
 public:
  void record(const std::string& name, SymbolKind kind, std::size_t arity);
  void record_formula(const Formula& f);
  const SymbolInfo* find(const std::string& name) const;
  const std::map<std::string, SymbolInfo>& entries() const { return entries_; }

 private:
  std::map<std::string, SymbolInfo> entries_;
};

using Substitution = std::map<std::string, Term>;

std::set<std::string> free_variables(const Formula& f);
void collect_variables(const Term& t, std::set<std::string>& out);

// Non-logical symbols: predicates, functors and constants ("=" excluded).
std::set<std::string> symbols_of(const Formula& f);
std::set<std::string> predicates_of(const Formula& f);
std::set<std::string> functors_of(const Formula& f);

Term substitute(const Term& t, const Substitution& s);
// Capture-avoiding simultaneous substitution of free variables.
Formula substitute(const Formula& f, const Substitution& s);

// Flattens nested conjunctions/disjunctions of the same kind.
Formula flatten(const Formula& f);
// Structural equality up to bound-variable renaming.
bool alpha_equivalent(const Formula& a, const Formula& b);
// alpha_equivalent after flattening.
bool matches_structurally(const Formula& a, const Formula& b);

std::size_t formula_size(const Formula& f);

}  // namespace mflar
