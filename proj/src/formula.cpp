#include "mflar/formula.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace mflar {

namespace {

bool ident_tail(std::string_view s) {
  return std::all_of(s.begin() + 1, s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

}  // namespace

bool is_variable_name(std::string_view s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])) && ident_tail(s);
}

bool is_symbol_name(std::string_view s) {
  return !s.empty() && std::islower(static_cast<unsigned char>(s[0])) && ident_tail(s);
}

Term Term::variable(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::variable, std::move(name), {}}));
}

Term Term::constant(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::constant, std::move(name), {}}));
}

Term Term::application(std::string functor, std::vector<Term> args) {
  if (args.empty()) return constant(std::move(functor));
  return Term(std::make_shared<const Node>(
      Node{Kind::application, std::move(functor), std::move(args)}));
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  return a.kind() == b.kind() && a.name() == b.name() && a.args() == b.args();
}

bool operator<(const Term& a, const Term& b) {
  if (a.kind() != b.kind()) return a.kind() < b.kind();
  if (a.name() != b.name()) return a.name() < b.name();
  return std::lexicographical_compare(a.args().begin(), a.args().end(), b.args().begin(),
                                      b.args().end());
}

Formula Formula::atom(std::string predicate, std::vector<Term> args) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::atom, std::move(predicate), std::move(args), {}, {}}));
}

Formula Formula::equality(Term lhs, Term rhs) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::equality, "=", {std::move(lhs), std::move(rhs)}, {}, {}}));
}

Formula Formula::negation(Formula f) {
  return Formula(std::make_shared<const Node>(Node{Kind::negation, {}, {}, {std::move(f)}, {}}));
}

Formula Formula::conjunction(std::vector<Formula> fs) {
  if (fs.size() < 2) throw std::invalid_argument("conjunction needs at least two operands");
  return Formula(std::make_shared<const Node>(Node{Kind::conjunction, {}, {}, std::move(fs), {}}));
}

Formula Formula::disjunction(std::vector<Formula> fs) {
  if (fs.size() < 2) throw std::invalid_argument("disjunction needs at least two operands");
  return Formula(std::make_shared<const Node>(Node{Kind::disjunction, {}, {}, std::move(fs), {}}));
}

Formula Formula::implication(Formula antecedent, Formula consequent) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::implication, {}, {}, {std::move(antecedent), std::move(consequent)}, {}}));
}

Formula Formula::equivalence(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const Node>(
      Node{Kind::equivalence, {}, {}, {std::move(lhs), std::move(rhs)}, {}}));
}

Formula Formula::universal(std::vector<std::string> vars, Formula body) {
  if (vars.empty()) throw std::invalid_argument("quantifier without variables");
  return Formula(std::make_shared<const Node>(
      Node{Kind::universal, {}, {}, {std::move(body)}, std::move(vars)}));
}

Formula Formula::existential(std::vector<std::string> vars, Formula body) {
  if (vars.empty()) throw std::invalid_argument("quantifier without variables");
  return Formula(std::make_shared<const Node>(
      Node{Kind::existential, {}, {}, {std::move(body)}, std::move(vars)}));
}

Formula Formula::verum() {
  static const Formula v(std::make_shared<const Node>(Node{Kind::verum, {}, {}, {}, {}}));
  return v;
}

bool Formula::is_binary() const {
  switch (kind()) {
    case Kind::conjunction:
    case Kind::disjunction:
    case Kind::implication:
    case Kind::equivalence:
      return true;
    default:
      return false;
  }
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  return a.kind() == b.kind() && a.node_->name == b.node_->name && a.terms() == b.terms() &&
         a.vars() == b.vars() && a.children() == b.children();
}

Formula conjoin(std::vector<Formula> fs) {
  if (fs.empty()) return Formula::verum();
  if (fs.size() == 1) return fs.front();
  return Formula::conjunction(std::move(fs));
}

void SymbolTable::record(const std::string& name, SymbolKind kind, std::size_t arity) {
  auto [it, inserted] = entries_.emplace(name, SymbolInfo{kind, arity});
  if (inserted) return;
  if (it->second.kind != kind) {
    throw ArityError(name, "symbol '" + name + "' used both as predicate and functor");
  }
  if (it->second.arity != arity) {
    throw ArityError(name, "symbol '" + name + "' used with arity " + std::to_string(arity) +
                               " but previously with arity " +
                               std::to_string(it->second.arity));
  }
}

namespace {

void record_term(SymbolTable& table, const Term& t) {
  if (t.is_variable()) return;
  table.record(t.name(), SymbolKind::functor, t.args().size());
  for (const auto& a : t.args()) record_term(table, a);
}

}  // namespace

void SymbolTable::record_formula(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::atom:
      record(f.predicate(), SymbolKind::predicate, f.terms().size());
      [[fallthrough]];
    case Formula::Kind::equality:
      for (const auto& t : f.terms()) record_term(*this, t);
      return;
    default:
      for (const auto& c : f.children()) record_formula(c);
  }
}

const SymbolInfo* SymbolTable::find(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

void collect_variables(const Term& t, std::set<std::string>& out) {
  if (t.is_variable()) {
    out.insert(t.name());
    return;
  }
  for (const auto& a : t.args()) collect_variables(a, out);
}

namespace {

void free_vars_rec(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind()) {
    case Formula::Kind::atom:
    case Formula::Kind::equality: {
      std::set<std::string> vs;
      for (const auto& t : f.terms()) collect_variables(t, vs);
      for (const auto& v : vs)
        if (!bound.contains(v)) out.insert(v);
      return;
    }
    case Formula::Kind::universal:
    case Formula::Kind::existential: {
      std::vector<std::string> added;
      for (const auto& v : f.vars())
        if (bound.insert(v).second) added.push_back(v);
      free_vars_rec(f.body(), bound, out);
      for (const auto& v : added) bound.erase(v);
      return;
    }
    default:
      for (const auto& c : f.children()) free_vars_rec(c, bound, out);
  }
}

void term_symbols(const Term& t, std::set<std::string>& out) {
  if (t.is_variable()) return;
  out.insert(t.name());
  for (const auto& a : t.args()) term_symbols(a, out);
}

void walk_atoms(const Formula& f, const std::function<void(const Formula&)>& fn) {
  if (f.is(Formula::Kind::atom) || f.is(Formula::Kind::equality)) {
    fn(f);
    return;
  }
  for (const auto& c : f.children()) walk_atoms(c, fn);
}

}  // namespace

std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> bound, out;
  free_vars_rec(f, bound, out);
  return out;
}

std::set<std::string> predicates_of(const Formula& f) {
  std::set<std::string> out;
  walk_atoms(f, [&](const Formula& a) {
    if (a.is(Formula::Kind::atom)) out.insert(a.predicate());
  });
  return out;
}

std::set<std::string> functors_of(const Formula& f) {
  std::set<std::string> out;
  walk_atoms(f, [&](const Formula& a) {
    for (const auto& t : a.terms()) term_symbols(t, out);
  });
  return out;
}

std::set<std::string> symbols_of(const Formula& f) {
  auto out = predicates_of(f);
  out.merge(functors_of(f));
  return out;
}

Term substitute(const Term& t, const Substitution& s) {
  if (t.is_variable()) {
    auto it = s.find(t.name());
    return it == s.end() ? t : it->second;
  }
  if (t.args().empty()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(substitute(a, s));
  return Term::application(t.name(), std::move(args));
}

namespace {

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  // Primes are not legal in identifiers; renamed binders get a numeric suffix.
  for (int i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!avoid.contains(candidate)) return candidate;
  }
}

Formula subst_rec(const Formula& f, const Substitution& s) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::verum:
      return f;
    case K::atom: {
      std::vector<Term> args;
      for (const auto& t : f.terms()) args.push_back(substitute(t, s));
      return Formula::atom(f.predicate(), std::move(args));
    }
    case K::equality:
      return Formula::equality(substitute(f.terms()[0], s), substitute(f.terms()[1], s));
    case K::negation:
      return Formula::negation(subst_rec(f.body(), s));
    case K::conjunction:
    case K::disjunction: {
      std::vector<Formula> cs;
      for (const auto& c : f.children()) cs.push_back(subst_rec(c, s));
      return f.is(K::conjunction) ? Formula::conjunction(std::move(cs))
                                  : Formula::disjunction(std::move(cs));
    }
    case K::implication:
      return Formula::implication(subst_rec(f.children()[0], s), subst_rec(f.children()[1], s));
    case K::equivalence:
      return Formula::equivalence(subst_rec(f.children()[0], s), subst_rec(f.children()[1], s));
    case K::universal:
    case K::existential: {
      Substitution inner;
      auto body_free = free_variables(f.body());
      for (const auto& [v, t] : s) {
        if (std::find(f.vars().begin(), f.vars().end(), v) != f.vars().end()) continue;
        if (body_free.contains(v)) inner.emplace(v, t);
      }
      // Variables introduced by the substitution that this binder would capture.
      std::set<std::string> incoming;
      for (const auto& [v, t] : inner) collect_variables(t, incoming);
      std::vector<std::string> vars = f.vars();
      if (!inner.empty()) {
        std::set<std::string> avoid = incoming;
        avoid.insert(body_free.begin(), body_free.end());
        for (const auto& v : vars) avoid.insert(v);
        for (auto& v : vars) {
          if (!incoming.contains(v)) continue;
          std::string renamed = fresh_name(v, avoid);
          avoid.insert(renamed);
          inner.insert_or_assign(v, Term::variable(renamed));
          v = renamed;
        }
      }
      Formula body = inner.empty() ? f.body() : subst_rec(f.body(), inner);
      return f.is(K::universal) ? Formula::universal(std::move(vars), std::move(body))
                                : Formula::existential(std::move(vars), std::move(body));
    }
  }
  return f;
}

}  // namespace

Formula substitute(const Formula& f, const Substitution& s) {
  if (s.empty()) return f;
  return subst_rec(f, s);
}

Formula flatten(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::conjunction:
    case K::disjunction: {
      std::vector<Formula> out;
      for (const auto& c : f.children()) {
        Formula fc = flatten(c);
        if (fc.kind() == f.kind()) {
          out.insert(out.end(), fc.children().begin(), fc.children().end());
        } else {
          out.push_back(fc);
        }
      }
      return f.is(K::conjunction) ? Formula::conjunction(std::move(out))
                                  : Formula::disjunction(std::move(out));
    }
    case K::negation:
      return Formula::negation(flatten(f.body()));
    case K::implication:
      return Formula::implication(flatten(f.children()[0]), flatten(f.children()[1]));
    case K::equivalence:
      return Formula::equivalence(flatten(f.children()[0]), flatten(f.children()[1]));
    case K::universal:
      return Formula::universal(f.vars(), flatten(f.body()));
    case K::existential:
      return Formula::existential(f.vars(), flatten(f.body()));
    default:
      return f;
  }
}

namespace {

using BinderMap = std::map<std::string, std::vector<int>>;

struct AlphaCtx {
  BinderMap left, right;
  int depth = 0;
};

int binder_of(const BinderMap& m, const std::string& v) {
  auto it = m.find(v);
  return (it == m.end() || it->second.empty()) ? -1 : it->second.back();
}

bool alpha_term(const Term& a, const Term& b, const AlphaCtx& ctx) {
  if (a.kind() != b.kind()) return false;
  if (a.is_variable()) {
    int ba = binder_of(ctx.left, a.name());
    int bb = binder_of(ctx.right, b.name());
    if (ba != bb) return false;
    return ba >= 0 || a.name() == b.name();
  }
  if (a.name() != b.name() || a.args().size() != b.args().size()) return false;
  for (std::size_t i = 0; i < a.args().size(); ++i)
    if (!alpha_term(a.args()[i], b.args()[i], ctx)) return false;
  return true;
}

bool alpha_rec(const Formula& a, const Formula& b, AlphaCtx& ctx) {
  using K = Formula::Kind;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case K::verum:
      return true;
    case K::atom:
    case K::equality:
      if (a.predicate() != b.predicate() || a.terms().size() != b.terms().size()) return false;
      for (std::size_t i = 0; i < a.terms().size(); ++i)
        if (!alpha_term(a.terms()[i], b.terms()[i], ctx)) return false;
      return true;
    case K::universal:
    case K::existential: {
      if (a.vars().size() != b.vars().size()) return false;
      for (std::size_t i = 0; i < a.vars().size(); ++i) {
        int id = ctx.depth++;
        ctx.left[a.vars()[i]].push_back(id);
        ctx.right[b.vars()[i]].push_back(id);
      }
      bool ok = alpha_rec(a.body(), b.body(), ctx);
      for (std::size_t i = 0; i < a.vars().size(); ++i) {
        ctx.left[a.vars()[i]].pop_back();
        ctx.right[b.vars()[i]].pop_back();
      }
      return ok;
    }
    default:
      if (a.children().size() != b.children().size()) return false;
      for (std::size_t i = 0; i < a.children().size(); ++i)
        if (!alpha_rec(a.children()[i], b.children()[i], ctx)) return false;
      return true;
  }
}

}  // namespace

bool alpha_equivalent(const Formula& a, const Formula& b) {
  AlphaCtx ctx;
  return alpha_rec(a, b, ctx);
}

bool matches_structurally(const Formula& a, const Formula& b) {
  return alpha_equivalent(flatten(a), flatten(b));
}

namespace {
std::size_t term_size(const Term& t) {
  std::size_t n = 1;
  for (const auto& a : t.args()) n += term_size(a);
  return n;
}
}  // namespace

std::size_t formula_size(const Formula& f) {
  std::size_t n = 1;
  for (const auto& t : f.terms()) n += term_size(t);
  for (const auto& c : f.children()) n += formula_size(c);
  return n;
}

}  // namespace mflar
