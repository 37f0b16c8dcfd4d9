#include "mflar/clausify.hpp"

#include <map>
#include <set>

#include "mflar/tptp.hpp"

namespace mflar {

namespace {

using K = Formula::Kind;

struct Nnf {
  enum class Kind { literal, conj, disj, forall, exists, top, bottom };
  Kind kind;
  Literal lit{true, Formula::verum()};
  std::vector<Nnf> children;
  std::vector<std::string> vars;
};

Nnf make(Nnf::Kind k, std::vector<Nnf> cs = {}, std::vector<std::string> vars = {}) {
  Nnf n;
  n.kind = k;
  n.children = std::move(cs);
  n.vars = std::move(vars);
  return n;
}

Nnf nnf(const Formula& f, bool positive) {
  switch (f.kind()) {
    case K::verum:
      return make(positive ? Nnf::Kind::top : Nnf::Kind::bottom);
    case K::atom:
    case K::equality: {
      Nnf n;
      n.kind = Nnf::Kind::literal;
      n.lit = Literal{positive, f};
      return n;
    }
    case K::negation:
      return nnf(f.body(), !positive);
    case K::conjunction:
    case K::disjunction: {
      std::vector<Nnf> cs;
      for (const auto& c : f.children()) cs.push_back(nnf(c, positive));
      bool is_and = f.is(K::conjunction) == positive;
      return make(is_and ? Nnf::Kind::conj : Nnf::Kind::disj, std::move(cs));
    }
    case K::implication: {
      const auto& a = f.children()[0];
      const auto& c = f.children()[1];
      if (positive) return make(Nnf::Kind::disj, {nnf(a, false), nnf(c, true)});
      return make(Nnf::Kind::conj, {nnf(a, true), nnf(c, false)});
    }
    case K::equivalence: {
      const auto& a = f.children()[0];
      const auto& b = f.children()[1];
      if (positive) {
        return make(Nnf::Kind::conj, {make(Nnf::Kind::disj, {nnf(a, false), nnf(b, true)}),
                                      make(Nnf::Kind::disj, {nnf(a, true), nnf(b, false)})});
      }
      return make(Nnf::Kind::disj, {make(Nnf::Kind::conj, {nnf(a, true), nnf(b, false)}),
                                    make(Nnf::Kind::conj, {nnf(a, false), nnf(b, true)})});
    }
    case K::universal:
    case K::existential: {
      bool is_forall = f.is(K::universal) == positive;
      return make(is_forall ? Nnf::Kind::forall : Nnf::Kind::exists, {nnf(f.body(), positive)},
                  f.vars());
    }
  }
  return make(Nnf::Kind::top);
}

void nnf_free_vars(const Nnf& n, std::set<std::string>& bound, std::set<std::string>& out) {
  if (n.kind == Nnf::Kind::literal) {
    std::set<std::string> vs;
    for (const auto& t : n.lit.atom.terms()) collect_variables(t, vs);
    for (const auto& v : vs)
      if (!bound.contains(v)) out.insert(v);
    return;
  }
  std::vector<std::string> added;
  for (const auto& v : n.vars)
    if (bound.insert(v).second) added.push_back(v);
  for (const auto& c : n.children) nnf_free_vars(c, bound, out);
  for (const auto& v : added) bound.erase(v);
}

class Skolemizer {
 public:
  // Renames universal variables apart and replaces existentials by Skolem terms;
  // quantifiers disappear from the result.
  Nnf run(const Nnf& n, const Substitution& env) {
    switch (n.kind) {
      case Nnf::Kind::literal: {
        Nnf out = n;
        out.lit.atom = substitute(n.lit.atom, env);
        return out;
      }
      case Nnf::Kind::forall: {
        Substitution inner = env;
        for (const auto& v : n.vars)
          inner.insert_or_assign(v, Term::variable("V" + std::to_string(++var_counter_)));
        return run(n.children.front(), inner);
      }
      case Nnf::Kind::exists: {
        // Skolem arguments: the free variables of the quantified subformula, after renaming.
        std::set<std::string> bound, free;
        nnf_free_vars(n, bound, free);
        std::set<std::string> args_set;
        for (const auto& v : free) {
          auto it = env.find(v);
          if (it != env.end()) collect_variables(it->second, args_set);
        }
        std::vector<Term> args;
        for (const auto& a : args_set) args.push_back(Term::variable(a));
        Substitution inner = env;
        for (const auto& v : n.vars) {
          ++skolem_counter_;
          Term sk = args.empty()
                        ? Term::constant(std::string(kSkolemConstantPrefix) +
                                         std::to_string(skolem_counter_))
                        : Term::application(std::string(kSkolemFunctionPrefix) +
                                                std::to_string(skolem_counter_),
                                            args);
          inner.insert_or_assign(v, sk);
        }
        return run(n.children.front(), inner);
      }
      default: {
        Nnf out = make(n.kind);
        for (const auto& c : n.children) out.children.push_back(run(c, env));
        return out;
      }
    }
  }

 private:
  int var_counter_ = 0;
  int skolem_counter_ = 0;
};

using ClauseLits = std::vector<Literal>;

// No clauses means "true"; "false" is a single empty clause.
std::vector<ClauseLits> to_cnf(const Nnf& n) {
  switch (n.kind) {
    case Nnf::Kind::top:
      return {};
    case Nnf::Kind::bottom:
      return {ClauseLits{}};
    case Nnf::Kind::literal:
      return {ClauseLits{n.lit}};
    case Nnf::Kind::conj: {
      std::vector<ClauseLits> out;
      for (const auto& c : n.children) {
        auto cs = to_cnf(c);
        out.insert(out.end(), cs.begin(), cs.end());
      }
      return out;
    }
    case Nnf::Kind::disj: {
      std::vector<ClauseLits> acc{ClauseLits{}};
      for (const auto& c : n.children) {
        auto cs = to_cnf(c);
        std::vector<ClauseLits> next;
        for (const auto& a : acc) {
          for (const auto& b : cs) {
            ClauseLits merged = a;
            merged.insert(merged.end(), b.begin(), b.end());
            next.push_back(std::move(merged));
          }
        }
        acc = std::move(next);
        if (acc.empty()) break;  // a true disjunct
      }
      return acc;
    }
    default:
      return {};
  }
}

struct Signature {
  std::map<std::string, std::size_t> predicates;
  std::map<std::string, std::size_t> functors;
};

void sig_term(const Term& t, Signature& s) {
  if (t.is_variable()) return;
  s.functors.emplace(t.name(), t.args().size());
  for (const auto& a : t.args()) sig_term(a, s);
}

std::vector<Clause> equality_axioms(const Signature& sig) {
  auto X = Term::variable("X"), Y = Term::variable("Y"), Z = Term::variable("Z");
  auto eq = [](const Term& a, const Term& b) { return Formula::equality(a, b); };
  std::vector<Clause> out;
  out.push_back({{{true, eq(X, X)}}, ""});
  out.push_back({{{false, eq(X, Y)}, {true, eq(Y, X)}}, ""});
  out.push_back({{{false, eq(X, Y)}, {false, eq(Y, Z)}, {true, eq(X, Z)}}, ""});
  auto args_with = [](std::size_t arity, std::size_t pos, const Term& at) {
    std::vector<Term> args;
    for (std::size_t i = 0; i < arity; ++i)
      args.push_back(i == pos ? at : Term::variable("A" + std::to_string(i)));
    return args;
  };
  for (const auto& [f, arity] : sig.functors) {
    for (std::size_t i = 0; i < arity; ++i) {
      out.push_back({{{false, eq(X, Y)},
                      {true, eq(Term::application(f, args_with(arity, i, X)),
                                Term::application(f, args_with(arity, i, Y)))}},
                     ""});
    }
  }
  for (const auto& [p, arity] : sig.predicates) {
    for (std::size_t i = 0; i < arity; ++i) {
      out.push_back({{{false, eq(X, Y)},
                      {false, Formula::atom(p, args_with(arity, i, X))},
                      {true, Formula::atom(p, args_with(arity, i, Y))}},
                     ""});
    }
  }
  return out;
}

}  // namespace

ClausalForm clausify(std::span<const NamedFormula> axioms,
                     const std::optional<NamedFormula>& conjecture) {
  ClausalForm out;
  Skolemizer sk;
  auto add = [&](const Formula& f, bool positive, const std::string& origin) {
    Nnf skolemized = sk.run(nnf(f, positive), {});
    for (auto& lits : to_cnf(skolemized)) out.clauses.push_back({std::move(lits), origin});
  };
  for (const auto& a : axioms) add(a.formula, true, a.name);
  if (conjecture) add(conjecture->formula, false, conjecture->name);

  Signature sig;
  for (const auto& c : out.clauses) {
    for (const auto& l : c.literals) {
      if (l.atom.is(K::equality)) {
        out.has_equality = true;
      } else {
        sig.predicates.emplace(l.atom.predicate(), l.atom.terms().size());
      }
      for (const auto& t : l.atom.terms()) sig_term(t, sig);
    }
  }
  if (out.has_equality) {
    auto eqs = equality_axioms(sig);
    out.clauses.insert(out.clauses.end(), eqs.begin(), eqs.end());
  }
  return out;
}

ClausalForm clausify(const std::vector<Formula>& axioms, const Formula& conjecture) {
  std::vector<NamedFormula> named;
  for (std::size_t i = 0; i < axioms.size(); ++i)
    named.push_back({"a" + std::to_string(i + 1), axioms[i]});
  return clausify(named, NamedFormula{"goal", conjecture});
}

std::string format_clause(const Clause& c) {
  if (c.literals.empty()) return "$false";
  std::string out;
  for (std::size_t i = 0; i < c.literals.size(); ++i) {
    if (i) out += " | ";
    const auto& l = c.literals[i];
    std::string atom = tptp::format_formula(l.atom);
    if (l.positive) {
      out += atom;
    } else {
      out += l.atom.is(K::equality) ? "~ (" + atom + ")" : "~ " + atom;
    }
  }
  return out;
}

}  // namespace mflar
