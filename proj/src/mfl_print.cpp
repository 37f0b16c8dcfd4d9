#include <sstream>

#include "mflar/article.hpp"

namespace mflar {

namespace {

using K = Formula::Kind;

std::string term_text(const Term& t) {
  if (t.args().empty()) return t.name();
  std::string out = t.name() + "(";
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (i) out += ",";
    out += term_text(t.args()[i]);
  }
  return out + ")";
}

std::string list_vars(const std::vector<std::string>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ", ";
    out += vs[i];
  }
  return out;
}

std::string print(const Formula& f);

std::string wrap_if(bool cond, const Formula& f) {
  return cond ? "(" + print(f) + ")" : print(f);
}

std::string print(const Formula& f) {
  switch (f.kind()) {
    case K::verum:
      return "verum";
    case K::atom: {
      if (f.terms().empty()) return f.predicate();
      std::string out = f.predicate() + "(";
      for (std::size_t i = 0; i < f.terms().size(); ++i) {
        if (i) out += ",";
        out += term_text(f.terms()[i]);
      }
      return out + ")";
    }
    case K::equality:
      return term_text(f.terms()[0]) + " = " + term_text(f.terms()[1]);
    case K::negation: {
      const auto& b = f.body();
      bool bare = b.is(K::atom) || b.is(K::equality) || b.is(K::negation);
      return "not " + wrap_if(!bare, b);
    }
    case K::conjunction:
    case K::disjunction: {
      bool is_and = f.is(K::conjunction);
      std::string out;
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        const auto& c = f.children()[i];
        if (i) out += is_and ? " & " : " or ";
        bool paren = c.is_quantifier() || c.is(K::implication) || c.is(K::equivalence) ||
                     c.is(K::disjunction) || (is_and && c.is(K::conjunction)) ||
                     c.is(K::verum);
        out += wrap_if(paren, c);
      }
      return out;
    }
    case K::implication: {
      const auto& a = f.children()[0];
      const auto& c = f.children()[1];
      bool pa = a.is_quantifier() || a.is(K::implication) || a.is(K::equivalence);
      bool pc = c.is_quantifier() || c.is(K::equivalence);
      return wrap_if(pa, a) + " implies " + wrap_if(pc, c);
    }
    case K::equivalence: {
      const auto& a = f.children()[0];
      const auto& b = f.children()[1];
      return wrap_if(a.is_quantifier(), a) + " iff " +
             wrap_if(b.is_quantifier() || b.is(K::equivalence), b);
    }
    case K::universal:
      return "for " + list_vars(f.vars()) + " holds " + print(f.body());
    case K::existential:
      return "ex " + list_vars(f.vars()) + " st " + print(f.body());
  }
  return "";
}

void print_proof(std::ostringstream& os, const Proof& p, int depth);

void print_just(std::ostringstream& os, const Justification& j, int depth) {
  if (j.kind == Justification::Kind::by) {
    os << " by ";
    for (std::size_t i = 0; i < j.refs.size(); ++i) os << (i ? ", " : "") << j.refs[i].name;
    os << ";\n";
    return;
  }
  os << "\n";
  print_proof(os, *j.proof, depth);
}

void print_proof(std::ostringstream& os, const Proof& p, int depth) {
  std::string pad(2 * depth, ' ');
  std::string inner(2 * depth + 2, ' ');
  os << pad << "proof\n";
  for (const auto& s : p.steps) {
    os << inner;
    switch (s.kind) {
      case StepKind::let:
        os << "let " << list_vars(s.vars) << ";\n";
        break;
      case StepKind::assume:
        os << "assume ";
        if (s.label) os << *s.label << ": ";
        os << print(*s.formula) << ";\n";
        break;
      case StepKind::aux:
        os << *s.label << ": " << print(*s.formula);
        print_just(os, *s.just, depth + 1);
        break;
      case StepKind::thus:
        os << "thus " << print(*s.formula);
        print_just(os, *s.just, depth + 1);
        break;
    }
  }
  os << pad << "end;\n";
}

bool same_proof(const Proof& a, const Proof& b);

bool same_just(const std::optional<Justification>& a, const std::optional<Justification>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  if (a->kind != b->kind) return false;
  if (a->kind == Justification::Kind::proof) return same_proof(*a->proof, *b->proof);
  if (a->refs.size() != b->refs.size()) return false;
  for (std::size_t i = 0; i < a->refs.size(); ++i) {
    const auto& x = a->refs[i];
    const auto& y = b->refs[i];
    if (x.name != y.name || x.target != y.target || x.index != y.index) return false;
  }
  return true;
}

bool same_formula(const std::optional<Formula>& a, const std::optional<Formula>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || *a == *b;
}

bool same_proof(const Proof& a, const Proof& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const auto& x = a.steps[i];
    const auto& y = b.steps[i];
    if (x.kind != y.kind || x.index != y.index || x.vars != y.vars || x.label != y.label ||
        !same_formula(x.formula, y.formula) || !same_just(x.just, y.just))
      return false;
  }
  return true;
}

}  // namespace

std::string print_formula(const Formula& f) { return print(f); }

std::string pretty_print(const Article& a) {
  std::ostringstream os;
  os << "article " << a.name << ";\n";
  for (const auto& r : a.reservations) os << "reserve " << r.variable << " for " << r.type << ";\n";
  for (const auto& f : a.functors) {
    os << "func " << f.name << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) os << (i ? ", " : "") << f.params[i];
    os << ") -> " << f.result_type << ";\n";
  }
  for (const auto& it : a.items) {
    os << (it.kind == ItemKind::definition ? "definition " : "theorem ") << it.label << ": "
       << print(it.formula);
    if (it.proof) {
      os << "\n";
      print_proof(os, *it.proof, 0);
    } else {
      os << ";\n";
    }
  }
  return os.str();
}

bool structurally_equal(const Article& a, const Article& b) {
  if (a.name != b.name || a.reservations.size() != b.reservations.size() ||
      a.functors.size() != b.functors.size() || a.items.size() != b.items.size())
    return false;
  for (std::size_t i = 0; i < a.reservations.size(); ++i) {
    if (a.reservations[i].variable != b.reservations[i].variable ||
        a.reservations[i].type != b.reservations[i].type)
      return false;
  }
  for (std::size_t i = 0; i < a.functors.size(); ++i) {
    const auto& x = a.functors[i];
    const auto& y = b.functors[i];
    if (x.name != y.name || x.params != y.params || x.result_type != y.result_type ||
        x.ordinal != y.ordinal)
      return false;
  }
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const auto& x = a.items[i];
    const auto& y = b.items[i];
    if (x.kind != y.kind || x.label != y.label || x.ordinal != y.ordinal ||
        x.position != y.position || !(x.formula == y.formula) ||
        x.proof.has_value() != y.proof.has_value())
      return false;
    if (x.proof && !same_proof(*x.proof, *y.proof)) return false;
  }
  return true;
}

}  // namespace mflar
