// Test-only generators and brute-force oracles. Nothing here calls into the
// clausifier or prover; the oracles evaluate formulas directly.
#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflar/formula.hpp"

namespace mflar::testing {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Propositional formula over atoms p0..p{atoms-1}.
inline Formula random_prop(Rng& rng, int depth, int atoms) {
  auto atom = [&] { return Formula::atom("p" + std::to_string(pick(rng, atoms))); };
  if (depth <= 0 || pick(rng, 4) == 0) return atom();
  switch (pick(rng, 5)) {
    case 0:
      return Formula::negation(random_prop(rng, depth - 1, atoms));
    case 1: {
      std::vector<Formula> cs;
      for (std::size_t i = 0, n = 2 + pick(rng, 2); i < n; ++i)
        cs.push_back(random_prop(rng, depth - 1, atoms));
      return Formula::conjunction(std::move(cs));
    }
    case 2: {
      std::vector<Formula> cs;
      for (std::size_t i = 0, n = 2 + pick(rng, 2); i < n; ++i)
        cs.push_back(random_prop(rng, depth - 1, atoms));
      return Formula::disjunction(std::move(cs));
    }
    case 3:
      return Formula::implication(random_prop(rng, depth - 1, atoms),
                                  random_prop(rng, depth - 1, atoms));
    default:
      return Formula::equivalence(random_prop(rng, depth - 1, atoms),
                                  random_prop(rng, depth - 1, atoms));
  }
}

inline bool eval_prop(const Formula& f, const std::map<std::string, bool>& v) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::verum:
      return true;
    case K::atom:
      return v.at(f.predicate());
    case K::negation:
      return !eval_prop(f.body(), v);
    case K::conjunction:
      for (const auto& c : f.children())
        if (!eval_prop(c, v)) return false;
      return true;
    case K::disjunction:
      for (const auto& c : f.children())
        if (eval_prop(c, v)) return true;
      return false;
    case K::implication:
      return !eval_prop(f.children()[0], v) || eval_prop(f.children()[1], v);
    case K::equivalence:
      return eval_prop(f.children()[0], v) == eval_prop(f.children()[1], v);
    default:
      throw std::logic_error("not propositional");
  }
}

// True iff every assignment satisfying all axioms satisfies the conjecture.
inline bool entails(const std::vector<Formula>& axioms, const Formula& conjecture, int atoms) {
  for (unsigned mask = 0; mask < (1u << atoms); ++mask) {
    std::map<std::string, bool> v;
    for (int i = 0; i < atoms; ++i) v["p" + std::to_string(i)] = (mask >> i) & 1u;
    bool all = true;
    for (const auto& a : axioms) all = all && eval_prop(a, v);
    if (all && !eval_prop(conjecture, v)) return false;
  }
  return true;
}

struct PropProblem {
  std::vector<Formula> axioms;
  Formula conjecture;
  bool entailed;
};

inline PropProblem random_prop_problem(Rng& rng, int atoms = 4) {
  std::vector<Formula> axioms;
  for (std::size_t i = 0, n = pick(rng, 4); i < n; ++i) axioms.push_back(random_prop(rng, 2, atoms));
  Formula c = random_prop(rng, 2, atoms);
  bool e = entails(axioms, c, atoms);
  return {std::move(axioms), std::move(c), e};
}

// First-order formulas for round-trip tests. Variables are drawn from bound
// names only, so results are closed.
inline Term random_term(Rng& rng, int depth, const std::vector<std::string>& bound) {
  if (!bound.empty() && pick(rng, 3) == 0) return Term::variable(bound[pick(rng, bound.size())]);
  if (depth <= 0 || pick(rng, 2) == 0) return Term::constant("c" + std::to_string(pick(rng, 3)));
  std::size_t f = pick(rng, 2);
  std::vector<Term> args;
  for (std::size_t i = 0; i < f + 1; ++i) args.push_back(random_term(rng, depth - 1, bound));
  return Term::application("f" + std::to_string(f), std::move(args));
}

inline Formula random_fo(Rng& rng, int depth, std::vector<std::string> bound = {}) {
  if (depth <= 0 || pick(rng, 5) == 0) {
    std::size_t which = pick(rng, 4);
    if (which == 0) return Formula::atom("q");
    if (which == 1)
      return Formula::equality(random_term(rng, 2, bound), random_term(rng, 2, bound));
    std::size_t ar = which - 1;
    std::vector<Term> args;
    for (std::size_t i = 0; i < ar; ++i) args.push_back(random_term(rng, 2, bound));
    return Formula::atom("r" + std::to_string(ar), std::move(args));
  }
  switch (pick(rng, 7)) {
    case 0:
      return Formula::negation(random_fo(rng, depth - 1, bound));
    case 1:
    case 2: {
      std::vector<Formula> cs;
      for (std::size_t i = 0, n = 2 + pick(rng, 2); i < n; ++i)
        cs.push_back(random_fo(rng, depth - 1, bound));
      return pick(rng, 2) ? Formula::conjunction(std::move(cs))
                          : Formula::disjunction(std::move(cs));
    }
    case 3:
      return Formula::implication(random_fo(rng, depth - 1, bound),
                                  random_fo(rng, depth - 1, bound));
    case 4:
      return Formula::equivalence(random_fo(rng, depth - 1, bound),
                                  random_fo(rng, depth - 1, bound));
    default: {
      std::vector<std::string> vs;
      for (std::size_t i = 0, n = 1 + pick(rng, 2); i < n; ++i) {
        std::string v = "X" + std::to_string(pick(rng, 4));
        if (std::find(vs.begin(), vs.end(), v) == vs.end()) vs.push_back(v);
      }
      auto inner = bound;
      inner.insert(inner.end(), vs.begin(), vs.end());
      Formula body = random_fo(rng, depth - 1, inner);
      return pick(rng, 2) ? Formula::universal(vs, body) : Formula::existential(vs, body);
    }
  }
}

}  // namespace mflar::testing
