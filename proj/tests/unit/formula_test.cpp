#include <gtest/gtest.h>

#include "mflar/article.hpp"
#include "mflar/clausify.hpp"
#include "mflar/errors.hpp"
#include "mflar/prover.hpp"
#include "mflar/tptp.hpp"
#include "support/oracles.hpp"

namespace mflar {
namespace {

Term V(const std::string& n) { return Term::variable(n); }
Term C(const std::string& n) { return Term::constant(n); }
Term F(const std::string& n, std::vector<Term> a) { return Term::application(n, std::move(a)); }
Formula A(const std::string& p, std::vector<Term> a = {}) { return Formula::atom(p, std::move(a)); }

TEST(ParseFormula, ConjunctionWithEqualities) {
  SymbolTable syms;
  Formula f = parse_formula("one_to_one(f) & dom(f) = X & rng(f) = A", syms);
  Formula want = Formula::conjunction({A("one_to_one", {C("f")}),
                                       Formula::equality(F("dom", {C("f")}), V("X")),
                                       Formula::equality(F("rng", {C("f")}), V("A"))});
  EXPECT_EQ(f, want);
  ASSERT_NE(syms.find("dom"), nullptr);
  EXPECT_EQ(syms.find("dom")->kind, SymbolKind::functor);
  EXPECT_EQ(syms.find("one_to_one")->kind, SymbolKind::predicate);
}

TEST(ParseFormula, SmallestFormula) {
  SymbolTable syms;
  EXPECT_EQ(parse_formula("p", syms), A("p"));
}

TEST(ParseFormula, QuantifierBodyExtendsRight) {
  SymbolTable syms;
  Formula f = parse_formula("for X holds p(X) implies p(X)", syms);
  EXPECT_EQ(f, Formula::universal({"X"}, Formula::implication(A("p", {V("X")}), A("p", {V("X")}))));
}

TEST(ParseFormula, ArityMismatchNamesSymbol) {
  SymbolTable syms;
  try {
    parse_formula("p(a) & p(a,b)", syms);
    FAIL() << "expected ArityError";
  } catch (const ArityError& e) {
    EXPECT_EQ(e.symbol(), "p");
  }
}

TEST(ParseFormula, ArityTableIsConsulted) {
  SymbolTable syms;
  syms.record("p", SymbolKind::predicate, 2);
  EXPECT_THROW(parse_formula("p(a)", syms), ArityError);
}

TEST(ParseFormula, SyntaxErrorCarriesPosition) {
  SymbolTable syms;
  try {
    parse_formula("p &\n  & q", syms);
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST(ParseFormula, PrintedFormReparses) {
  testing::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Formula f = testing::random_fo(rng, 4);
    SymbolTable syms;
    std::string text = print_formula(f);
    EXPECT_EQ(parse_formula(text, syms), f) << text;
  }
}

TEST(SerializeTptp, DirectMapping) {
  EXPECT_EQ(tptp::serialize("t1_test", tptp::Role::axiom, Formula::universal({"X"}, A("p", {V("X")}))),
            "fof(t1_test, axiom, ! [X] : p(X)).");
  EXPECT_EQ(tptp::serialize("goal", tptp::Role::conjecture, A("p")), "fof(goal, conjecture, p).");
}

TEST(SerializeTptp, Connectives) {
  Formula f = Formula::universal(
      {"X", "Y"},
      Formula::implication(Formula::conjunction({A("p", {V("X")}), Formula::negation(A("q"))}),
                           Formula::negation(Formula::equality(V("X"), V("Y")))));
  EXPECT_EQ(tptp::format_formula(f), "! [X,Y] : ((p(X) & ~ q) => ~ (X = Y))");
  Formula g = Formula::equivalence(Formula::disjunction({A("a"), A("b")}),
                                   Formula::existential({"Z"}, A("r", {F("f", {V("Z"), C("c")})})));
  EXPECT_EQ(tptp::format_formula(g), "(a | b) <=> (? [Z] : r(f(Z,c)))");
}

TEST(SerializeTptp, OpenFormulaListsVariables) {
  try {
    tptp::serialize("x", tptp::Role::axiom, A("p", {V("X"), V("Y")}));
    FAIL() << "expected OpenFormulaError";
  } catch (const OpenFormulaError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("X"), std::string::npos);
    EXPECT_NE(msg.find("Y"), std::string::npos);
  }
}

TEST(SerializeTptp, RandomRoundTrip) {
  testing::Rng rng(2024);
  for (int i = 0; i < 100; ++i) {
    Formula f = testing::random_fo(rng, 4);
    std::string text = tptp::serialize("f" + std::to_string(i), tptp::Role::axiom, f);
    auto parsed = tptp::parse(text);
    ASSERT_EQ(parsed.size(), 1u) << text;
    EXPECT_EQ(parsed[0].formula, f) << text;
    EXPECT_EQ(tptp::serialize(parsed[0].name, tptp::Role::axiom, parsed[0].formula), text);
  }
}

TEST(TptpParse, RejectsIncludeAndSkipsComments) {
  EXPECT_THROW(tptp::parse("include('Axioms/SET001.ax')."), std::runtime_error);
  auto fs = tptp::parse("% header\n/* block */ fof(a, axiom, p).\nfof(b, conjecture, q, file('x')).\n");
  ASSERT_EQ(fs.size(), 2u);
  EXPECT_EQ(fs[1].role, "conjecture");
}

// Clause sets compared as multisets of sorted literal strings, with variables
// numbered by first occurrence so any renaming is accepted.
std::multiset<std::string> canonical(const ClausalForm& cf) {
  std::multiset<std::string> out;
  for (const auto& c : cf.clauses) {
    std::map<std::string, std::string> ren;
    std::string s = format_clause(c);
    std::string norm;
    for (std::size_t i = 0; i < s.size();) {
      if (std::isupper(static_cast<unsigned char>(s[i])) &&
          (i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1])))) {
        std::size_t j = i;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
        std::string v = s.substr(i, j - i);
        auto [it, fresh] = ren.emplace(v, "W" + std::to_string(ren.size()));
        norm += it->second;
        i = j;
      } else {
        norm += s[i++];
      }
    }
    out.insert(norm);
  }
  return out;
}

TEST(Clausify, NegatedConjectureOnly) {
  auto cf = clausify(std::vector<Formula>{}, A("p"));
  EXPECT_EQ(canonical(cf), (std::multiset<std::string>{"~ p"}));
}

TEST(Clausify, AxiomAndNegatedConjecture) {
  auto cf = clausify(std::vector<Formula>{A("p")}, A("p"));
  EXPECT_EQ(canonical(cf), (std::multiset<std::string>{"p", "~ p"}));
  EXPECT_EQ(cf.clauses[0].origin, "a1");
  EXPECT_EQ(cf.clauses[1].origin, "goal");
}

TEST(Clausify, NegatedExistentialConjectureIsUniversal) {
  // The negated goal ~?[X]:p(X) is universal, so no Skolem symbol arises.
  auto cf = clausify(std::vector<Formula>{Formula::universal({"X"}, A("p", {V("X")}))},
                     Formula::existential({"X"}, A("p", {V("X")})));
  EXPECT_EQ(canonical(cf), (std::multiset<std::string>{"p(W0)", "~ p(W0)"}));
}

TEST(Clausify, SkolemizationUsesReservedPrefixes) {
  // ![X]:?[Y]:r(X,Y) and ?[Z]:q(Z) as axioms.
  auto cf = clausify(
      std::vector<Formula>{
          Formula::universal({"X"}, Formula::existential({"Y"}, A("r", {V("X"), V("Y")}))),
          Formula::existential({"Z"}, A("q", {V("Z")}))},
      A("goal"));
  auto c = canonical(cf);
  EXPECT_TRUE(c.contains("r(W0,skf_1(W0))"));
  EXPECT_TRUE(c.contains("q(skc_2)"));
}

TEST(Clausify, EqualityAddsAxioms) {
  auto cf = clausify(std::vector<Formula>{Formula::equality(C("a"), C("b")), A("p", {C("a")})},
                     A("p", {C("b")}));
  EXPECT_TRUE(cf.has_equality);
  auto c = canonical(cf);
  EXPECT_TRUE(c.contains("W0 = W0"));
  EXPECT_TRUE(c.contains("~ (W0 = W1) | ~ p(W0) | p(W1)"));
}

TEST(Clausify, PropositionalSatisfiabilityMatchesTruthTable) {
  testing::Rng rng(7);
  for (int i = 0; i < 150; ++i) {
    auto prob = testing::random_prop_problem(rng);
    auto cf = clausify(prob.axioms, prob.conjecture);
    // Brute force over the clause set itself.
    bool sat = false;
    for (unsigned mask = 0; mask < 16 && !sat; ++mask) {
      bool all = true;
      for (const auto& cl : cf.clauses) {
        bool any = false;
        for (const auto& l : cl.literals) {
          int idx = l.atom.predicate()[1] - '0';
          any = any || (((mask >> idx) & 1u) != 0) == l.positive;
        }
        all = all && any;
      }
      sat = all;
    }
    EXPECT_EQ(sat, !prob.entailed);
  }
}

TEST(Substitute, Basic) {
  EXPECT_EQ(substitute(A("p", {V("X")}), {{"X", C("c")}}), A("p", {C("c")}));
}

TEST(Substitute, AvoidsCapture) {
  Formula f = Formula::universal({"X"}, A("q", {V("X"), V("Y")}));
  Formula g = substitute(f, {{"Y", V("X")}});
  ASSERT_TRUE(g.is(Formula::Kind::universal));
  ASSERT_NE(g.vars()[0], "X");
  Formula want = Formula::universal({"Z"}, A("q", {V("Z"), V("X")}));
  EXPECT_TRUE(alpha_equivalent(g, want));
  EXPECT_EQ(free_variables(g), (std::set<std::string>{"X"}));
}

TEST(Substitute, IdempotentWithoutMappedVariables) {
  testing::Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Formula f = testing::random_fo(rng, 4);
    EXPECT_EQ(substitute(f, {{"Unused", C("k")}}), f);
  }
}

TEST(Substitute, Composition) {
  // s1 maps X to f(Y); s2 maps Y to c. Domains are disjoint from ranges in the
  // sense of the property: s2 applied after s1 equals substituting s2 o s1.
  Formula f = Formula::conjunction({A("p", {V("X")}), A("r", {V("Y"), V("W")})});
  Substitution s1{{"X", F("g", {V("W")})}};
  Substitution s2{{"Y", C("c")}, {"W", C("d")}};
  Substitution composed{{"X", substitute(F("g", {V("W")}), s2)}, {"Y", C("c")}, {"W", C("d")}};
  EXPECT_EQ(substitute(substitute(f, s1), s2), substitute(f, composed));
}

TEST(Structural, FlattenAndAlpha) {
  Formula a = Formula::conjunction({Formula::conjunction({A("p"), A("q")}), A("r")});
  Formula b = Formula::conjunction({A("p"), A("q"), A("r")});
  EXPECT_FALSE(a == b);
  EXPECT_TRUE(matches_structurally(a, b));
  EXPECT_TRUE(alpha_equivalent(Formula::universal({"X"}, A("p", {V("X")})),
                               Formula::universal({"Y"}, A("p", {V("Y")}))));
  EXPECT_FALSE(alpha_equivalent(Formula::universal({"X"}, A("p", {V("X")})),
                                Formula::existential({"X"}, A("p", {V("X")}))));
}

TEST(FormulaInvariants, ShortConnectiveListsRejected) {
  EXPECT_THROW(Formula::conjunction({A("p")}), std::invalid_argument);
  EXPECT_THROW(Formula::disjunction({}), std::invalid_argument);
  EXPECT_EQ(conjoin({}), Formula::verum());
  EXPECT_EQ(conjoin({A("p")}), A("p"));
}

}  // namespace
}  // namespace mflar
