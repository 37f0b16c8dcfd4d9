#include <gtest/gtest.h>

#include <random>

#include "mflar/errors.hpp"
#include "mflar/library.hpp"
#include "mflar/names.hpp"
#include "mflar/problem.hpp"
#include "mflar/tptp.hpp"
#include "mflar/verifier.hpp"
#include "support/corpus.hpp"
#include "support/files.hpp"

namespace mflar {
namespace {

const std::string kStamp = "2026-01-01T00:00:00.000Z";

TEST(Names, FormatsEachKind) {
  EXPECT_EQ(format_name({NameKind::theorem, 2, 0, "mtest1"}), "t2_mtest1");
  EXPECT_EQ(format_name({NameKind::definition, 1, 0, "wellord2"}), "d1_wellord2");
  EXPECT_EQ(format_name({NameKind::functor_type, 1, 0, "wellord2"}), "dt_k1_wellord2");
  EXPECT_EQ(format_name({NameKind::constant_type, 2, 9, "mtest1"}), "dt_c2_9__mtest1");
  EXPECT_EQ(format_name({NameKind::local_prop, 8, 9, "mtest1"}), "e8_9__mtest1");
  EXPECT_EQ(format_name({NameKind::scope_constant, 1, 3, "mtest1"}), "c1_3__mtest1");
}

TEST(Names, ParsesPaperExamples) {
  for (const char* n : {"e8_9__mtest1", "dt_k1_wellord2", "dt_c2_9__mtest1", "e2_9__mtest1",
                        "e7_9__mtest1", "t25_wellord2", "d1_wellord2"}) {
    auto parsed = parse_name(n);
    ASSERT_TRUE(parsed) << n;
    EXPECT_EQ(format_name(*parsed), n);
  }
  EXPECT_EQ(parse_name("t25_wellord2")->ordinal, 25);
  EXPECT_EQ(parse_name("e7_9__mtest1")->item, 9);
}

TEST(Names, RejectsNonNames) {
  for (const char* n : {"t0_a", "t01_a", "x1_a", "t1_", "e1__a", "t1_a__b", "dt_k1", "T1_a", "d1_1a"})
    EXPECT_FALSE(parse_name(n)) << n;
}

TEST(Names, RandomBijection) {
  std::mt19937 rng(5);
  const NameKind kinds[] = {NameKind::theorem,       NameKind::definition,    NameKind::functor_type,
                            NameKind::scope_constant, NameKind::constant_type, NameKind::local_prop};
  const char* arts[] = {"a", "mtest1", "wellord_2", "x9_y"};
  for (int i = 0; i < 500; ++i) {
    MptpName n;
    n.kind = kinds[rng() % 6];
    n.ordinal = 1 + static_cast<int>(rng() % 300);
    bool local = n.kind == NameKind::scope_constant || n.kind == NameKind::constant_type ||
                 n.kind == NameKind::local_prop;
    n.item = local ? 1 + static_cast<int>(rng() % 40) : 0;
    n.article = arts[rng() % 4];
    auto back = parse_name(format_name(n));
    ASSERT_TRUE(back) << format_name(n);
    EXPECT_EQ(*back, n);
  }
}

TEST(Export, FunctorTypeAxiom) {
  Article a = parse_article(testing::data("mtest1.mfl"));
  ExportedArticle e = translate_article(a);
  const ExportedItem* dt = e.find("dt_k1_mtest1");
  ASSERT_NE(dt, nullptr);
  EXPECT_EQ(tptp::format_formula(dt->formula), "! [X] : (set(X) => relation(relincl(X)))");
  EXPECT_EQ(dt->kind, ExportKind::functor_type);
  EXPECT_EQ(dt->symbols, (std::set<std::string>{"set", "relation", "relincl"}));
  ASSERT_NE(e.find("t2_mtest1"), nullptr);
  ASSERT_NE(e.find("t1_mtest1"), nullptr);
  ASSERT_NE(e.find("d1_mtest1"), nullptr);
  EXPECT_EQ(e.items.size(), 4u);
}

TEST(Export, NoFunctorsNoTypeAxioms) {
  ExportedArticle e = translate_article(parse_article("article a; theorem t1: p; definition d1: q;"));
  for (const auto& it : e.items) EXPECT_NE(it.kind, ExportKind::functor_type);
  EXPECT_NE(e.find("t1_a"), nullptr);
  EXPECT_NE(e.find("d1_a"), nullptr);
}

TEST(Export, RelativizesReservedQuantifiers) {
  Article a = parse_article(
      "article a; reserve X for set; reserve Y for elem; theorem t1: ex X, Y st r(X,Y) & for Z holds q(Z);");
  ExportedArticle e = translate_article(a);
  EXPECT_EQ(tptp::format_formula(e.find("t1_a")->formula),
            "? [X,Y] : (set(X) & elem(Y) & (r(X,Y) & (! [Z] : q(Z))))");
}

TEST(Library, RejectsDuplicatesAndFunctorClashes) {
  LibraryStore lib;
  lib.add(translate_article(parse_article(testing::data("mtest1.mfl"))));
  EXPECT_THROW(lib.add(translate_article(parse_article(testing::data("mtest1.mfl")))), LibraryError);
  EXPECT_THROW(lib.add(translate_article(parse_article(
                   "article other; reserve X for set; func relincl(X) -> set;"))),
               LibraryError);
  EXPECT_EQ(lib.functor_type("relincl")->name, "dt_k1_mtest1");
}

TEST(Library, SaveLoadRoundTrip) {
  testing::TempDir dir;
  LibraryStore lib;
  lib.add(translate_article(parse_article(testing::data("mtest1.mfl"))));
  lib.add(translate_article(parse_article(testing::base_article().text)));
  lib.save(dir.path());
  LibraryStore back = LibraryStore::load(dir.path());
  ASSERT_EQ(back.size(), lib.size());
  for (const auto* it : lib.items()) {
    const ExportedItem* other = back.find(it->name);
    ASSERT_NE(other, nullptr) << it->name;
    EXPECT_EQ(other->formula, it->formula);
    EXPECT_EQ(other->symbols, it->symbols);
    EXPECT_EQ(other->title, it->title);
    EXPECT_EQ(other->kind, it->kind);
  }
}

TEST(Library, LoadVerifiesSymbolSets) {
  testing::TempDir dir;
  LibraryStore lib;
  lib.add(translate_article(parse_article(testing::data("mtest1.mfl"))));
  lib.save(dir.path());
  auto file = dir.path() / "mtest1.json";
  std::string text = testing::slurp(file);
  auto pos = text.find("\"relincl\"", text.find("\"symbols\""));
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "\"relinck\"");
  std::ofstream(file, std::ios::trunc) << text;
  EXPECT_THROW(LibraryStore::load(dir.path()), LibraryError);
}

TEST(GenerateProblem, GoldenSample) {
  Article a = parse_article(testing::data("mtest1.mfl"));
  LibraryStore lib;
  auto obligations = extract_obligations(a, lib);
  ASSERT_EQ(obligations.size(), 1u);
  TptpProblem p = generate_problem(obligations[0], lib, translate_article(a));
  EXPECT_EQ(p.names(), (std::vector<std::string>{"d1_mtest1", "dt_c1_3__mtest1", "dt_k1_mtest1",
                                                 "e2_3__mtest1"}));
  EXPECT_EQ(render_problem(p, kStamp), testing::data("mtest1_e2_3.p"));
}

TEST(GenerateProblem, SevenNames) {
  Article a = parse_article(testing::data("seven.mfl"));
  LibraryStore lib;
  auto obligations = extract_obligations(a, lib);
  ASSERT_EQ(obligations.size(), 1u);
  EXPECT_EQ(obligations[0].refs.size(), 4u);
  TptpProblem p = generate_problem(obligations[0], lib, translate_article(a));
  EXPECT_EQ(p.names(),
            (std::vector<std::string>{"e1_3__seven", "e2_3__seven", "d1_seven", "d2_seven",
                                      "dt_c1_3__seven", "dt_k1_seven", "e3_3__seven"}));
}

TEST(GenerateProblem, NoRefsPropositionalConjecture) {
  Obligation o;
  o.id = "e1_1__a";
  o.conjecture = Formula::atom("p");
  TptpProblem p = generate_problem(o, LibraryStore{}, ExportedArticle{});
  EXPECT_TRUE(p.axioms.empty());
  EXPECT_EQ(p.names(), std::vector<std::string>{"e1_1__a"});
}

TEST(GenerateProblem, UndeclaredFunctorIsReported) {
  Article a = parse_article("article a; theorem t1: p(k) proof thus p(k) by t1_lib; end;");
  LibraryStore lib;
  lib.add(translate_article(parse_article("article lib; theorem t1: p(k);")));
  auto obligations = extract_obligations(a, lib);
  ASSERT_EQ(obligations.size(), 1u);
  try {
    generate_problem(obligations[0], lib, translate_article(a));
    FAIL() << "expected UndeclaredSymbolError";
  } catch (const UndeclaredSymbolError& e) {
    EXPECT_EQ(e.symbol(), "k");
  }
}

TEST(GenerateProblem, LibraryFunctorPullsLibraryTypeAxiom) {
  LibraryStore lib;
  lib.add(translate_article(parse_article(testing::data("mtest1.mfl"))));
  Article b = parse_article(
      "article user; reserve Y for set; theorem t1: for Y holds wellorder(relincl(Y)) proof let Y; "
      "thus wellorder(relincl(Y)) by d1_mtest1; end;");
  auto obligations = extract_obligations(b, lib);
  TptpProblem p = generate_problem(obligations.at(0), lib, translate_article(b));
  EXPECT_EQ(p.names(), (std::vector<std::string>{"d1_mtest1", "dt_c1_1__user", "dt_k1_mtest1",
                                                 "e1_1__user"}));
}

TEST(GenerateProblem, ExplicitTheoremsAreNotPulledTransitively) {
  // t1 of the library mentions q but nothing pulls it in unless cited.
  LibraryStore lib;
  lib.add(translate_article(parse_article("article lib; theorem t1: q; theorem t2: p;")));
  Article a = parse_article("article a; theorem t1: p proof thus p by t2_lib; end;");
  auto o = extract_obligations(a, lib);
  TptpProblem p = generate_problem(o.at(0), lib, translate_article(a));
  EXPECT_EQ(p.names(), (std::vector<std::string>{"t2_lib", "e1_1__a"}));
}

TEST(GenerateProblem, UnresolvedLibraryReference) {
  Article a = parse_article("article a; theorem t1: p proof thus p by t7_nowhere; end;");
  try {
    extract_obligations(a, LibraryStore{});
    FAIL() << "expected ReferenceError";
  } catch (const ReferenceError& e) {
    EXPECT_EQ(e.name(), "t7_nowhere");
  }
}

TEST(GenerateProblem, DeterministicBytes) {
  auto corpus = testing::synthetic_corpus(3, 4);
  LibraryStore lib;
  lib.add(translate_article(parse_article(testing::base_article().text)));
  for (const auto& src : corpus) {
    Article a = parse_article(src.text);
    auto o1 = extract_obligations(a, lib);
    auto o2 = extract_obligations(parse_article(src.text), lib);
    ASSERT_EQ(o1.size(), o2.size());
    for (std::size_t i = 0; i < o1.size(); ++i) {
      EXPECT_EQ(render_problem(generate_problem(o1[i], lib, translate_article(a)), kStamp),
                render_problem(generate_problem(o2[i], lib, translate_article(a)), kStamp));
    }
  }
}

TEST(GenerateProblem, ClosureIsMinimal) {
  // Every dt_* axiom types a symbol that occurs in some other formula.
  auto corpus = testing::synthetic_corpus(5, 4);
  LibraryStore lib;
  lib.add(translate_article(parse_article(testing::base_article().text)));
  for (const auto& src : corpus) {
    Article a = parse_article(src.text);
    for (const auto& o : extract_obligations(a, lib)) {
      TptpProblem p = generate_problem(o, lib, translate_article(a));
      for (const auto& ax : p.axioms) {
        if (!is_type_axiom_name(ax.name)) continue;
        std::set<std::string> typed;
        if (ax.formula.is(Formula::Kind::atom)) {
          typed.insert(ax.formula.terms()[0].name());
        } else {
          const Formula& body = ax.formula.body();
          const Formula& head = body.is(Formula::Kind::implication) ? body.children()[1] : body;
          typed.insert(head.terms()[0].name());
        }
        bool needed = false;
        std::vector<NamedFormula> others = p.axioms;
        others.push_back(p.conjecture);
        for (const auto& other : others) {
          if (other.name == ax.name) continue;
          auto fs = functors_of(other.formula);
          for (const auto& t : typed) needed = needed || fs.contains(t);
        }
        EXPECT_TRUE(needed) << ax.name << " in " << p.name;
      }
    }
  }
}

TEST(GenerateAll, GoldenSampleLog) {
  Article a = parse_article(testing::data("mtest1.mfl"));
  LibraryStore lib;
  auto obligations = extract_obligations(a, lib);
  std::vector<std::string> seen;
  auto log = generate_all(
      obligations, lib, translate_article(a),
      [&](const TptpProblem& p, const std::string&) {
        seen.push_back(p.name);
        return true;
      },
      {}, [] { return kStamp; });
  EXPECT_EQ(seen, std::vector<std::string>{"e2_3__mtest1"});
  EXPECT_EQ(log.lines, (std::vector<std::string>{kStamp + " generated e2_3__mtest1", kStamp + " finished"}));
  EXPECT_TRUE(log.finished);
}

std::vector<Obligation> corpus_obligations(int articles, int theorems, LibraryStore& lib,
                                           std::vector<ExportedArticle>& locals) {
  lib.add(translate_article(parse_article(testing::base_article().text)));
  std::vector<Obligation> all;
  for (const auto& src : testing::synthetic_corpus(articles, theorems)) {
    Article a = parse_article(src.text);
    for (auto& o : extract_obligations(a, lib)) all.push_back(std::move(o));
    locals.push_back(translate_article(a));
  }
  return all;
}

TEST(GenerateAll, CountContract) {
  LibraryStore lib;
  std::vector<ExportedArticle> locals;
  auto obligations = corpus_obligations(20, 5, lib, locals);
  ASSERT_EQ(obligations.size(), 200u);
  std::size_t generated = 0;
  // Problems of one article only resolve against that article's exports.
  for (std::size_t i = 0; i < locals.size(); ++i) {
    std::vector<Obligation> mine;
    for (const auto& o : obligations)
      if (o.article == locals[i].name) mine.push_back(o);
    auto log = generate_all(mine, lib, locals[i], [](const TptpProblem&, const std::string&) { return true; });
    EXPECT_EQ(log.errors, 0u);
    for (const auto& l : log.lines) generated += l.find(" generated ") != std::string::npos;
  }
  EXPECT_EQ(generated, 200u);
}

TEST(GenerateAll, InterruptedSinkLeavesPrefix) {
  LibraryStore lib;
  std::vector<ExportedArticle> locals;
  auto obligations = corpus_obligations(1, 8, lib, locals);
  ASSERT_EQ(obligations.size(), 16u);
  for (std::size_t k : {0u, 1u, 5u, 15u}) {
    for (bool by_throw : {false, true}) {
      std::size_t accepted = 0;
      auto log = generate_all(obligations, lib, locals[0], [&](const TptpProblem&, const std::string&) {
        if (accepted == k) {
          if (by_throw) throw std::runtime_error("disk full");
          return false;
        }
        ++accepted;
        return true;
      });
      std::vector<std::string> generated;
      for (const auto& l : log.lines)
        if (auto pos = l.find(" generated "); pos != std::string::npos) generated.push_back(l.substr(pos + 11));
      ASSERT_EQ(generated.size(), k);
      for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(generated[i], obligations[i].id);
      EXPECT_FALSE(log.finished);
      EXPECT_NE(log.lines.back().find("interrupted"), std::string::npos);
    }
  }
}

TEST(GenerateAll, PerProblemErrorsDoNotStopGeneration) {
  Article a = parse_article(
      "article a; theorem t1: p(k) proof thus p(k) by t1_lib; end; theorem t2: q proof thus q by t2_lib; end;");
  LibraryStore lib;
  lib.add(translate_article(parse_article("article lib; theorem t1: p(k); theorem t2: q;")));
  auto log = generate_all(extract_obligations(a, lib), lib, translate_article(a),
                          [](const TptpProblem&, const std::string&) { return true; });
  EXPECT_EQ(log.errors, 1u);
  EXPECT_EQ(log.generated, 1u);
  EXPECT_NE(log.lines[0].find(" error e1_1__a no declaration for functor 'k'"), std::string::npos);
  EXPECT_TRUE(log.finished);
}

TEST(WriteProblem, AtomicFileInPlace) {
  testing::TempDir dir;
  TptpProblem p;
  p.name = "e1_1__a";
  p.conjecture = {"e1_1__a", Formula::atom("p")};
  auto path = write_problem_file(dir.path() / "a" / "problems", p, render_problem(p, kStamp));
  EXPECT_EQ(path.filename(), "e1_1__a.p");
  EXPECT_EQ(testing::slurp(path), "% origin: \n% generated: " + kStamp + "\nfof(e1_1__a, conjecture, p).\n");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(path.parent_path())) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1u);
}

}  // namespace
}  // namespace mflar
