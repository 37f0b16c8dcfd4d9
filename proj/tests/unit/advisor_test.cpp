#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <iostream>
#include <random>

#include "mflar/advisor.hpp"
#include "mflar/problem.hpp"
#include "support/advisor_bench.hpp"
#include "support/files.hpp"

namespace mflar {
namespace {

std::vector<TrainingExample> hand_corpus() { return parse_examples(testing::data("advisor_hand.jsonl")); }

// Straight from the raw examples, no model involved.
double oracle_score(const std::vector<TrainingExample>& ex, const std::string& p,
                    const std::set<std::string>& goal) {
  std::set<std::string> premises;
  double n = 0;
  for (const auto& e : ex) {
    premises.insert(e.used_premises.begin(), e.used_premises.end());
    n += e.used_premises.count(p);
  }
  double s = std::log((n + 1) / (static_cast<double>(ex.size()) + static_cast<double>(premises.size())));
  for (const auto& g : goal) {
    double c = 0;
    for (const auto& e : ex) c += e.used_premises.count(p) && e.goal_symbols.count(g);
    s += std::log((c + 1) / (n + 2));
  }
  return s;
}

TEST(Advisor, TrainCounts) {
  EXPECT_EQ(train({}).total_examples, 0u);
  AdvisorModel m = train({{{"p", "f"}, {"t1_a"}}, {{"p"}, {"t2_a"}}});
  EXPECT_EQ(m.premise_count.at("t1_a"), 1u);
  EXPECT_EQ(m.cofire_count("t1_a", "p"), 1u);
  EXPECT_EQ(m.cofire_count("t2_a", "f"), 0u);
  EXPECT_EQ(m.total_examples, 2u);
  EXPECT_EQ(m.symbol_vocabulary, (std::set<std::string>{"f", "p"}));
}

TEST(Advisor, TrainOrderIndependent) {
  std::mt19937 rng(3);
  for (int round = 0; round < 50; ++round) {
    std::vector<TrainingExample> ex;
    for (int i = 0; i < 20; ++i) {
      TrainingExample e;
      e.goal_symbols = {"s" + std::to_string(rng() % 5), "s" + std::to_string(rng() % 5)};
      e.used_premises = {"p" + std::to_string(rng() % 7)};
      ex.push_back(e);
    }
    AdvisorModel a = train(ex);
    std::shuffle(ex.begin(), ex.end(), rng);
    ASSERT_EQ(train(ex), a);
  }
}

TEST(Advisor, HandCorpusScores) {
  auto ex = hand_corpus();
  ASSERT_EQ(ex.size(), 3u);
  AdvisorModel m = train(ex);
  auto hints = suggest_hints(m, {"p"}, 10);
  ASSERT_EQ(hints.size(), 3u);
  // Hand evaluation: N = 3, P = 3, n(t1_a) = 2, c(t1_a, p) = 1, c(t2_a, p) = 1, c(d1_a, p) = 0.
  EXPECT_EQ(hints[0].name, "t1_a");
  EXPECT_NEAR(hints[0].score, std::log(3.0 / 6) + std::log(2.0 / 4), 1e-12);
  EXPECT_EQ(hints[1].name, "t2_a");
  EXPECT_NEAR(hints[1].score, std::log(2.0 / 9), 1e-12);
  EXPECT_EQ(hints[2].name, "d1_a");
  EXPECT_NEAR(hints[2].score, std::log(1.0 / 9), 1e-12);
  for (const auto& h : hints) EXPECT_NEAR(h.score, oracle_score(ex, h.name, {"p"}), 1e-9);
}

TEST(Advisor, RandomScoresMatchOracle) {
  std::mt19937 rng(9);
  for (int round = 0; round < 30; ++round) {
    std::vector<TrainingExample> ex;
    for (int i = 0; i < 15; ++i) {
      TrainingExample e;
      for (int j = 0; j < 3; ++j) e.goal_symbols.insert("s" + std::to_string(rng() % 6));
      for (int j = 0; j < 2; ++j) e.used_premises.insert("p" + std::to_string(rng() % 8));
      ex.push_back(e);
    }
    std::set<std::string> goal{"s" + std::to_string(rng() % 6), "s" + std::to_string(rng() % 8)};
    auto hints = suggest_hints(train(ex), goal, 100);
    for (std::size_t i = 0; i < hints.size(); ++i) {
      EXPECT_NEAR(hints[i].score, oracle_score(ex, hints[i].name, goal), 1e-9);
      if (i > 0) {
        EXPECT_TRUE(hints[i - 1].score > hints[i].score ||
                    (hints[i - 1].score == hints[i].score && hints[i - 1].name < hints[i].name));
      }
    }
  }
}

TEST(Advisor, EmptyGoalRanksByPrior) {
  auto hints = suggest_hints(train(hand_corpus()), {}, 10);
  ASSERT_EQ(hints.size(), 3u);
  EXPECT_EQ(hints[0].name, "t1_a");
  // Equal priors fall back to name order.
  EXPECT_EQ(hints[1].name, "d1_a");
  EXPECT_EQ(hints[2].name, "t2_a");
}

TEST(Advisor, KAndFilters) {
  AdvisorModel m = train(hand_corpus());
  EXPECT_EQ(suggest_hints(m, {"p"}, 1).size(), 1u);
  EXPECT_EQ(suggest_hints(m, {"p"}, 1000).size(), 3u);
  EXPECT_THROW(suggest_hints(m, {"p"}, 0), AdvisorError);
  EXPECT_TRUE(suggest_hints(AdvisorModel{}, {"p"}, 5).empty());
  auto only_t = suggest_hints(m, {"p"}, 10, [](const std::string& n) { return n[0] == 't'; });
  ASSERT_EQ(only_t.size(), 2u);
  EXPECT_EQ(only_t[0].name, "t1_a");
}

TEST(Advisor, AlwaysCofiringSymbolNeverLowersRank) {
  std::mt19937 rng(21);
  for (int round = 0; round < 200; ++round) {
    AdvisorModel m = testing::random_model(12, 6, static_cast<unsigned>(rng()));
    std::vector<std::string> names;
    for (const auto& [p, n] : m.premise_count) names.push_back(p);
    const std::string& p = names[rng() % names.size()];
    const std::string& q = names[rng() % names.size()];
    if (p == q) continue;
    std::set<std::string> goal{"s" + std::to_string(rng() % 6)};
    auto ahead = [&](const std::set<std::string>& g) {
      double sp = hint_score(m, p, g), sq = hint_score(m, q, g);
      return sp != sq ? sp > sq : p < q;
    };
    bool before = ahead(goal);
    m.cofire[p]["fresh"] = m.premise_count[p];
    m.cofire[q].erase("fresh");
    goal.insert("fresh");
    if (before) EXPECT_TRUE(ahead(goal));
  }
}

TEST(Advisor, ModelRoundTrip) {
  testing::TempDir dir;
  AdvisorModel hand = train(hand_corpus());
  save_model(hand, dir.path() / "advisor.model");
  EXPECT_EQ(load_model(dir.path() / "advisor.model"), hand);
  EXPECT_EQ(testing::slurp(dir.path() / "advisor.model").substr(0, 17), "advisor-model v1\n");
  EXPECT_EQ(parse_model(serialize_model(AdvisorModel{})), AdvisorModel{});
  for (unsigned seed = 0; seed < 100; ++seed) {
    AdvisorModel m = testing::random_model(5 + static_cast<int>(seed % 20), 8, seed);
    ASSERT_EQ(parse_model(serialize_model(m)), m);
  }
}

TEST(Advisor, ModelParseErrors) {
  EXPECT_THROW(parse_model("advisor-model v2\n"), AdvisorError);
  std::string text = serialize_model(train(hand_corpus()));
  EXPECT_THROW(parse_model(text.substr(0, text.size() - 10)), AdvisorError);
  EXPECT_THROW(parse_model(text + "junk\n"), AdvisorError);
}

TEST(Advisor, ExamplesRoundTrip) {
  auto ex = hand_corpus();
  EXPECT_EQ(parse_examples(serialize_examples(ex)), ex);
  EXPECT_THROW(parse_examples("{\"goal\": 3}\n"), AdvisorError);
}

TEST(Harvest, GoldenSample) {
  Article a = parse_article(testing::data("mtest1.mfl"));
  LibraryStore lib;
  auto report = verify_article(a, lib);
  ASSERT_EQ(report.obligations.size(), 1u);
  std::map<std::string, TptpProblem> problems;
  problems.emplace(report.obligations[0].id,
                   generate_problem(report.obligations[0], lib, translate_article(a)));
  auto ex = harvest(report, problems, {});
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].goal_symbols, (std::set<std::string>{"wellorder", "relincl", "set"}));
  EXPECT_EQ(ex[0].used_premises,
            (std::set<std::string>{"d1_mtest1", "dt_k1_mtest1", "dt_c1_3__mtest1"}));
}

TEST(Harvest, PrefersUsedAxioms) {
  Article a = parse_article(testing::data("mtest1.mfl"));
  LibraryStore lib;
  auto report = verify_article(a, lib);
  RunResult r;
  r.status = SzsStatus::theorem;
  r.used_axioms = std::vector<std::string>{"d1_mtest1", "e2_3__mtest1"};
  auto ex = harvest(report, {}, {{report.obligations[0].id, r}});
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0].used_premises, (std::set<std::string>{"d1_mtest1"}));
}

TEST(Harvest, SkipsUnverified) {
  Article a = parse_article(
      "article a; theorem t1: p implies q proof assume h: p; thus q by h; end;");
  auto report = verify_article(a, LibraryStore{});
  ASSERT_EQ(report.obligations.size(), 1u);
  EXPECT_TRUE(harvest(report, {}, {}).empty());
}

TEST(Advisor, SyntheticRecallBeatsRandom) {
  auto ex = testing::synthetic_training_examples();
  EXPECT_GE(ex.size(), 150u);
  auto r = testing::recall_experiment(ex, 5, 1);
  EXPECT_GE(r.model, 2 * r.random) << r.model << " vs " << r.random;
  std::cout << "recall@10 " << r.model << " random " << r.random << "\n";
}

TEST(Advisor, LatencyAtThousandPremises) {
  AdvisorModel m = testing::random_model(1000, 500, 4);
  ASSERT_EQ(m.premise_count.size(), 1000u);
  std::set<std::string> goal{"s1", "s7", "s99", "s250", "s499"};
  auto t0 = std::chrono::steady_clock::now();
  auto hints = suggest_hints(m, goal, 20);
  auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(hints.size(), 20u);
  EXPECT_LT(ms, 100.0);
}

}  // namespace
}  // namespace mflar
