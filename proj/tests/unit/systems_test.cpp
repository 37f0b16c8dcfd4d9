#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mflar/systems.hpp"
#include "support/files.hpp"
#include "support/procs.hpp"

namespace mflar {
namespace {

ProverSystem fake(const std::string& name, const std::string& command) {
  std::string db = "name = " + name + "\ncommand = " + command +
                   "\nstatus Theorem = SZS status Theorem\n"
                   "status CounterSatisfiable = SZS status CounterSatisfiable\n";
  return parse_system_db(db).at(1);
}

ProverSystem script(const std::string& name) {
  return fake(name, testing::data_path("provers/" + name + ".sh").string() + " %s");
}

Limits limits(double cpu, double wall) {
  Limits l;
  l.cpu_seconds = cpu;
  l.wall_seconds = wall;
  return l;
}

int error_line(std::string_view db) {
  try {
    parse_system_db(db);
  } catch (const SystemDbError& e) {
    return e.line();
  }
  return -1;
}

TEST(SystemDb, GoldenFile) {
  auto systems = load_system_db(testing::data_path("systems.db"));
  ASSERT_EQ(systems.size(), 3u);
  EXPECT_EQ(systems[0].name, "mini-e");
  EXPECT_EQ(systems[0].kind, SystemKind::internal);
  const ProverSystem& e = systems[1];
  EXPECT_EQ(e.name, "eprover");
  EXPECT_EQ(e.kind, SystemKind::external);
  EXPECT_EQ(e.command_template, "eprover --auto --cpu-limit=%d %s");
  EXPECT_EQ(e.default_cpu, 10.0);
  ASSERT_EQ(e.status_patterns.size(), 3u);
  EXPECT_EQ(e.status_patterns[0], std::make_pair(std::string("SZS status Theorem"), SzsStatus::theorem));
  EXPECT_EQ(e.status_patterns[2].second, SzsStatus::resource_out);
  EXPECT_EQ(systems[2].name, "spass");
  EXPECT_EQ(systems[2].default_cpu, 5.0);
  EXPECT_NE(find_system(systems, "spass"), nullptr);
  EXPECT_EQ(find_system(systems, "vampire"), nullptr);
}

TEST(SystemDb, EmptyFileHasInternalProver) {
  auto systems = parse_system_db("");
  ASSERT_EQ(systems.size(), 1u);
  EXPECT_EQ(systems[0].name, "mini-e");
  EXPECT_EQ(parse_system_db("\n# nothing\n\n").size(), 1u);
}

TEST(SystemDb, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("name = a\ncommand = run it\n"), 2);
  EXPECT_EQ(error_line("name = a\ncommand = run %s %s\n"), 2);
  EXPECT_EQ(error_line("name = a\ncommand = run %x %s\n"), 2);
  EXPECT_EQ(error_line("name = a\ncommand = a %s\n\nname = a\ncommand = b %s\n"), 4);
  EXPECT_EQ(error_line("name = mini-e\ncommand = a %s\n"), 1);
  EXPECT_EQ(error_line("name = a\ncommand = a %s\ncolour = red\n"), 3);
  EXPECT_EQ(error_line("name = a\ncommand a %s\n"), 2);
  EXPECT_EQ(error_line("name = a\ncommand = a %s\nstatus Proved = yes\n"), 3);
  EXPECT_EQ(error_line("name = a\ncommand = a %s\nstatus Theorem = SZS\nstatus GaveUp = SZS status\n"), 4);
  EXPECT_EQ(error_line("name = a\ncommand = a %s\ncpu = -1\n"), 3);
  EXPECT_EQ(error_line("\n\ncommand = a %s\n"), 3);
  EXPECT_EQ(error_line("name = a b\ncommand = a %s\n"), 1);
}

TEST(SystemDb, SerializeReparses) {
  auto systems = load_system_db(testing::data_path("systems.db"));
  auto text = serialize_system_db(systems);
  EXPECT_EQ(parse_system_db(text), systems);
  EXPECT_EQ(serialize_system_db(parse_system_db(text)), text);
}

TEST(SystemDb, RandomRoundTrip) {
  std::mt19937_64 rng(11);
  const SzsStatus statuses[] = {SzsStatus::theorem, SzsStatus::counter_satisfiable,
                                SzsStatus::resource_out, SzsStatus::gave_up, SzsStatus::error};
  for (int round = 0; round < 100; ++round) {
    std::vector<ProverSystem> systems{internal_system()};
    int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      ProverSystem s;
      s.name = "sys" + std::to_string(i) + "-" + std::to_string(rng() % 100);
      s.command_template = "/opt/p" + std::to_string(rng() % 9) + (rng() % 2 ? " --cpu=%d" : "") +
                           " --x=" + std::to_string(rng() % 50) + " %s";
      s.default_cpu = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
      for (auto st : statuses)
        if (rng() % 2) s.status_patterns.emplace_back("<" + std::string(szs_name(st)) + ":" +
                                                          std::to_string(rng() % 1000) + ">",
                                                      st);
      systems.push_back(s);
    }
    auto text = serialize_system_db(systems);
    ASSERT_EQ(parse_system_db(text), systems) << text;
  }
}

TEST(SystemDb, ExpandQuotesPath) {
  ProverSystem s = fake("x", "prove -t %d %s");
  EXPECT_EQ(expand_command(s, "/tmp/a b/it's.p", 1.2), "prove -t 2 '/tmp/a b/it'\\''s.p'");
}

TEST(SystemDb, CitedNamesRestrictedToProblem) {
  std::string out = "fof(a1, axiom, p).\ncnf(c_0, plain, q, inference(a2)).\nfof( a2 , plain, $true).\n"
                    "fof(a1, axiom, p).";
  EXPECT_EQ(cited_names(out, {"a1", "a2", "a3"}), (std::vector<std::string>{"a1", "a2"}));
}

class RunTest : public ::testing::Test {
 protected:
  std::filesystem::path problem() const {
    auto p = dir.path() / "e2_3__mtest1.p";
    if (!std::filesystem::exists(p)) std::filesystem::copy_file(testing::data_path("mtest1_e2_3.p"), p);
    return p;
  }
  std::filesystem::path out(const std::string& n) const { return dir.path() / "runs" / n; }
  testing::TempDir dir;
};

TEST_F(RunTest, ExternalTheoremWithUsedAxioms) {
  auto r = run_external(script("theorem"), problem(), limits(5, 10), out("a.out"));
  EXPECT_EQ(r.status, SzsStatus::theorem) << r.diagnostic;
  EXPECT_EQ(r.system, "theorem");
  ASSERT_TRUE(r.used_axioms);
  std::set<std::string> names{"d1_mtest1", "dt_c1_3__mtest1", "dt_k1_mtest1", "e2_3__mtest1"};
  EXPECT_EQ(std::set<std::string>(r.used_axioms->begin(), r.used_axioms->end()), names);
  EXPECT_NE(testing::slurp(r.raw_output_path).find("SZS status Theorem"), std::string::npos);
}

TEST_F(RunTest, ExternalStatusMapping) {
  EXPECT_EQ(run_external(script("countersat"), problem(), limits(5, 10), out("b")).status,
            SzsStatus::counter_satisfiable);
  auto r = run_external(script("silent"), problem(), limits(5, 10), out("c"));
  EXPECT_EQ(r.status, SzsStatus::gave_up);
  EXPECT_FALSE(r.used_axioms);
}

TEST_F(RunTest, MissingBinaryIsError) {
  auto r = run_external(fake("ghost", "/nonexistent/prover %s"), problem(), limits(5, 10), out("d"));
  EXPECT_EQ(r.status, SzsStatus::error);
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST_F(RunTest, WallLimit) {
  auto r = run_external(script("sleeper"), problem(), limits(1, 1), out("e"));
  EXPECT_EQ(r.status, SzsStatus::resource_out);
  EXPECT_LE(r.wall_millis, 1500);
  EXPECT_NE(r.diagnostic.find("wall"), std::string::npos);
}

TEST_F(RunTest, ForkingBurnerTreeKilled) {
  auto p = problem();
  auto r = run_external(script("burner"), p, limits(1, 10), out("f"));
  EXPECT_EQ(r.status, SzsStatus::resource_out);
  EXPECT_NE(r.diagnostic.find("cpu"), std::string::npos);
  EXPECT_LE(r.wall_millis, 1500);
  EXPECT_GE(r.cpu_millis, 1000);
  EXPECT_TRUE(testing::live_processes_mentioning(p.string()).empty());
}

TEST_F(RunTest, MemoryLimit) {
  Limits l = limits(5, 10);
  l.memory_bytes = 64ull << 20;
  auto r = run_external(
      fake("hog", "python3 -c \"import time; x = bytearray(300 << 20); time.sleep(20)\" %s"),
      problem(), l, out("g"));
  EXPECT_EQ(r.status, SzsStatus::resource_out);
  EXPECT_NE(r.diagnostic.find("memory"), std::string::npos);
}

TEST_F(RunTest, InternalProverOnGoldenProblem) {
  auto r = run_internal(problem(), Limits::checker_default(), out("mini.out"));
  EXPECT_EQ(r.status, SzsStatus::theorem);
  ASSERT_TRUE(r.used_axioms);
  std::set<std::string> names{"d1_mtest1", "dt_c1_3__mtest1", "dt_k1_mtest1", "e2_3__mtest1"};
  for (const auto& n : *r.used_axioms) EXPECT_TRUE(names.contains(n)) << n;
  EXPECT_TRUE(std::count(r.used_axioms->begin(), r.used_axioms->end(), "d1_mtest1"));
  EXPECT_NE(testing::slurp(out("mini.out")).find("SZS status Theorem"), std::string::npos);
}

TEST_F(RunTest, InternalProverRejectsGarbage) {
  auto p = dir.path() / "bad.p";
  std::ofstream(p) << "fof(a, axiom, (p).\n";
  auto r = run_internal(p, Limits::checker_default(), out("bad.out"));
  EXPECT_EQ(r.status, SzsStatus::error);
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST_F(RunTest, Fallback) {
  auto path_for = [&](const ProverSystem& s, int seq) {
    return out("x." + s.name + "." + std::to_string(seq) + ".out");
  };
  auto one = prove_with_fallback(problem(), script("theorem"), script("countersat"), limits(1, 1), path_for);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].status, SzsStatus::theorem);

  auto cs = prove_with_fallback(problem(), script("countersat"), script("theorem"), limits(1, 1), path_for);
  ASSERT_EQ(cs.size(), 1u);

  auto two = prove_with_fallback(problem(), script("sleeper"), script("theorem"), limits(1, 1), path_for);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].status, SzsStatus::resource_out);
  EXPECT_EQ(two[1].status, SzsStatus::theorem);
  EXPECT_TRUE(std::filesystem::exists(path_for(script("theorem"), 1)));

  auto internal = prove_with_fallback(problem(), internal_system(), script("theorem"),
                                      Limits::checker_default(), path_for);
  ASSERT_EQ(internal.size(), 1u);
  EXPECT_EQ(internal[0].status, SzsStatus::theorem);
}

}  // namespace
}  // namespace mflar
