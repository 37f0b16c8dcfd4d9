#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflar/obligation.hpp"
#include "mflar/problem.hpp"
#include "mflar/prover.hpp"
#include "mflar/verifier.hpp"

namespace mflar {

struct TrainingExample {
  std::set<std::string> goal_symbols;
  std::set<std::string> used_premises;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

struct AdvisorModel {
  std::map<std::string, std::uint64_t> premise_count;
  // premise -> symbol -> count
  std::map<std::string, std::map<std::string, std::uint64_t>> cofire;
  std::uint64_t total_examples = 0;
  std::set<std::string> symbol_vocabulary;

  std::uint64_t cofire_count(const std::string& premise, const std::string& symbol) const;

  friend bool operator==(const AdvisorModel&, const AdvisorModel&) = default;
};

struct Hint {
  std::string name;
  double score = 0;

  friend bool operator==(const Hint&, const Hint&) = default;
};

using HintList = std::vector<Hint>;

class AdvisorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

AdvisorModel train(const std::vector<TrainingExample>& examples);

// log((n_p + 1) / (N + P)) + sum over s of log((c_ps + 1) / (n_p + 2))
double hint_score(const AdvisorModel& m, const std::string& premise,
                  const std::set<std::string>& goal_symbols);

using PremiseFilter = std::function<bool(const std::string&)>;

// Top k by score, ties by name. Throws AdvisorError for k == 0.
HintList suggest_hints(const AdvisorModel& m, const std::set<std::string>& goal_symbols,
                       std::size_t k, const PremiseFilter& eligible = {});

// Predicates and functors of the problem conjecture, scope constants replaced by
// their types.
std::set<std::string> goal_symbols(const Obligation& o);

// One example per obligation that verified or has a Theorem run. Premises are
// the run's used axioms when reported, else the problem's axiom names.
// `problems` and `results` are keyed by obligation id.
std::vector<TrainingExample> harvest(const VerificationReport& report,
                                     const std::map<std::string, TptpProblem>& problems,
                                     const std::map<std::string, RunResult>& results);

std::string serialize_model(const AdvisorModel& m);
AdvisorModel parse_model(std::string_view text);
void save_model(const AdvisorModel& m, const std::filesystem::path& path);
AdvisorModel load_model(const std::filesystem::path& path);

// JSON lines, one example per line: {"goal":[...],"premises":[...]}
std::string serialize_examples(const std::vector<TrainingExample>& examples);
std::vector<TrainingExample> parse_examples(std::string_view text);

}  // namespace mflar
