#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mflar/clausify.hpp"

namespace mflar {

enum class SzsStatus { theorem, counter_satisfiable, resource_out, gave_up, error };

// SZS ontology spelling: Theorem, CounterSatisfiable, ResourceOut, GaveUp, Error.
std::string_view szs_name(SzsStatus s);
std::optional<SzsStatus> parse_szs(std::string_view name);

struct Limits {
  double cpu_seconds = 10.0;
  double wall_seconds = 15.0;
  std::uint64_t memory_bytes = std::uint64_t{1} << 30;
  // Internal prover only.
  std::size_t max_generated_clauses = 10000;
  std::size_t max_clause_weight = 64;

  // Throws std::invalid_argument unless all limits are positive and wall >= cpu.
  void validate() const;

  static Limits user_default() { return {}; }
  static Limits checker_default() { return {2.0, 3.0, std::uint64_t{1} << 30, 10000, 64}; }
};

struct RunResult {
  std::string system;
  SzsStatus status = SzsStatus::gave_up;
  std::string diagnostic;
  std::int64_t cpu_millis = 0;
  std::int64_t wall_millis = 0;
  // Present only for Theorem results whose proof names its premises.
  std::optional<std::vector<std::string>> used_axioms;
  std::string raw_output_path;
  std::size_t generated_clauses = 0;
};

// Given-clause saturation: binary resolution and factoring, clause selection by
// weight interleaved 4:1 with age, forward subsumption, tautology deletion.
// Theorem iff the empty clause is derived; CounterSatisfiable iff the clause set
// saturates with nothing discarded by the weight cap; ResourceOut when a limit trips;
// GaveUp when saturation completed only because clauses were discarded.
RunResult saturate(const ClausalForm& clauses, const Limits& limits);

// Prover-style transcript with an SZS status line and, for Theorem, the used names.
std::string format_transcript(const RunResult& r, const std::string& problem_name);

}  // namespace mflar
