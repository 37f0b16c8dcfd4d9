#pragma once

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mflar/prover.hpp"

namespace mflar {

enum class SystemKind { internal, external };

struct ProverSystem {
  std::string name;
  // `%s` problem path (exactly once), `%d` cpu seconds (optional).
  std::string command_template;
  // Output substring -> status, in declaration order.
  std::vector<std::pair<std::string, SzsStatus>> status_patterns;
  double default_cpu = 10.0;
  SystemKind kind = SystemKind::external;

  friend bool operator==(const ProverSystem&, const ProverSystem&) = default;
};

inline constexpr std::string_view kInternalSystem = "mini-e";

class SystemDbError : public std::runtime_error {
 public:
  SystemDbError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

ProverSystem internal_system();

// Stanzas of `key = value` lines separated by blank lines; `#` starts a comment
// line. Keys: name, command, cpu, `status <SzsStatus>`. The internal system is
// always first in the result.
std::vector<ProverSystem> parse_system_db(std::string_view text);
std::vector<ProverSystem> load_system_db(const std::filesystem::path& path);
// External systems only; the internal one is implicit.
std::string serialize_system_db(const std::vector<ProverSystem>& systems);

const ProverSystem* find_system(const std::vector<ProverSystem>& systems, std::string_view name);

// Template expansion with the path shell-quoted and cpu rounded up.
std::string expand_command(const ProverSystem& sys, const std::string& problem_path,
                           double cpu_seconds);

// Axiom names cited as fof(name, ...) / cnf(name, ...) in prover output that are
// also among `known`, first occurrence order.
std::vector<std::string> cited_names(std::string_view output,
                                     const std::vector<std::string>& known);

// Caps concurrent external prover runs.
class RunSlots {
 public:
  explicit RunSlots(unsigned n);
  void acquire();
  void release();

 private:
  std::mutex m_;
  std::condition_variable cv_;
  unsigned free_;
};

RunSlots& external_slots();

// Runs the command in its own process group and watches the whole tree through
// /proc; on any breach the tree is killed and the status is ResourceOut.
// Raw output (stdout and stderr) goes to `output_path`.
RunResult run_external(const ProverSystem& sys, const std::filesystem::path& problem_path,
                       const Limits& limits, const std::filesystem::path& output_path);

// mini-e on a TPTP file. A Theorem is re-checked on the problem restricted to
// its used axioms; if that fails the full name list is reported instead.
RunResult run_internal(const std::filesystem::path& problem_path, const Limits& limits,
                       const std::filesystem::path& output_path);

RunResult run_system(const ProverSystem& sys, const std::filesystem::path& problem_path,
                     const Limits& limits, const std::filesystem::path& output_path);

// Output path for the n-th run (0-based) of a fallback chain.
using OutputPathFor = std::function<std::filesystem::path(const ProverSystem&, int seq)>;

// Fallback runs only when the primary answers neither Theorem nor CounterSatisfiable.
std::vector<RunResult> prove_with_fallback(const std::filesystem::path& problem_path,
                                           const ProverSystem& primary,
                                           const ProverSystem& fallback, const Limits& limits,
                                           const OutputPathFor& output_for);

}  // namespace mflar
