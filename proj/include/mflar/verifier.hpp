#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflar/article.hpp"
#include "mflar/library.hpp"
#include "mflar/obligation.hpp"
#include "mflar/prover.hpp"

namespace mflar {

class SkeletonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Thesis {
  Formula current = Formula::verum();
  std::vector<ScopeConstant> scope;
  // let variable -> scope constant
  Substitution aliases;
};

// Names the constant for a let variable; receives the 1-based position in scope.
using ConstantNamer = std::function<std::string(std::size_t n)>;

ConstantNamer default_constant_namer();
// c<n>_<item>__<article>
ConstantNamer mptp_constant_namer(int item_position, const std::string& article);

// Throws SkeletonError naming the step and the expected thesis shape. Let
// variables must agree in type with the quantified variables they replace.
// `assume T(c)` for a scope constant c of type T is accepted without
// changing a thesis that is not an implication.
Thesis step_thesis(const Thesis& t, const ProofStep& s,
                   const std::map<std::string, std::string>& reservations,
                   const ConstantNamer& namer = default_constant_namer());

enum class StepStatus { verified, countersatisfiable, gave_up, skeleton_error };

std::string_view step_status_name(StepStatus s);

struct StepReport {
  std::size_t step_index = 0;
  StepKind kind = StepKind::let;
  std::optional<std::string> label;
  int e_ordinal = 0;  // 0 for let steps
  std::optional<std::string> obligation_id;
  std::string thesis_after;
  // Set for skeleton errors; for `by` steps once checked.
  std::optional<StepStatus> status;
  std::string reason;
  std::int64_t millis = 0;
};

struct ItemReport {
  std::string label;
  ItemKind kind = ItemKind::theorem;
  int position = 0;
  // Textual order, nested subproofs inlined.
  std::vector<StepReport> steps;
  // Problems outside any single step (undischarged thesis, unresolved refs).
  std::vector<std::string> errors;

  bool ok() const;
};

struct VerificationReport {
  std::string article;
  std::vector<ItemReport> items;
  std::vector<Obligation> obligations;

  // "<item>:<step>" -> status name, for every step that has a status.
  std::map<std::string, std::string> status_map() const;
  std::size_t failed_steps() const;
  bool all_ok() const;
  const StepReport* step_for(const std::string& obligation_id) const;
};

// One obligation per `by` in textual order, nested subproofs included. Throws
// ReferenceError for library references missing from `lib`; skeleton
// mismatches do not stop extraction.
std::vector<Obligation> extract_obligations(const Article& a, const LibraryStore& lib);

// Same premise closure as problem generation; runs the internal prover.
// Undeclared symbols count as GaveUp.
StepStatus check_obligation(const Obligation& o, const LibraryStore& lib,
                            const ExportedArticle& local, const Limits& limits,
                            RunResult* details = nullptr);

// Problems per item are reported, never aborting the others. At most
// `workers` obligations are checked concurrently; statuses do not depend on it.
VerificationReport verify_article(const Article& a, const LibraryStore& lib, unsigned workers = 1,
                                  const Limits& limits = Limits::checker_default());

// `<obligation-id> <status> <millis>` per `by` step.
std::string report_text_log(const VerificationReport& r);
std::string report_json(const VerificationReport& r);

}  // namespace mflar
