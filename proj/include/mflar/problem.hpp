#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflar/formula.hpp"
#include "mflar/library.hpp"
#include "mflar/obligation.hpp"

namespace mflar {

// A functor/constant with no declaration in scope, article, or library, or one
// used with an arity other than its declaration's.
class UndeclaredSymbolError : public std::runtime_error {
 public:
  UndeclaredSymbolError(std::string symbol, const std::string& what)
      : std::runtime_error(what), symbol_(std::move(symbol)) {}
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

struct TptpProblem {
  std::string name;
  // "<item>:<step>"
  std::string origin;
  // Explicit references in citation order, then dt_* axioms sorted by name.
  std::vector<NamedFormula> axioms;
  NamedFormula conjecture{"", Formula::verum()};

  std::vector<std::string> names() const;
};

// Premise closure: explicit refs plus the least set of dt_* axioms covering
// every functor and constant that occurs. Theorems and definitions are never
// pulled in transitively. Throws ReferenceError, UndeclaredSymbolError.
TptpProblem generate_problem(const Obligation& o, const LibraryStore& lib,
                             const ExportedArticle& local);

// Header comments, axioms, conjecture; LF endings. The timestamp is an input so
// identical inputs give identical bytes.
std::string render_problem(const TptpProblem& p, const std::string& timestamp);

// Writes <dir>/<id>.p via a temporary file and rename.
std::filesystem::path write_problem_file(const std::filesystem::path& dir, const TptpProblem& p,
                                         const std::string& text);

// Returns false to stop generation; throwing also stops it.
using ProblemSink = std::function<bool(const TptpProblem&, const std::string& text)>;
using LogSink = std::function<void(const std::string& line)>;
using Clock = std::function<std::string()>;

// UTC ISO-8601 with milliseconds.
std::string iso_timestamp_now();

struct GenerationLog {
  std::vector<std::string> lines;
  std::size_t generated = 0;
  std::size_t errors = 0;
  bool finished = false;
};

// Streams problems to `sink` in obligation order. Each log line is
// `<ts> generated <id>`, `<ts> error <id> <message>`, then `<ts> finished`, or
// `<ts> interrupted <reason>` when the sink stops early.
GenerationLog generate_all(const std::vector<Obligation>& obligations, const LibraryStore& lib,
                           const ExportedArticle& local, const ProblemSink& sink,
                           const LogSink& log = {}, const Clock& clock = iso_timestamp_now);

}  // namespace mflar
