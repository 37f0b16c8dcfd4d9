#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflar/article.hpp"
#include "mflar/formula.hpp"

namespace mflar {

enum class ExportKind { theorem, definition, functor_type, constant_type };

std::string_view export_kind_name(ExportKind k);

struct ExportedItem {
  std::string name;
  ExportKind kind = ExportKind::theorem;
  Formula formula = Formula::verum();
  // Always symbols_of(formula); checked on load.
  std::set<std::string> symbols;
  std::string title;
  std::string article;
  // Source label for theorems/definitions, typed functor for dt_k.
  std::string source;
};

struct ExportedArticle {
  std::string name;
  std::vector<ExportedItem> items;

  const ExportedItem* find(const std::string& name) const;
  // The dt_k item typing `functor`, if declared here.
  const ExportedItem* functor_type(const std::string& functor) const;
};

class LibraryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Soft typing: quantified variables with a reservation get a guard,
// `for X holds F` -> `! [X] : (T(X) => F)`, `ex X st F` -> `? [X] : (T(X) & F)`.
Formula relativize(const Formula& f, const std::map<std::string, std::string>& reservations);

std::map<std::string, std::string> reservation_map(const Article& a);

// `! [args] : (guards => result_type(f(args)))`; unguarded parameters stay bare.
Formula functor_type_axiom(const FunctorDecl& f, const std::map<std::string, std::string>& reservations);

// All items under their library names, without any verification gate.
ExportedArticle translate_article(const Article& a);

// The mini-MML: exported articles keyed by name. Not synchronized; callers
// swap whole stores (see service).
class LibraryStore {
 public:
  // Throws LibraryError on a duplicate article or a functor already typed by
  // another article.
  void add(ExportedArticle a);
  bool contains_article(const std::string& name) const { return articles_.contains(name); }
  const ExportedItem* find(const std::string& name) const;
  const ExportedItem* functor_type(const std::string& functor) const;
  const std::map<std::string, ExportedArticle>& articles() const { return articles_; }
  std::vector<const ExportedItem*> items() const;
  std::size_t size() const { return index_.size(); }

  // One JSON document per article under `dir`.
  void save(const std::filesystem::path& dir) const;
  // Throws LibraryError if a stored symbol set disagrees with its formula.
  static LibraryStore load(const std::filesystem::path& dir);

 private:
  std::map<std::string, ExportedArticle> articles_;
  std::map<std::string, std::pair<std::string, std::size_t>> index_;
  std::map<std::string, std::string> functor_types_;
};

}  // namespace mflar
