#include "mflar/library.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mflar/names.hpp"
#include "mflar/tptp.hpp"

namespace mflar {

using json = nlohmann::json;

std::string_view export_kind_name(ExportKind k) {
  switch (k) {
    case ExportKind::theorem: return "theorem";
    case ExportKind::definition: return "definition";
    case ExportKind::functor_type: return "functor-type";
    case ExportKind::constant_type: return "constant-type";
  }
  return "theorem";
}

namespace {

ExportKind parse_kind(const std::string& s) {
  for (auto k : {ExportKind::theorem, ExportKind::definition, ExportKind::functor_type,
                 ExportKind::constant_type})
    if (export_kind_name(k) == s) return k;
  throw LibraryError("unknown item kind '" + s + "'");
}

Formula guarded(const std::vector<std::string>& vars,
                const std::map<std::string, std::string>& res, const Formula& body,
                bool universal) {
  std::vector<Formula> guards;
  for (const auto& v : vars) {
    auto it = res.find(v);
    if (it != res.end()) guards.push_back(Formula::atom(it->second, {Term::variable(v)}));
  }
  if (guards.empty()) return body;
  if (universal) return Formula::implication(conjoin(guards), body);
  guards.push_back(body);
  return Formula::conjunction(std::move(guards));
}

}  // namespace

Formula relativize(const Formula& f, const std::map<std::string, std::string>& res) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::atom:
    case K::equality:
    case K::verum:
      return f;
    case K::negation:
      return Formula::negation(relativize(f.body(), res));
    case K::conjunction:
    case K::disjunction: {
      std::vector<Formula> cs;
      for (const auto& c : f.children()) cs.push_back(relativize(c, res));
      return f.is(K::conjunction) ? Formula::conjunction(std::move(cs))
                                  : Formula::disjunction(std::move(cs));
    }
    case K::implication:
      return Formula::implication(relativize(f.children()[0], res), relativize(f.children()[1], res));
    case K::equivalence:
      return Formula::equivalence(relativize(f.children()[0], res), relativize(f.children()[1], res));
    case K::universal:
      return Formula::universal(f.vars(), guarded(f.vars(), res, relativize(f.body(), res), true));
    case K::existential:
      return Formula::existential(f.vars(), guarded(f.vars(), res, relativize(f.body(), res), false));
  }
  return f;
}

std::map<std::string, std::string> reservation_map(const Article& a) {
  std::map<std::string, std::string> m;
  for (const auto& r : a.reservations) m.emplace(r.variable, r.type);
  return m;
}

Formula functor_type_axiom(const FunctorDecl& f, const std::map<std::string, std::string>& res) {
  std::vector<Term> args;
  for (const auto& p : f.params) args.push_back(Term::variable(p));
  Formula typed = Formula::atom(f.result_type, {Term::application(f.name, std::move(args))});
  if (f.params.empty()) return typed;
  return Formula::universal(f.params, guarded(f.params, res, typed, true));
}

const ExportedItem* ExportedArticle::find(const std::string& n) const {
  for (const auto& it : items)
    if (it.name == n) return &it;
  return nullptr;
}

const ExportedItem* ExportedArticle::functor_type(const std::string& functor) const {
  for (const auto& it : items)
    if (it.kind == ExportKind::functor_type && it.source == functor) return &it;
  return nullptr;
}

ExportedArticle translate_article(const Article& a) {
  ExportedArticle out;
  out.name = a.name;
  auto res = reservation_map(a);
  for (const auto& f : a.functors) {
    ExportedItem e;
    e.name = format_name({NameKind::functor_type, f.ordinal, 0, a.name});
    e.kind = ExportKind::functor_type;
    e.formula = functor_type_axiom(f, res);
    e.symbols = symbols_of(e.formula);
    e.title = "type of " + f.name + " (" + a.name + ")";
    e.article = a.name;
    e.source = f.name;
    out.items.push_back(std::move(e));
  }
  for (const auto& it : a.items) {
    ExportedItem e;
    bool thm = it.kind == ItemKind::theorem;
    e.name = format_name({thm ? NameKind::theorem : NameKind::definition, it.ordinal, 0, a.name});
    e.kind = thm ? ExportKind::theorem : ExportKind::definition;
    e.formula = relativize(it.formula, res);
    e.symbols = symbols_of(e.formula);
    e.title = std::string(thm ? "theorem " : "definition ") + it.label + " of " + a.name;
    e.article = a.name;
    e.source = it.label;
    out.items.push_back(std::move(e));
  }
  return out;
}

void LibraryStore::add(ExportedArticle a) {
  if (articles_.contains(a.name)) throw LibraryError("article '" + a.name + "' is already in the library");
  for (const auto& it : a.items) {
    if (index_.contains(it.name)) throw LibraryError("duplicate library name '" + it.name + "'");
    if (it.kind == ExportKind::functor_type) {
      auto prev = functor_types_.find(it.source);
      if (prev != functor_types_.end())
        throw LibraryError("functor '" + it.source + "' is already typed by " + prev->second);
    }
  }
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const auto& it = a.items[i];
    index_[it.name] = {a.name, i};
    if (it.kind == ExportKind::functor_type) functor_types_[it.source] = it.name;
  }
  std::string name = a.name;
  articles_.emplace(std::move(name), std::move(a));
}

const ExportedItem* LibraryStore::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return nullptr;
  return &articles_.at(it->second.first).items[it->second.second];
}

const ExportedItem* LibraryStore::functor_type(const std::string& functor) const {
  auto it = functor_types_.find(functor);
  return it == functor_types_.end() ? nullptr : find(it->second);
}

std::vector<const ExportedItem*> LibraryStore::items() const {
  std::vector<const ExportedItem*> out;
  for (const auto& [name, loc] : index_) out.push_back(find(name));
  return out;
}

void LibraryStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, art] : articles_) {
    json items = json::array();
    for (const auto& it : art.items) {
      items.push_back({{"name", it.name},
                       {"kind", export_kind_name(it.kind)},
                       {"formula", tptp::format_formula(it.formula)},
                       {"symbols", it.symbols},
                       {"title", it.title},
                       {"source", it.source}});
    }
    json doc = {{"article", name}, {"items", items}};
    auto target = dir / (name + ".json");
    auto tmp = dir / (name + ".json.tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << doc.dump(2) << "\n";
      if (!out) throw LibraryError("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
  }
}

LibraryStore LibraryStore::load(const std::filesystem::path& dir) {
  LibraryStore store;
  if (!std::filesystem::exists(dir)) return store;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw LibraryError(path.string() + ": " + e.what());
    }
    ExportedArticle art;
    art.name = doc.at("article").get<std::string>();
    for (const auto& j : doc.at("items")) {
      ExportedItem it;
      it.name = j.at("name").get<std::string>();
      it.kind = parse_kind(j.at("kind").get<std::string>());
      it.formula = tptp::parse_formula(j.at("formula").get<std::string>());
      it.symbols = j.at("symbols").get<std::set<std::string>>();
      it.title = j.at("title").get<std::string>();
      it.source = j.at("source").get<std::string>();
      it.article = art.name;
      if (it.symbols != symbols_of(it.formula))
        throw LibraryError(path.string() + ": symbol set of " + it.name + " does not match its formula");
      art.items.push_back(std::move(it));
    }
    store.add(std::move(art));
  }
  return store;
}

}  // namespace mflar
