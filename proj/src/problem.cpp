#include "mflar/problem.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <deque>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "mflar/errors.hpp"
#include "mflar/names.hpp"
#include "mflar/tptp.hpp"

namespace mflar {

std::vector<std::string> TptpProblem::names() const {
  std::vector<std::string> out;
  for (const auto& a : axioms) out.push_back(a.name);
  out.push_back(conjecture.name);
  return out;
}

namespace {

using Arities = std::map<std::string, std::size_t>;

void term_arities(const Term& t, Arities& out) {
  if (t.is_variable()) return;
  out.emplace(t.name(), t.args().size());
  for (const auto& a : t.args()) term_arities(a, out);
}

void formula_arities(const Formula& f, Arities& out) {
  for (const auto& t : f.terms()) term_arities(t, out);
  for (const auto& c : f.children()) formula_arities(c, out);
}

// Functor arities a type axiom declares for the symbol it types.
std::size_t declared_arity(const Formula& dt, const std::string& symbol) {
  Arities a;
  formula_arities(dt, a);
  return a.at(symbol);
}

}  // namespace

TptpProblem generate_problem(const Obligation& o, const LibraryStore& lib,
                             const ExportedArticle& local) {
  TptpProblem p;
  p.name = o.id;
  p.origin = o.item_label + ":" + std::to_string(o.step_index);
  std::set<std::string> included;
  for (const auto& r : o.refs) {
    if (!included.insert(r.name).second) continue;
    switch (r.target) {
      case RefTarget::local_step:
        p.axioms.push_back({r.name, relativize(*r.formula, o.reservations)});
        break;
      case RefTarget::local_item: {
        const ExportedItem* it = local.find(r.name);
        if (!it) throw ReferenceError(r.name, "unresolved reference '" + r.cited + "'");
        p.axioms.push_back({r.name, it->formula});
        break;
      }
      case RefTarget::library: {
        const ExportedItem* it = lib.find(r.name);
        if (!it) throw ReferenceError(r.name, "unresolved library reference '" + r.name + "'");
        p.axioms.push_back({r.name, it->formula});
        break;
      }
    }
  }
  p.conjecture = {o.id, relativize(o.conjecture, o.reservations)};

  std::deque<std::pair<std::string, std::size_t>> work;
  auto enqueue = [&](const Formula& f) {
    Arities a;
    formula_arities(f, a);
    for (const auto& e : a) work.push_back(e);
  };
  for (const auto& a : p.axioms) enqueue(a.formula);
  enqueue(p.conjecture.formula);

  std::map<std::string, Formula> closure;
  std::set<std::string> done;
  while (!work.empty()) {
    auto [sym, arity] = work.front();
    work.pop_front();
    if (!done.insert(sym).second) continue;
    std::string name;
    Formula dt = Formula::verum();
    auto sc = std::find_if(o.scope.begin(), o.scope.end(),
                           [&](const ScopeConstant& c) { return c.name == sym; });
    if (sc != o.scope.end()) {
      auto parsed = parse_name(sym);
      name = parsed && parsed->kind == NameKind::scope_constant
                 ? format_name({NameKind::constant_type, parsed->ordinal, parsed->item, parsed->article})
                 : "dt_" + sym;
      dt = Formula::atom(sc->type, {Term::constant(sym)});
      if (arity != 0)
        throw UndeclaredSymbolError(sym, "scope constant '" + sym + "' applied to arguments");
    } else {
      const ExportedItem* it = local.functor_type(sym);
      if (!it) it = lib.functor_type(sym);
      if (!it) throw UndeclaredSymbolError(sym, "no declaration for functor '" + sym + "'");
      std::size_t want = declared_arity(it->formula, sym);
      if (want != arity) {
        throw UndeclaredSymbolError(sym, "functor '" + sym + "' used with arity " +
                                             std::to_string(arity) + ", declared with " +
                                             std::to_string(want));
      }
      name = it->name;
      dt = it->formula;
    }
    if (included.contains(name)) continue;
    closure.emplace(name, dt);
    enqueue(dt);
  }
  for (const auto& [name, f] : closure) {
    included.insert(name);
    p.axioms.push_back({name, f});
  }
  return p;
}

std::string render_problem(const TptpProblem& p, const std::string& timestamp) {
  std::string out = "% origin: " + p.origin + "\n% generated: " + timestamp + "\n";
  for (const auto& a : p.axioms) out += tptp::serialize(a.name, tptp::Role::axiom, a.formula) + "\n";
  out += tptp::serialize(p.conjecture.name, tptp::Role::conjecture, p.conjecture.formula) + "\n";
  return out;
}

std::filesystem::path write_problem_file(const std::filesystem::path& dir, const TptpProblem& p,
                                         const std::string& text) {
  std::filesystem::create_directories(dir);
  auto target = dir / (p.name + ".p");
  auto tmp = dir / ("." + p.name + ".p.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
  return target;
}

std::string iso_timestamp_now() {
  auto now = std::chrono::system_clock::now();
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms
     << 'Z';
  return os.str();
}

GenerationLog generate_all(const std::vector<Obligation>& obligations, const LibraryStore& lib,
                           const ExportedArticle& local, const ProblemSink& sink,
                           const LogSink& log, const Clock& clock) {
  GenerationLog g;
  auto emit = [&](const std::string& line) {
    g.lines.push_back(line);
    if (log) log(line);
  };
  for (const auto& o : obligations) {
    TptpProblem p;
    std::string text;
    std::string ts = clock();
    try {
      p = generate_problem(o, lib, local);
      text = render_problem(p, ts);
    } catch (const std::exception& e) {
      ++g.errors;
      emit(ts + " error " + o.id + " " + e.what());
      continue;
    }
    bool keep_going;
    std::string reason = "sink stopped";
    try {
      keep_going = sink(p, text);
    } catch (const std::exception& e) {
      keep_going = false;
      reason = e.what();
    }
    if (!keep_going) {
      emit(clock() + " interrupted " + reason);
      return g;
    }
    ++g.generated;
    emit(clock() + " generated " + o.id);
  }
  g.finished = true;
  emit(clock() + " finished");
  return g;
}

}  // namespace mflar
