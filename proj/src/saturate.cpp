#include <algorithm>
#include <chrono>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <time.h>

#include "mflar/prover.hpp"

namespace mflar {

std::string_view szs_name(SzsStatus s) {
  switch (s) {
    case SzsStatus::theorem: return "Theorem";
    case SzsStatus::counter_satisfiable: return "CounterSatisfiable";
    case SzsStatus::resource_out: return "ResourceOut";
    case SzsStatus::gave_up: return "GaveUp";
    case SzsStatus::error: return "Error";
  }
  return "Error";
}

std::optional<SzsStatus> parse_szs(std::string_view name) {
  for (auto s : {SzsStatus::theorem, SzsStatus::counter_satisfiable, SzsStatus::resource_out,
                 SzsStatus::gave_up, SzsStatus::error}) {
    if (szs_name(s) == name) return s;
  }
  return std::nullopt;
}

void Limits::validate() const {
  if (!(cpu_seconds > 0) || !(wall_seconds > 0) || memory_bytes == 0 ||
      max_generated_clauses == 0 || max_clause_weight == 0) {
    throw std::invalid_argument("limits must be positive");
  }
  if (wall_seconds < cpu_seconds) throw std::invalid_argument("wall limit below cpu limit");
}

namespace {

// Variables are negative symbols: -(index + 1).
struct PTerm {
  int sym;
  std::vector<PTerm> args;

  bool is_var() const { return sym < 0; }
  int var() const { return -sym - 1; }
  friend bool operator==(const PTerm&, const PTerm&) = default;
};

struct PLit {
  bool positive;
  PTerm atom;
  friend bool operator==(const PLit&, const PLit&) = default;
};

struct PClause {
  std::vector<PLit> lits;
  std::size_t weight = 0;
  int nvars = 0;
  std::uint64_t mask = 0;
  std::vector<int> parents;
  int origin = -1;
};

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

std::size_t term_weight(const PTerm& t) {
  std::size_t w = 1;
  for (const auto& a : t.args) w += term_weight(a);
  return w;
}

// Structure-sharing bindings over two renamed-apart clauses.
class Bindings {
 public:
  explicit Bindings(std::size_t n) : slots_(n) {}

  struct Ref {
    const PTerm* t;
    int off;
  };

  Ref deref(const PTerm* t, int off) const {
    while (t->is_var()) {
      const auto& s = slots_[static_cast<std::size_t>(t->var() + off)];
      if (!s.t) break;
      t = s.t;
      off = s.off;
    }
    return {t, off};
  }

  bool unify(const PTerm* a, int oa, const PTerm* b, int ob) {
    auto [x, ox] = deref(a, oa);
    auto [y, oy] = deref(b, ob);
    if (x->is_var() && y->is_var() && x->var() + ox == y->var() + oy) return true;
    if (x->is_var()) return bind(x->var() + ox, y, oy);
    if (y->is_var()) return bind(y->var() + oy, x, ox);
    if (x->sym != y->sym || x->args.size() != y->args.size()) return false;
    for (std::size_t i = 0; i < x->args.size(); ++i)
      if (!unify(&x->args[i], ox, &y->args[i], oy)) return false;
    return true;
  }

  PTerm apply(const PTerm& t, int off, std::map<int, int>& renum) const {
    auto [x, ox] = deref(&t, off);
    if (x->is_var()) {
      int key = x->var() + ox;
      auto [it, inserted] = renum.emplace(key, static_cast<int>(renum.size()));
      return PTerm{-(it->second + 1), {}};
    }
    PTerm out{x->sym, {}};
    out.args.reserve(x->args.size());
    for (const auto& a : x->args) out.args.push_back(apply(a, ox, renum));
    return out;
  }

 private:
  bool occurs(int slot, const PTerm* t, int off) const {
    auto [x, ox] = deref(t, off);
    if (x->is_var()) return x->var() + ox == slot;
    for (const auto& a : x->args)
      if (occurs(slot, &a, ox)) return true;
    return false;
  }

  bool bind(int slot, const PTerm* t, int off) {
    if (occurs(slot, t, off)) return false;
    slots_[static_cast<std::size_t>(slot)] = {t, off};
    return true;
  }

  struct Slot {
    const PTerm* t = nullptr;
    int off = 0;
  };
  std::vector<Slot> slots_;
};

// One-way matching for subsumption: pattern variables bind to target subterms.
bool match(const PTerm& p, const PTerm& t, std::vector<const PTerm*>& binds) {
  if (p.is_var()) {
    auto& b = binds[static_cast<std::size_t>(p.var())];
    if (!b) {
      b = &t;
      return true;
    }
    return *b == t;
  }
  if (p.sym != t.sym || p.args.size() != t.args.size()) return false;
  for (std::size_t i = 0; i < p.args.size(); ++i)
    if (!match(p.args[i], t.args[i], binds)) return false;
  return true;
}

bool subsumes_from(const PClause& c, const PClause& d, std::size_t i,
                   std::vector<const PTerm*>& binds) {
  if (i == c.lits.size()) return true;
  const auto& cl = c.lits[i];
  for (const auto& dl : d.lits) {
    if (dl.positive != cl.positive || dl.atom.sym != cl.atom.sym) continue;
    auto saved = binds;
    if (match(cl.atom, dl.atom, binds) && subsumes_from(c, d, i + 1, binds)) return true;
    binds = std::move(saved);
  }
  return false;
}

bool subsumes(const PClause& c, const PClause& d) {
  if (c.lits.size() > d.lits.size()) return false;
  if ((c.mask & ~d.mask) != 0) return false;
  std::vector<const PTerm*> binds(static_cast<std::size_t>(c.nvars), nullptr);
  return subsumes_from(c, d, 0, binds);
}

class Saturator {
 public:
  Saturator(const ClausalForm& input, const Limits& limits) : limits_(limits) {
    for (const auto& c : input.clauses) {
      PClause pc;
      std::map<std::string, int> vars;
      for (const auto& l : c.literals) pc.lits.push_back(convert(l, vars));
      if (!c.origin.empty()) pc.origin = origin_index(c.origin);
      inputs_.push_back(std::move(pc));
    }
  }

  RunResult run() {
    RunResult r;
    r.system = "mini-e";
    auto wall_start = std::chrono::steady_clock::now();
    double cpu_start = thread_cpu_seconds();
    auto finish = [&](SzsStatus s) {
      r.status = s;
      r.cpu_millis = static_cast<std::int64_t>((thread_cpu_seconds() - cpu_start) * 1000.0);
      r.wall_millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - wall_start)
                          .count();
      r.generated_clauses = generated_;
      return r;
    };

    for (auto& c : inputs_) {
      if (!finalize(c, /*apply_weight_cap=*/false)) continue;
      int id = keep(std::move(c));
      if (clauses_[static_cast<std::size_t>(id)].lits.empty()) {
        r.used_axioms = used_names(id);
        return finish(SzsStatus::theorem);
      }
    }

    std::size_t picks = 0;
    for (;;) {
      if ((picks & 15) == 0) {
        if (thread_cpu_seconds() - cpu_start > limits_.cpu_seconds) {
          r.diagnostic = "cpu limit";
          return finish(SzsStatus::resource_out);
        }
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                    wall_start)
                          .count();
        if (wall > limits_.wall_seconds) {
          r.diagnostic = "wall limit";
          return finish(SzsStatus::resource_out);
        }
      }
      int given = select(picks++);
      if (given < 0) {
        if (discarded_) {
          r.diagnostic = "saturated after discarding heavy clauses";
          return finish(SzsStatus::gave_up);
        }
        return finish(SzsStatus::counter_satisfiable);
      }
      processed_.push_back(given);
      auto found = infer(given);
      if (found >= 0) {
        r.used_axioms = used_names(found);
        return finish(SzsStatus::theorem);
      }
      if (generated_ > limits_.max_generated_clauses) {
        r.diagnostic = "generated clause limit";
        return finish(SzsStatus::resource_out);
      }
    }
  }

 private:
  int intern(const std::string& s) {
    auto [it, inserted] = symbols_.emplace(s, static_cast<int>(symbols_.size()));
    return it->second;
  }

  int origin_index(const std::string& name) {
    auto it = std::find(origins_.begin(), origins_.end(), name);
    if (it != origins_.end()) return static_cast<int>(it - origins_.begin());
    origins_.push_back(name);
    return static_cast<int>(origins_.size() - 1);
  }

  PTerm convert(const Term& t, std::map<std::string, int>& vars) {
    if (t.is_variable()) {
      auto [it, inserted] = vars.emplace(t.name(), static_cast<int>(vars.size()));
      return PTerm{-(it->second + 1), {}};
    }
    PTerm out{intern("f:" + t.name() + "/" + std::to_string(t.args().size())), {}};
    for (const auto& a : t.args()) out.args.push_back(convert(a, vars));
    return out;
  }

  PLit convert(const Literal& l, std::map<std::string, int>& vars) {
    PTerm atom{intern("p:" + l.atom.predicate() + "/" + std::to_string(l.atom.terms().size())),
               {}};
    for (const auto& t : l.atom.terms()) atom.args.push_back(convert(t, vars));
    return PLit{l.positive, std::move(atom)};
  }

  // Dedupes literals, renumbers variables, computes weight and mask. Returns false
  // for tautologies and for clauses that must be dropped.
  bool finalize(PClause& c, bool apply_weight_cap) {
    std::vector<PLit> lits;
    for (auto& l : c.lits)
      if (std::find(lits.begin(), lits.end(), l) == lits.end()) lits.push_back(std::move(l));
    for (std::size_t i = 0; i < lits.size(); ++i)
      for (std::size_t j = i + 1; j < lits.size(); ++j)
        if (lits[i].positive != lits[j].positive && lits[i].atom == lits[j].atom) return false;
    std::map<int, int> renum;
    c.lits.clear();
    c.weight = 0;
    c.mask = 0;
    for (const auto& l : lits) {
      PTerm atom = renumber(l.atom, renum);
      c.weight += term_weight(atom);
      c.mask |= std::uint64_t{1} << ((static_cast<unsigned>(atom.sym) * 2u +
                                      (l.positive ? 1u : 0u)) % 64u);
      c.lits.push_back({l.positive, std::move(atom)});
    }
    c.nvars = static_cast<int>(renum.size());
    if (apply_weight_cap && c.weight > limits_.max_clause_weight) {
      discarded_ = true;
      return false;
    }
    for (int k : all_)
      if (subsumes(clauses_[static_cast<std::size_t>(k)], c)) return false;
    return true;
  }

  static PTerm renumber(const PTerm& t, std::map<int, int>& renum) {
    if (t.is_var()) {
      auto [it, inserted] = renum.emplace(t.var(), static_cast<int>(renum.size()));
      return PTerm{-(it->second + 1), {}};
    }
    PTerm out{t.sym, {}};
    for (const auto& a : t.args) out.args.push_back(renumber(a, renum));
    return out;
  }

  int keep(PClause c) {
    int id = static_cast<int>(clauses_.size());
    by_weight_.push({c.weight, id});
    by_age_.push_back(id);
    clauses_.push_back(std::move(c));
    all_.push_back(id);
    return id;
  }

  int select(std::size_t pick) {
    bool by_age = pick % 5 == 4;
    for (;;) {
      int id = -1;
      if (by_age && !by_age_.empty()) {
        id = by_age_.front();
        by_age_.pop_front();
      } else if (!by_weight_.empty()) {
        id = by_weight_.top().second;
        by_weight_.pop();
      } else if (!by_age_.empty()) {
        id = by_age_.front();
        by_age_.pop_front();
      } else {
        return -1;
      }
      if (selected_.insert(id).second) return id;
    }
  }

  // Adds a derived clause; returns its id when it is the empty clause.
  int add_derived(PClause c) {
    ++generated_;
    if (!finalize(c, /*apply_weight_cap=*/true)) return -1;
    bool empty = c.lits.empty();
    int id = keep(std::move(c));
    return empty ? id : -1;
  }

  int infer(int given_id) {
    // Copy: clauses_ may reallocate while deriving.
    const PClause given = clauses_[static_cast<std::size_t>(given_id)];
    // Factoring.
    for (std::size_t i = 0; i < given.lits.size(); ++i) {
      for (std::size_t j = i + 1; j < given.lits.size(); ++j) {
        const auto& a = given.lits[i];
        const auto& b = given.lits[j];
        if (a.positive != b.positive || a.atom.sym != b.atom.sym) continue;
        Bindings bs(static_cast<std::size_t>(given.nvars));
        if (!bs.unify(&a.atom, 0, &b.atom, 0)) continue;
        PClause f;
        std::map<int, int> renum;
        for (std::size_t k = 0; k < given.lits.size(); ++k) {
          if (k == j) continue;
          f.lits.push_back({given.lits[k].positive, bs.apply(given.lits[k].atom, 0, renum)});
        }
        f.parents = {given_id};
        if (int e = add_derived(std::move(f)); e >= 0) return e;
      }
    }
    // Binary resolution against every processed clause, the given one included.
    for (std::size_t p = 0; p < processed_.size(); ++p) {
      int partner_id = processed_[p];
      const PClause partner = clauses_[static_cast<std::size_t>(partner_id)];
      int off = given.nvars;
      for (std::size_t i = 0; i < given.lits.size(); ++i) {
        for (std::size_t j = 0; j < partner.lits.size(); ++j) {
          const auto& a = given.lits[i];
          const auto& b = partner.lits[j];
          if (a.positive == b.positive || a.atom.sym != b.atom.sym) continue;
          Bindings bs(static_cast<std::size_t>(given.nvars + partner.nvars));
          if (!bs.unify(&a.atom, 0, &b.atom, off)) continue;
          PClause res;
          std::map<int, int> renum;
          for (std::size_t k = 0; k < given.lits.size(); ++k)
            if (k != i)
              res.lits.push_back({given.lits[k].positive, bs.apply(given.lits[k].atom, 0, renum)});
          for (std::size_t k = 0; k < partner.lits.size(); ++k)
            if (k != j)
              res.lits.push_back(
                  {partner.lits[k].positive, bs.apply(partner.lits[k].atom, off, renum)});
          res.parents = {given_id, partner_id};
          if (int e = add_derived(std::move(res)); e >= 0) return e;
        }
      }
    }
    return -1;
  }

  std::vector<std::string> used_names(int empty_id) const {
    std::set<int> seen;
    std::vector<int> stack{empty_id};
    std::set<std::string> names;
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      if (!seen.insert(id).second) continue;
      const auto& c = clauses_[static_cast<std::size_t>(id)];
      if (c.origin >= 0) names.insert(origins_[static_cast<std::size_t>(c.origin)]);
      for (int p : c.parents) stack.push_back(p);
    }
    return {names.begin(), names.end()};
  }

  const Limits& limits_;
  std::unordered_map<std::string, int> symbols_;
  std::vector<std::string> origins_;
  std::vector<PClause> inputs_;
  std::vector<PClause> clauses_;
  std::vector<int> all_;
  std::vector<int> processed_;
  std::set<int> selected_;
  std::priority_queue<std::pair<std::size_t, int>, std::vector<std::pair<std::size_t, int>>,
                      std::greater<>>
      by_weight_;
  std::deque<int> by_age_;
  std::size_t generated_ = 0;
  bool discarded_ = false;
};

}  // namespace

RunResult saturate(const ClausalForm& clauses, const Limits& limits) {
  limits.validate();
  return Saturator(clauses, limits).run();
}

std::string format_transcript(const RunResult& r, const std::string& problem_name) {
  std::string out = "% " + r.system + " (" + std::to_string(r.generated_clauses) +
                    " clauses generated, " + std::to_string(r.cpu_millis) + " ms cpu)\n";
  if (!r.diagnostic.empty()) out += "% " + r.diagnostic + "\n";
  out += "% SZS status " + std::string(szs_name(r.status)) + " for " + problem_name + "\n";
  if (r.used_axioms) {
    out += "% SZS output start ListOfReferences for " + problem_name + "\n";
    for (const auto& n : *r.used_axioms)
      out += "fof(" + n + ", plain, $true, file('" + problem_name + "', " + n + ")).\n";
    out += "% SZS output end ListOfReferences for " + problem_name + "\n";
  }
  return out;
}

}  // namespace mflar
