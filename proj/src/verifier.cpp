#include "mflar/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "json.hpp"
#include "mflar/errors.hpp"
#include "mflar/names.hpp"
#include "mflar/problem.hpp"

namespace mflar {

using K = Formula::Kind;

ConstantNamer default_constant_namer() {
  return [](std::size_t n) { return "c" + std::to_string(n); };
}

ConstantNamer mptp_constant_namer(int item_position, const std::string& article) {
  return [item_position, article](std::size_t n) {
    return format_name({NameKind::scope_constant, static_cast<int>(n), item_position, article});
  };
}

namespace {

std::string step_name(const ProofStep& s) {
  switch (s.kind) {
    case StepKind::let: return "let (step " + std::to_string(s.index) + ")";
    case StepKind::assume: return "assume (step " + std::to_string(s.index) + ")";
    case StepKind::aux: return "step " + std::to_string(s.index) + " (" + *s.label + ")";
    case StepKind::thus: return "thus (step " + std::to_string(s.index) + ")";
  }
  return "";
}

bool is_scope_type_atom(const Formula& f, const std::vector<ScopeConstant>& scope) {
  if (!f.is(K::atom) || f.terms().size() != 1) return false;
  const Term& t = f.terms()[0];
  if (t.kind() != Term::Kind::constant) return false;
  for (const auto& c : scope)
    if (c.name == t.name() && c.type == f.predicate()) return true;
  return false;
}

std::vector<Formula> conjuncts(const Formula& f) {
  Formula g = flatten(f);
  if (g.is(K::conjunction)) return g.children();
  return {g};
}

}  // namespace

Thesis step_thesis(const Thesis& t, const ProofStep& s,
                   const std::map<std::string, std::string>& reservations,
                   const ConstantNamer& namer) {
  Thesis out = t;
  auto fail = [&](const std::string& expected) {
    throw SkeletonError(step_name(s) + ": expected " + expected + ", thesis is " +
                        print_formula(t.current));
  };
  switch (s.kind) {
    case StepKind::aux:
      return out;
    case StepKind::let: {
      for (const auto& v : s.vars) {
        if (!out.current.is(K::universal)) fail("a universally quantified thesis for `let " + v + "`");
        const auto& qvars = out.current.vars();
        const std::string& qv = qvars.front();
        auto lt = reservations.find(v);
        auto qt = reservations.find(qv);
        std::string type;
        if (qt != reservations.end() && lt != reservations.end() && qt->second != lt->second)
          fail("a variable of type " + lt->second + " for `let " + v + "` (" + qv + " is " + qt->second + ")");
        if (lt != reservations.end()) type = lt->second;
        else if (qt != reservations.end()) type = qt->second;
        else fail("a reserved type for `let " + v + "`");
        std::string c = namer(out.scope.size() + 1);
        std::vector<std::string> rest(qvars.begin() + 1, qvars.end());
        Formula body = rest.empty() ? out.current.body() : Formula::universal(rest, out.current.body());
        out.current = substitute(body, {{qv, Term::constant(c)}});
        out.scope.push_back({c, type, v});
        out.aliases.insert_or_assign(v, Term::constant(c));
      }
      return out;
    }
    case StepKind::assume: {
      Formula f = substitute(*s.formula, t.aliases);
      if (t.current.is(K::implication) && matches_structurally(t.current.children()[0], f)) {
        out.current = t.current.children()[1];
        return out;
      }
      if (is_scope_type_atom(f, t.scope) && !t.current.is(K::implication)) return out;
      fail("an implication whose antecedent is " + print_formula(f));
      return out;
    }
    case StepKind::thus: {
      Formula f = substitute(*s.formula, t.aliases);
      if (t.current.is(K::verum)) fail("something left to prove");
      if (matches_structurally(t.current, f)) {
        out.current = Formula::verum();
        return out;
      }
      auto have = conjuncts(t.current);
      if (have.size() > 1) {
        auto want = conjuncts(f);
        if (want.size() < have.size()) {
          bool prefix = true;
          for (std::size_t i = 0; i < want.size() && prefix; ++i)
            prefix = matches_structurally(have[i], want[i]);
          if (prefix) {
            out.current = conjoin({have.begin() + static_cast<std::ptrdiff_t>(want.size()), have.end()});
            return out;
          }
        }
      }
      fail("a thesis that is " + print_formula(f) + " or a conjunction starting with it");
      return out;
    }
  }
  return out;
}

std::string_view step_status_name(StepStatus s) {
  switch (s) {
    case StepStatus::verified: return "verified";
    case StepStatus::countersatisfiable: return "countersatisfiable";
    case StepStatus::gave_up: return "gaveup";
    case StepStatus::skeleton_error: return "skeleton_error";
  }
  return "gaveup";
}

bool ItemReport::ok() const {
  if (!errors.empty()) return false;
  for (const auto& s : steps)
    if (s.status && *s.status != StepStatus::verified) return false;
  return true;
}

std::map<std::string, std::string> VerificationReport::status_map() const {
  std::map<std::string, std::string> m;
  for (const auto& it : items)
    for (const auto& s : it.steps)
      if (s.status) m[it.label + ":" + std::to_string(s.step_index)] = step_status_name(*s.status);
  return m;
}

std::size_t VerificationReport::failed_steps() const {
  std::size_t n = 0;
  for (const auto& it : items) {
    n += it.errors.size();
    for (const auto& s : it.steps)
      if (s.status && *s.status != StepStatus::verified) ++n;
  }
  return n;
}

bool VerificationReport::all_ok() const { return failed_steps() == 0; }

const StepReport* VerificationReport::step_for(const std::string& id) const {
  for (const auto& it : items)
    for (const auto& s : it.steps)
      if (s.obligation_id == id) return &s;
  return nullptr;
}

namespace {

// Walks one item's proof: thesis tracking, e-ordinals, obligations.
class Walker {
 public:
  Walker(const Article& a, const Item& item, const LibraryStore& lib, ItemReport& rep,
         std::vector<Obligation>& out, bool strict_refs)
      : a_(a),
        item_(item),
        lib_(lib),
        rep_(rep),
        out_(out),
        strict_(strict_refs),
        res_(reservation_map(a)),
        base_namer_(mptp_constant_namer(item.position, a.name)) {}

  void run() {
    rep_.label = item_.label;
    rep_.kind = item_.kind;
    rep_.position = item_.position;
    if (!item_.proof) return;
    Thesis t{item_.formula, {}, {}};
    bool discharged = proof(t, *item_.proof);
    if (!discharged && !broken_) {
      rep_.errors.push_back("proof of " + item_.label + " ends with unproved thesis " +
                            print_formula(t.current));
    }
  }

 private:
  // Returns true iff the proof ends with a discharged thesis.
  bool proof(Thesis& t, const Proof& p) {
    bool broken_here = false;
    for (const auto& s : p.steps) {
      StepReport sr;
      sr.step_index = s.index;
      sr.kind = s.kind;
      sr.label = s.label;
      if (s.kind != StepKind::let) sr.e_ordinal = ++e_counter_;
      std::optional<Formula> stated;
      if (s.formula) stated = substitute(*s.formula, t.aliases);
      if (stated && s.label) {
        locals_.insert_or_assign(
            s.index, std::pair{format_name({NameKind::local_prop, sr.e_ordinal, item_.position, a_.name}),
                               *stated});
      }
      std::size_t slot = rep_.steps.size();
      rep_.steps.push_back(sr);

      if (s.just && s.just->kind == Justification::Kind::by) {
        add_obligation(s, *stated, t, slot);
      }
      if (s.just && s.just->kind == Justification::Kind::proof) {
        Thesis inner{*stated, t.scope, t.aliases};
        if (!proof(inner, *s.just->proof) && !broken_) {
          rep_.errors.push_back("subproof of step " + std::to_string(s.index) +
                                " ends with an undischarged thesis");
        }
      }

      try {
        if (!broken_here) {
          t = step_thesis(t, s, res_, namer());
        } else if (s.kind == StepKind::let) {
          introduce_blind(t, s);
        }
      } catch (const SkeletonError& e) {
        broken_here = true;
        broken_ = true;
        rep_.steps[slot].status = StepStatus::skeleton_error;
        rep_.steps[slot].reason = e.what();
        if (s.kind == StepKind::let) introduce_blind(t, s);
      }
      rep_.steps[slot].thesis_after = broken_here ? "" : print_formula(t.current);
    }
    return !broken_here && t.current.is(K::verum);
  }

  ConstantNamer namer() {
    return [this](std::size_t) { return base_namer_(++constants_); };
  }

  // After a skeleton error, keep naming let variables so later steps still
  // produce meaningful obligations.
  void introduce_blind(Thesis& t, const ProofStep& s) {
    for (const auto& v : s.vars) {
      std::string c = base_namer_(++constants_);
      auto it = res_.find(v);
      t.scope.push_back({c, it == res_.end() ? "" : it->second, v});
      t.aliases.insert_or_assign(v, Term::constant(c));
    }
  }

  void add_obligation(const ProofStep& s, const Formula& stated, const Thesis& t, std::size_t slot) {
    Obligation o;
    o.id = format_name({NameKind::local_prop, rep_.steps[slot].e_ordinal, item_.position, a_.name});
    o.article = a_.name;
    o.item_label = item_.label;
    o.item_position = item_.position;
    o.step_index = s.index;
    o.e_ordinal = rep_.steps[slot].e_ordinal;
    o.conjecture = stated;
    o.scope = t.scope;
    o.reservations = res_;
    for (const auto& r : s.just->refs) {
      ResolvedRef rr;
      rr.cited = r.name;
      rr.target = r.target;
      switch (r.target) {
        case RefTarget::local_item: {
          const Item& cited = a_.items.at(r.index);
          rr.name = format_name({cited.kind == ItemKind::theorem ? NameKind::theorem : NameKind::definition,
                                 cited.ordinal, 0, a_.name});
          break;
        }
        case RefTarget::local_step: {
          const auto& [name, f] = locals_.at(r.index);
          rr.name = name;
          rr.formula = f;
          break;
        }
        case RefTarget::library:
          rr.name = r.name;
          if (!lib_.find(r.name)) {
            std::string msg = "unresolved library reference '" + r.name + "' in step " +
                              std::to_string(s.index) + " of " + item_.label;
            if (strict_) throw ReferenceError(r.name, msg);
            rep_.errors.push_back(msg);
            rep_.steps[slot].reason = msg;
          }
          break;
      }
      o.refs.push_back(std::move(rr));
    }
    rep_.steps[slot].obligation_id = o.id;
    out_.push_back(std::move(o));
  }

  const Article& a_;
  const Item& item_;
  const LibraryStore& lib_;
  ItemReport& rep_;
  std::vector<Obligation>& out_;
  bool strict_;
  std::map<std::string, std::string> res_;
  ConstantNamer base_namer_;
  std::size_t constants_ = 0;
  int e_counter_ = 0;
  bool broken_ = false;
  std::map<std::size_t, std::pair<std::string, Formula>> locals_;
};

}  // namespace

std::vector<Obligation> extract_obligations(const Article& a, const LibraryStore& lib) {
  std::vector<Obligation> out;
  for (const auto& item : a.items) {
    ItemReport rep;
    Walker(a, item, lib, rep, out, true).run();
  }
  return out;
}

StepStatus check_obligation(const Obligation& o, const LibraryStore& lib,
                            const ExportedArticle& local, const Limits& limits,
                            RunResult* details) {
  RunResult r;
  try {
    TptpProblem p = generate_problem(o, lib, local);
    r = saturate(clausify(p.axioms, p.conjecture), limits);
  } catch (const std::exception& e) {
    r.system = "mini-e";
    r.status = SzsStatus::error;
    r.diagnostic = e.what();
  }
  if (details) *details = r;
  switch (r.status) {
    case SzsStatus::theorem: return StepStatus::verified;
    case SzsStatus::counter_satisfiable: return StepStatus::countersatisfiable;
    default: return StepStatus::gave_up;
  }
}

VerificationReport verify_article(const Article& a, const LibraryStore& lib, unsigned workers,
                                  const Limits& limits) {
  VerificationReport report;
  report.article = a.name;
  ExportedArticle local = translate_article(a);
  struct Slot {
    std::size_t item;
    std::size_t step;
  };
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    report.items.emplace_back();
    std::size_t before = report.obligations.size();
    Walker(a, a.items[i], lib, report.items.back(), report.obligations, false).run();
    for (std::size_t k = before; k < report.obligations.size(); ++k) {
      const auto& steps = report.items.back().steps;
      for (std::size_t j = 0; j < steps.size(); ++j)
        if (steps[j].obligation_id == report.obligations[k].id) slots.push_back({i, j});
    }
  }

  struct Outcome {
    StepStatus status = StepStatus::gave_up;
    std::string diagnostic;
    std::int64_t millis = 0;
  };
  std::vector<Outcome> outcomes(report.obligations.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < outcomes.size(); i = next++) {
      auto start = std::chrono::steady_clock::now();
      RunResult rr;
      outcomes[i].status = check_obligation(report.obligations[i], lib, local, limits, &rr);
      outcomes[i].diagnostic = rr.status == SzsStatus::error ? rr.diagnostic : std::string(szs_name(rr.status));
      outcomes[i].millis = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(outcomes.size())));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
  }

  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    auto& s = report.items[slots[k].item].steps[slots[k].step];
    s.millis = outcomes[k].millis;
    // A skeleton error on the same step takes precedence.
    if (s.status) continue;
    s.status = outcomes[k].status;
    if (s.status != StepStatus::verified && s.reason.empty()) s.reason = outcomes[k].diagnostic;
  }
  return report;
}

std::string report_text_log(const VerificationReport& r) {
  std::string out;
  for (const auto& it : r.items)
    for (const auto& s : it.steps)
      if (s.obligation_id)
        out += *s.obligation_id + " " + std::string(step_status_name(*s.status)) + " " +
               std::to_string(s.millis) + "\n";
  return out;
}

std::string report_json(const VerificationReport& r) {
  using nlohmann::json;
  auto kind_name = [](StepKind k) {
    switch (k) {
      case StepKind::let: return "let";
      case StepKind::assume: return "assume";
      case StepKind::aux: return "aux";
      case StepKind::thus: return "thus";
    }
    return "let";
  };
  json items = json::array();
  for (const auto& it : r.items) {
    json steps = json::array();
    for (const auto& s : it.steps) {
      json js = {{"step", s.step_index}, {"kind", kind_name(s.kind)}, {"thesis", s.thesis_after}};
      if (s.label) js["label"] = *s.label;
      if (s.e_ordinal) js["e"] = s.e_ordinal;
      if (s.obligation_id) js["obligation"] = *s.obligation_id;
      if (s.status) js["status"] = step_status_name(*s.status);
      if (!s.reason.empty()) js["reason"] = s.reason;
      if (s.obligation_id) js["millis"] = s.millis;
      steps.push_back(std::move(js));
    }
    items.push_back({{"label", it.label},
                     {"kind", it.kind == ItemKind::theorem ? "theorem" : "definition"},
                     {"position", it.position},
                     {"ok", it.ok()},
                     {"errors", it.errors},
                     {"steps", std::move(steps)}});
  }
  json obligations = json::array();
  for (const auto& o : r.obligations) {
    json refs = json::array();
    for (const auto& ref : o.refs) refs.push_back(ref.name);
    const StepReport* s = r.step_for(o.id);
    obligations.push_back({{"id", o.id},
                           {"item", o.item_label},
                           {"step", o.step_index},
                           {"conjecture", print_formula(o.conjecture)},
                           {"references", std::move(refs)},
                           {"status", s && s->status ? step_status_name(*s->status) : "pending"}});
  }
  json doc = {{"article", r.article},
              {"ok", r.all_ok()},
              {"items", std::move(items)},
              {"obligations", std::move(obligations)}};
  return doc.dump(2);
}

}  // namespace mflar
