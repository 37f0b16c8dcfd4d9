#include "mflar/render.hpp"

#include "json.hpp"
#include "mflar/names.hpp"

namespace mflar {

using nlohmann::json;

std::string functor_anchor(const Article& a, const LibraryStore& lib, const std::string& name) {
  if (a.functor(name)) return "#func-" + name;
  if (const ExportedItem* dt = lib.functor_type(name)) return "/library/" + dt->name;
  return {};
}

namespace {

std::string_view kind_name(StepKind k) {
  switch (k) {
    case StepKind::let: return "let";
    case StepKind::assume: return "assume";
    case StepKind::aux: return "aux";
    case StepKind::thus: return "thus";
  }
  return "?";
}

std::string item_mptp_name(const Article& a, const Item& it) {
  return format_name({it.kind == ItemKind::theorem ? NameKind::theorem : NameKind::definition,
                      it.ordinal, 0, a.name});
}

json pos_json(const SourcePos& p) { return {{"line", p.line}, {"col", p.column}}; }

struct ItemContext {
  const Article& a;
  const Item& item;
  const ItemReport* report;
  const LibraryStore& lib;

  const StepReport* step(std::size_t index) const {
    if (!report) return nullptr;
    for (const auto& s : report->steps)
      if (s.step_index == index) return &s;
    return nullptr;
  }

  json ref(const Reference& r) const {
    json j{{"cited", r.name}};
    switch (r.target) {
      case RefTarget::library:
        j["name"] = r.name;
        j["kind"] = "library";
        j["anchor"] = "/library/" + r.name;
        break;
      case RefTarget::local_item: {
        const Item& target = a.items.at(r.index);
        j["name"] = item_mptp_name(a, target);
        j["kind"] = "item";
        j["anchor"] = "#item-" + target.label;
        break;
      }
      case RefTarget::local_step: {
        const StepReport* s = step(r.index);
        j["name"] = s && s->e_ordinal > 0
                        ? json(format_name({NameKind::local_prop, s->e_ordinal, item.position, a.name}))
                        : json(nullptr);
        j["kind"] = "step";
        j["anchor"] = "#step-" + std::to_string(item.position) + "-" + std::to_string(r.index);
        break;
      }
    }
    return j;
  }

  json proof(const Proof& p) const {
    json steps = json::array();
    for (const auto& s : p.steps) {
      json j{{"index", s.index},
             {"kind", kind_name(s.kind)},
             {"anchor", "#step-" + std::to_string(item.position) + "-" + std::to_string(s.index)},
             {"pos", pos_json(s.pos)}};
      j["label"] = s.label ? json(*s.label) : json(nullptr);
      if (!s.vars.empty()) j["vars"] = s.vars;
      j["formula"] = s.formula ? json(print_formula(*s.formula)) : json(nullptr);
      const StepReport* r = step(s.index);
      j["thesis_after"] = r ? json(r->thesis_after) : json(nullptr);
      j["obligation_id"] = r && r->obligation_id ? json(*r->obligation_id) : json(nullptr);
      j["status"] = r && r->status ? json(step_status_name(*r->status)) : json(nullptr);
      j["reason"] = r && !r->reason.empty() ? json(r->reason) : json(nullptr);
      if (s.just && s.just->kind == Justification::Kind::by) {
        j["justification"] = "by";
        json refs = json::array();
        for (const auto& ref_ : s.just->refs) refs.push_back(ref(ref_));
        j["refs"] = refs;
      } else if (s.just && s.just->proof) {
        j["justification"] = "proof";
        j["proof"] = proof(*s.just->proof);
      } else {
        j["justification"] = nullptr;
      }
      steps.push_back(std::move(j));
    }
    return steps;
  }
};

}  // namespace

std::string render_model(const Article& a, const VerificationReport& report,
                         const LibraryStore& lib) {
  json doc;
  doc["article"] = a.name;

  json tokens = json::array();
  for (const auto& t : a.identifiers) {
    std::string anchor = t.anchor;
    if (anchor.empty() && t.role == TokenRole::functor) anchor = functor_anchor(a, lib, t.text);
    tokens.push_back({{"offset", t.offset},
                      {"length", t.length},
                      {"line", t.pos.line},
                      {"col", t.pos.column},
                      {"text", t.text},
                      {"kind", token_role_name(t.role)},
                      {"anchor", anchor.empty() ? json(nullptr) : json(anchor)}});
  }
  doc["tokens"] = tokens;

  json res = json::array();
  for (const auto& r : a.reservations)
    res.push_back({{"variable", r.variable}, {"type", r.type}, {"anchor", "#reserve-" + r.variable}});
  doc["reservations"] = res;

  json funcs = json::array();
  for (const auto& f : a.functors) {
    funcs.push_back({{"name", f.name},
                     {"params", f.params},
                     {"result_type", f.result_type},
                     {"mptp_name", format_name({NameKind::functor_type, f.ordinal, 0, a.name})},
                     {"anchor", "#func-" + f.name},
                     {"pos", pos_json(f.pos)}});
  }
  doc["functors"] = funcs;

  json items = json::array();
  for (const auto& it : a.items) {
    const ItemReport* ir = nullptr;
    for (const auto& r : report.items)
      if (r.label == it.label) ir = &r;
    ItemContext ctx{a, it, ir, lib};
    json j{{"label", it.label},
           {"kind", it.kind == ItemKind::theorem ? "theorem" : "definition"},
           {"position", it.position},
           {"mptp_name", item_mptp_name(a, it)},
           {"anchor", "#item-" + it.label},
           {"formula", print_formula(it.formula)},
           {"pos", pos_json(it.pos)}};
    j["steps"] = it.proof ? ctx.proof(*it.proof) : json::array();
    // Without a proof the thesis is the statement itself.
    if (!it.proof) j["thesis"] = print_formula(it.formula);
    j["errors"] = ir ? json(ir->errors) : json::array();
    items.push_back(std::move(j));
  }
  doc["items"] = items;
  return doc.dump(2);
}

}  // namespace mflar
