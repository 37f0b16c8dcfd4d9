#include "mflar/advisor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mflar/library.hpp"

namespace mflar {

std::uint64_t AdvisorModel::cofire_count(const std::string& premise,
                                         const std::string& symbol) const {
  auto p = cofire.find(premise);
  if (p == cofire.end()) return 0;
  auto s = p->second.find(symbol);
  return s == p->second.end() ? 0 : s->second;
}

AdvisorModel train(const std::vector<TrainingExample>& examples) {
  AdvisorModel m;
  for (const auto& e : examples) {
    ++m.total_examples;
    m.symbol_vocabulary.insert(e.goal_symbols.begin(), e.goal_symbols.end());
    for (const auto& p : e.used_premises) {
      ++m.premise_count[p];
      auto& row = m.cofire[p];
      for (const auto& s : e.goal_symbols) ++row[s];
    }
  }
  return m;
}

double hint_score(const AdvisorModel& m, const std::string& premise,
                  const std::set<std::string>& goal_symbols) {
  auto it = m.premise_count.find(premise);
  double n = it == m.premise_count.end() ? 0.0 : static_cast<double>(it->second);
  double total = static_cast<double>(m.total_examples);
  double known = static_cast<double>(m.premise_count.size());
  double score = std::log((n + 1.0) / (total + known));
  const std::map<std::string, std::uint64_t>* row = nullptr;
  if (auto c = m.cofire.find(premise); c != m.cofire.end()) row = &c->second;
  for (const auto& s : goal_symbols) {
    double c = 0;
    if (row) {
      auto f = row->find(s);
      if (f != row->end()) c = static_cast<double>(f->second);
    }
    score += std::log((c + 1.0) / (n + 2.0));
  }
  return score;
}

HintList suggest_hints(const AdvisorModel& m, const std::set<std::string>& goal_symbols,
                       std::size_t k, const PremiseFilter& eligible) {
  if (k == 0) throw AdvisorError("k must be positive");
  HintList all;
  all.reserve(m.premise_count.size());
  for (const auto& [p, n] : m.premise_count) {
    if (eligible && !eligible(p)) continue;
    all.push_back({p, hint_score(m, p, goal_symbols)});
  }
  auto better = [](const Hint& a, const Hint& b) {
    return a.score != b.score ? a.score > b.score : a.name < b.name;
  };
  std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), better);
  all.resize(n);
  return all;
}

std::set<std::string> goal_symbols(const Obligation& o) {
  Formula f = relativize(o.conjecture, o.reservations);
  std::set<std::string> out = predicates_of(f);
  for (const auto& s : functors_of(f)) {
    auto sc = std::find_if(o.scope.begin(), o.scope.end(),
                           [&](const ScopeConstant& c) { return c.name == s; });
    if (sc != o.scope.end())
      out.insert(sc->type);
    else
      out.insert(s);
  }
  return out;
}

std::vector<TrainingExample> harvest(const VerificationReport& report,
                                     const std::map<std::string, TptpProblem>& problems,
                                     const std::map<std::string, RunResult>& results) {
  std::vector<TrainingExample> out;
  for (const auto& o : report.obligations) {
    const StepReport* step = report.step_for(o.id);
    bool verified = step && step->status == StepStatus::verified;
    const RunResult* run = nullptr;
    if (auto r = results.find(o.id); r != results.end() && r->second.status == SzsStatus::theorem)
      run = &r->second;
    if (!verified && !run) continue;

    TrainingExample e;
    e.goal_symbols = goal_symbols(o);
    if (run && run->used_axioms) {
      e.used_premises.insert(run->used_axioms->begin(), run->used_axioms->end());
    } else if (auto p = problems.find(o.id); p != problems.end()) {
      for (const auto& a : p->second.axioms) e.used_premises.insert(a.name);
    } else {
      for (const auto& r : o.refs) e.used_premises.insert(r.name);
    }
    e.used_premises.erase(o.id);
    if (e.goal_symbols.empty() || e.used_premises.empty()) continue;
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

constexpr std::string_view kHeader = "advisor-model v1";

void check_field(const std::string& s) {
  if (s.empty() || s.find_first_of("\t\n\r") != std::string::npos)
    throw AdvisorError("name not storable in model file: '" + s + "'");
}

std::uint64_t parse_count(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used);
    if (used != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw AdvisorError("line " + std::to_string(line) + ": bad count '" + s + "'");
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto t = line.find('\t', start);
    out.push_back(line.substr(start, t - start));
    if (t == std::string::npos) return out;
    start = t + 1;
  }
}

}  // namespace

std::string serialize_model(const AdvisorModel& m) {
  std::size_t pairs = 0;
  for (const auto& [p, row] : m.cofire) pairs += row.size();
  std::string out(kHeader);
  out += "\ntotal\t" + std::to_string(m.total_examples) + "\n";
  out += "symbols\t" + std::to_string(m.symbol_vocabulary.size()) + "\n";
  for (const auto& s : m.symbol_vocabulary) {
    check_field(s);
    out += s + "\n";
  }
  out += "premises\t" + std::to_string(m.premise_count.size()) + "\n";
  for (const auto& [p, n] : m.premise_count) {
    check_field(p);
    out += p + "\t" + std::to_string(n) + "\n";
  }
  out += "cofire\t" + std::to_string(pairs) + "\n";
  for (const auto& [p, row] : m.cofire)
    for (const auto& [s, n] : row) out += p + "\t" + s + "\t" + std::to_string(n) + "\n";
  return out;
}

AdvisorModel parse_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::string {
    if (!std::getline(in, line)) throw AdvisorError("model file truncated");
    ++lineno;
    return line;
  };
  auto section = [&](const std::string& name) {
    auto f = split_tabs(next());
    if (f.size() != 2 || f[0] != name)
      throw AdvisorError("line " + std::to_string(lineno) + ": expected '" + name + "' header");
    return parse_count(f[1], lineno);
  };
  if (next() != kHeader) throw AdvisorError("not an advisor model (bad header)");
  AdvisorModel m;
  m.total_examples = section("total");
  for (auto n = section("symbols"); n > 0; --n) m.symbol_vocabulary.insert(next());
  for (auto n = section("premises"); n > 0; --n) {
    auto f = split_tabs(next());
    if (f.size() != 2) throw AdvisorError("line " + std::to_string(lineno) + ": bad premise row");
    m.premise_count[f[0]] = parse_count(f[1], lineno);
  }
  for (auto n = section("cofire"); n > 0; --n) {
    auto f = split_tabs(next());
    if (f.size() != 3) throw AdvisorError("line " + std::to_string(lineno) + ": bad cofire row");
    m.cofire[f[0]][f[1]] = parse_count(f[2], lineno);
  }
  if (std::getline(in, line) && !line.empty())
    throw AdvisorError("line " + std::to_string(lineno + 1) + ": trailing data");
  return m;
}

void save_model(const AdvisorModel& m, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << serialize_model(m);
    if (!out) throw AdvisorError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

AdvisorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AdvisorError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_model(os.str());
}

std::string serialize_examples(const std::vector<TrainingExample>& examples) {
  std::string out;
  for (const auto& e : examples) {
    nlohmann::json j{{"goal", e.goal_symbols}, {"premises", e.used_premises}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<TrainingExample> parse_examples(std::string_view text) {
  std::vector<TrainingExample> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TrainingExample e;
      e.goal_symbols = j.at("goal").get<std::set<std::string>>();
      e.used_premises = j.at("premises").get<std::set<std::string>>();
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw AdvisorError("line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace mflar
