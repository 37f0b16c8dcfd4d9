#include "mflar/service.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mflar/advisor.hpp"
#include "mflar/article.hpp"
#include "mflar/library.hpp"
#include "mflar/names.hpp"
#include "mflar/render.hpp"
#include "mflar/systems.hpp"
#include "mflar/tptp.hpp"
#include "mflar/verifier.hpp"

namespace mflar {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view job_state_name(JobState s) {
  switch (s) {
    case JobState::received: return "Received";
    case JobState::parsed: return "Parsed";
    case JobState::verified: return "Verified";
    case JobState::generating: return "Generating";
    case JobState::ready: return "Ready";
    case JobState::failed: return "Failed";
  }
  return "?";
}

std::optional<JobState> parse_job_state(std::string_view s) {
  for (auto st : {JobState::received, JobState::parsed, JobState::verified, JobState::generating,
                  JobState::ready, JobState::failed})
    if (job_state_name(st) == s) return st;
  return std::nullopt;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_atomic(const fs::path& p, const std::string& text) {
  auto tmp = p.parent_path() / ("." + p.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

Response json_response(int status, const json& body) {
  return {status, "application/json", body.dump(2) + "\n"};
}

Response error_response(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  return json_response(status, extra);
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string html_page(const std::string& title, const std::string& body) {
  return "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + html_escape(title) +
         "</title></head>\n<body>\n<h1>" + html_escape(title) + "</h1>\n" + body + "\n</body></html>\n";
}

bool wants_html(const std::string& accept) {
  return accept.find("text/html") != std::string::npos &&
         accept.find("application/json") == std::string::npos;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Bounded set of background threads with an idle barrier.
class WorkerPool {
 public:
  explicit WorkerPool(unsigned n) {
    for (unsigned i = 0; i < std::max(1u, n); ++i) threads_.emplace_back([this] { loop(); });
  }
  ~WorkerPool() {
    {
      std::lock_guard lk(m_);
      stop_ = true;
    }
    cv_.notify_all();
    threads_.clear();
  }

  void post(std::function<void()> f) {
    {
      std::lock_guard lk(m_);
      queue_.push_back(std::move(f));
      ++pending_;
    }
    cv_.notify_one();
  }

  void wait_idle() {
    std::unique_lock lk(m_);
    idle_.wait(lk, [&] { return pending_ == 0; });
  }

 private:
  void loop() {
    for (;;) {
      std::function<void()> f;
      {
        std::unique_lock lk(m_);
        cv_.wait(lk, [&] { return stop_ || !queue_.empty(); });
        if (queue_.empty()) return;
        f = std::move(queue_.front());
        queue_.pop_front();
      }
      try {
        f();
      } catch (...) {
        // Tasks record their own failures.
      }
      {
        std::lock_guard lk(m_);
        --pending_;
      }
      idle_.notify_all();
    }
  }

  std::mutex m_;
  std::condition_variable cv_;
  std::condition_variable idle_;
  std::deque<std::function<void()>> queue_;
  std::size_t pending_ = 0;
  bool stop_ = false;
  std::vector<std::jthread> threads_;
};

struct Job {
  std::mutex m;
  std::string id;
  fs::path dir;
  JobState state = JobState::received;
  std::string reason;
  std::vector<std::pair<std::string, std::string>> timestamps;
  std::string article_name;
  std::string submitted_name;
  std::size_t failed_steps = 0;
  std::size_t obligation_count = 0;
  bool installed = false;

  // Rebuilt from the source after a restart.
  std::shared_ptr<const Article> article;
  std::shared_ptr<const VerificationReport> report;
  std::shared_ptr<const ExportedArticle> local;
  std::map<std::string, RunResult> theorem_runs;
  std::map<std::string, int> next_seq;

  json state_doc() const {
    json ts = json::array();
    for (const auto& [s, t] : timestamps) ts.push_back({{"state", s}, {"at", t}});
    json j{{"id", id},
           {"state", job_state_name(state)},
           {"article", article_name.empty() ? json(nullptr) : json(article_name)},
           {"timestamps", ts},
           {"failed_steps", failed_steps},
           {"obligations", obligation_count},
           {"installed", installed}};
    j["reason"] = reason.empty() ? json(nullptr) : json(reason);
    if (!submitted_name.empty()) j["name"] = submitted_name;
    return j;
  }
};

bool at_least(JobState s, JobState want) {
  if (s == JobState::failed) return false;
  return static_cast<int>(s) >= static_cast<int>(want);
}

const std::regex kSafeFile("[A-Za-z0-9_][A-Za-z0-9_.+-]*");

}  // namespace

struct Service::Impl {
  ServiceConfig cfg;
  std::vector<ProverSystem> systems;

  std::mutex shared_m;
  std::shared_ptr<const LibraryStore> lib = std::make_shared<LibraryStore>();
  std::shared_ptr<const AdvisorModel> advisor = std::make_shared<AdvisorModel>();

  std::mutex jobs_m;
  std::map<std::string, std::shared_ptr<Job>> jobs;
  std::mt19937_64 id_rng{std::random_device{}()};

  std::mutex install_m;
  std::atomic<bool> stopping{false};
  // Last member: joined first on destruction.
  std::unique_ptr<WorkerPool> pool;

  fs::path jobs_dir() const { return cfg.workdir / "jobs"; }
  fs::path library_dir() const { return cfg.workdir / "library"; }
  fs::path model_path() const { return cfg.workdir / "advisor.model"; }
  fs::path training_path() const { return library_dir() / "training.jsonl"; }

  std::shared_ptr<const LibraryStore> library() {
    std::lock_guard lk(shared_m);
    return lib;
  }
  std::shared_ptr<const AdvisorModel> model() {
    std::lock_guard lk(shared_m);
    return advisor;
  }

  // ---- persistence -------------------------------------------------------

  void save_job(const Job& j) { write_atomic(j.dir / "job.json", j.state_doc().dump(2) + "\n"); }

  void log(Job& j, const std::string& event) {
    std::ofstream out(j.dir / "job.log", std::ios::app | std::ios::binary);
    out << cfg.clock() << " " << event << "\n";
  }

  // Caller holds j.m. Forward moves only.
  void advance(Job& j, JobState to) {
    if (j.state == JobState::failed || (to != JobState::failed && at_least(j.state, to))) return;
    j.state = to;
    std::string ts = cfg.clock();
    j.timestamps.emplace_back(std::string(job_state_name(to)), ts);
    save_job(j);
    std::ofstream out(j.dir / "job.log", std::ios::app | std::ios::binary);
    if (to == JobState::failed)
      out << ts << " failed " << j.reason << "\n";
    else
      out << ts << " state " << job_state_name(to) << "\n";
  }

  void fail(Job& j, const std::string& reason) {
    j.reason = reason;
    advance(j, JobState::failed);
  }

  // ---- pipeline ----------------------------------------------------------

  // Parse and verify, leaving the in-memory view populated. Caller holds j.m.
  void materialize(Job& j) {
    if (j.report) return;
    auto a = std::make_shared<Article>(parse_article(read_file(j.dir / "source.mfl")));
    auto lib_now = library();
    auto rep = std::make_shared<VerificationReport>(
        verify_article(*a, *lib_now, cfg.verify_workers, cfg.checker_limits));
    j.article = a;
    j.local = std::make_shared<ExportedArticle>(translate_article(*a));
    j.report = rep;
    j.article_name = a->name;
    j.failed_steps = rep->failed_steps();
    j.obligation_count = rep->obligations.size();
    write_atomic(j.dir / "report.json", report_json(*rep) + "\n");
    write_atomic(j.dir / "render.json", render_model(*a, *rep, *lib_now) + "\n");
  }

  void process(const std::shared_ptr<Job>& jp) {
    Job& j = *jp;
    {
      std::lock_guard lk(j.m);
      if (j.state == JobState::failed || j.state == JobState::ready) return;
      std::shared_ptr<Article> a;
      try {
        a = std::make_shared<Article>(parse_article(read_file(j.dir / "source.mfl")));
      } catch (const std::exception& e) {
        fail(j, std::string("parse error: ") + e.what());
        return;
      }
      j.article_name = a->name;
      advance(j, JobState::parsed);
      try {
        materialize(j);
      } catch (const std::exception& e) {
        fail(j, std::string("verification error: ") + e.what());
        return;
      }
      advance(j, JobState::verified);
      log(j, "verified " + std::to_string(j.obligation_count) + " obligations, " +
                 std::to_string(j.failed_steps) + " failed");
      advance(j, JobState::generating);
    }
    pool->post([this, jp] { generate(jp); });
  }

  void generate(const std::shared_ptr<Job>& jp) {
    Job& j = *jp;
    std::shared_ptr<const VerificationReport> rep;
    std::shared_ptr<const ExportedArticle> local;
    {
      std::lock_guard lk(j.m);
      if (j.state != JobState::generating) return;
      try {
        materialize(j);
      } catch (const std::exception& e) {
        fail(j, std::string("verification error: ") + e.what());
        return;
      }
      rep = j.report;
      local = j.local;
      // Leftovers of an interrupted write.
      std::error_code ec;
      if (fs::exists(j.dir / "problems"))
        for (const auto& e : fs::directory_iterator(j.dir / "problems", ec))
          if (e.path().filename().string().starts_with(".")) fs::remove(e.path(), ec);
    }
    auto lib_now = library();
    auto sink = [&](const TptpProblem& p, const std::string& text) {
      if (stopping) return false;
      write_problem_file(j.dir / "problems", p, text);
      return true;
    };
    auto log_line = [&](const std::string& line) {
      std::lock_guard lk(j.m);
      std::ofstream(j.dir / "job.log", std::ios::app | std::ios::binary) << line << "\n";
    };
    GenerationLog g;
    try {
      g = generate_all(rep->obligations, *lib_now, *local, sink, log_line, cfg.clock);
    } catch (const std::exception& e) {
      std::lock_guard lk(j.m);
      fail(j, std::string("generation error: ") + e.what());
      return;
    }
    std::lock_guard lk(j.m);
    if (g.finished) advance(j, JobState::ready);
  }

  void resume(const std::shared_ptr<Job>& jp) {
    {
      std::lock_guard lk(jp->m);
      log(*jp, "resumed in state " + std::string(job_state_name(jp->state)));
    }
    pool->post([this, jp] {
      if (jp->state == JobState::generating) {
        generate(jp);
      } else {
        process(jp);
      }
    });
  }

  void load_jobs() {
    std::error_code ec;
    if (!fs::exists(jobs_dir())) return;
    for (const auto& e : fs::directory_iterator(jobs_dir(), ec)) {
      if (!e.is_directory() || !fs::exists(e.path() / "job.json")) continue;
      auto j = std::make_shared<Job>();
      j->dir = e.path();
      try {
        json doc = json::parse(read_file(e.path() / "job.json"));
        j->id = doc.at("id").get<std::string>();
        j->state = parse_job_state(doc.at("state").get<std::string>()).value();
        if (doc.contains("reason") && doc["reason"].is_string()) j->reason = doc["reason"];
        if (doc.contains("article") && doc["article"].is_string()) j->article_name = doc["article"];
        if (doc.contains("name")) j->submitted_name = doc["name"];
        j->failed_steps = doc.value("failed_steps", std::size_t{0});
        j->obligation_count = doc.value("obligations", std::size_t{0});
        j->installed = doc.value("installed", false);
        for (const auto& t : doc.at("timestamps")) j->timestamps.emplace_back(t.at("state"), t.at("at"));
      } catch (const std::exception&) {
        // A job file that cannot be read is left alone; the directory stays for inspection.
        continue;
      }
      jobs.emplace(j->id, j);
      // Verified is a transient state: generation had not been recorded yet.
      if (j->state == JobState::verified) {
        std::lock_guard lk(j->m);
        advance(*j, JobState::generating);
      }
      if (j->state != JobState::ready && j->state != JobState::failed) resume(j);
    }
  }

  void retrain() {
    std::vector<TrainingExample> ex;
    if (!cfg.training_fixture.empty()) {
      auto more = parse_examples(read_file(cfg.training_fixture));
      ex.insert(ex.end(), more.begin(), more.end());
    }
    if (fs::exists(training_path())) {
      auto more = parse_examples(read_file(training_path()));
      ex.insert(ex.end(), more.begin(), more.end());
    }
    auto m = std::make_shared<AdvisorModel>(train(ex));
    save_model(*m, model_path());
    std::lock_guard lk(shared_m);
    advisor = m;
  }

  // ---- lookups -----------------------------------------------------------

  std::shared_ptr<Job> find_job(const std::string& id) {
    std::lock_guard lk(jobs_m);
    auto it = jobs.find(id);
    return it == jobs.end() ? nullptr : it->second;
  }

  std::string new_id() {
    std::lock_guard lk(jobs_m);
    for (;;) {
      std::ostringstream os;
      os << "a" << std::hex << (id_rng() & 0xffffffffffffULL);
      if (!jobs.contains(os.str()) && !fs::exists(jobs_dir() / os.str())) return os.str();
    }
  }

  json describe(const Job& j, const std::string& name) {
    auto lib_now = library();
    if (const ExportedItem* it = lib_now->find(name)) {
      return {{"name", name}, {"kind", export_kind_name(it->kind)}, {"title", it->title},
              {"anchor", "/library/" + name}};
    }
    if (j.local) {
      if (const ExportedItem* it = j.local->find(name)) {
        std::string anchor = it->kind == ExportKind::functor_type ? "#func-" + it->source
                                                                  : "#item-" + it->source;
        return {{"name", name}, {"kind", export_kind_name(it->kind)}, {"title", it->title},
                {"anchor", anchor}};
      }
    }
    auto parsed = parse_name(name);
    if (parsed && j.article && j.report) {
      std::string label;
      for (const auto& it : j.article->items)
        if (it.position == parsed->item) label = it.label;
      if (parsed->kind == NameKind::local_prop) {
        for (const auto& ir : j.report->items) {
          if (ir.position != parsed->item) continue;
          for (const auto& s : ir.steps) {
            if (s.e_ordinal != parsed->ordinal) continue;
            std::string idx = std::to_string(s.step_index);
            return {{"name", name},
                    {"kind", "local-proposition"},
                    {"title", "step " + idx + " of " + label},
                    {"anchor", "#step-" + std::to_string(parsed->item) + "-" + idx}};
          }
        }
      }
      if (parsed->kind == NameKind::constant_type) {
        std::string c = format_name({NameKind::scope_constant, parsed->ordinal, parsed->item, parsed->article});
        return {{"name", name}, {"kind", "constant-type"}, {"title", "type of " + c + " in " + label},
                {"anchor", "#item-" + label}};
      }
    }
    return {{"name", name}, {"kind", "unknown"}, {"title", name}, {"anchor", nullptr}};
  }

  const Obligation* find_obligation(const Job& j, const std::string& oid) {
    if (!j.report) return nullptr;
    for (const auto& o : j.report->obligations)
      if (o.id == oid) return &o;
    return nullptr;
  }

  // ---- handlers ----------------------------------------------------------

  Response submit(const Request& r) {
    std::string text = r.body;
    std::string name;
    if (r.body.size() > cfg.max_body_bytes)
      return error_response(400, "article larger than " + std::to_string(cfg.max_body_bytes) + " bytes");
    auto first = r.body.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && r.body[first] == '{') {
      try {
        json doc = json::parse(r.body);
        text = doc.at("text").get<std::string>();
        if (doc.contains("name") && !doc["name"].is_null()) name = doc["name"].get<std::string>();
      } catch (const std::exception& e) {
        return error_response(400, std::string("bad submission document: ") + e.what());
      }
    }
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return error_response(400, "empty article");
    if (text.size() > cfg.max_body_bytes)
      return error_response(400, "article larger than " + std::to_string(cfg.max_body_bytes) + " bytes");

    auto j = std::make_shared<Job>();
    j->id = new_id();
    j->dir = jobs_dir() / j->id;
    j->submitted_name = name;
    fs::create_directories(j->dir);
    write_atomic(j->dir / "source.mfl", text);
    {
      std::lock_guard lk(j->m);
      j->timestamps.emplace_back("Received", cfg.clock());
      save_job(*j);
      log(*j, "state Received");
    }
    {
      std::lock_guard lk(jobs_m);
      jobs.emplace(j->id, j);
    }
    if (text.size() <= cfg.sync_verify_bytes)
      process(j);
    else
      pool->post([this, j] { process(j); });
    std::lock_guard lk(j->m);
    return json_response(201, {{"id", j->id}, {"state", job_state_name(j->state)}});
  }

  Response get_job(Job& j) {
    std::lock_guard lk(j.m);
    return json_response(200, j.state_doc());
  }

  Response get_render(Job& j, const Request& r) {
    std::string state;
    {
      std::lock_guard lk(j.m);
      state = job_state_name(j.state);
      if (!fs::exists(j.dir / "render.json"))
        return error_response(409, "article not verified yet", {{"state", state}});
    }
    std::string body = read_file(j.dir / "render.json");
    if (!wants_html(r.accept)) return {200, "application/json", body};
    return {200, "text/html; charset=utf-8", render_html(j, json::parse(body))};
  }

  std::string render_html(Job& j, const json& doc) {
    std::string src = read_file(j.dir / "source.mfl");
    std::string out = "<pre class=\"article\">";
    std::size_t at = 0;
    for (const auto& t : doc["tokens"]) {
      auto off = t["offset"].get<std::size_t>();
      auto len = t["length"].get<std::size_t>();
      out += html_escape(src.substr(at, off - at));
      std::string kind = t["kind"];
      std::string word = html_escape(src.substr(off, len));
      if (t["anchor"].is_string())
        out += "<a class=\"" + kind + "\" href=\"" + html_escape(t["anchor"].get<std::string>()) + "\">" + word + "</a>";
      else
        out += "<span class=\"" + kind + "\">" + word + "</span>";
      at = off + len;
    }
    out += html_escape(src.substr(std::min(at, src.size()))) + "</pre>\n<h2>Justifications</h2>\n<ul>\n";
    std::function<void(const json&, const std::string&)> steps = [&](const json& list, const std::string& item) {
      for (const auto& s : list) {
        if (s["obligation_id"].is_string()) {
          std::string oid = s["obligation_id"];
          out += "<li id=\"" + html_escape(s["anchor"].get<std::string>().substr(1)) + "\">" + html_escape(item) +
                 " step " + std::to_string(s["index"].get<int>()) + ": <code>" + html_escape(oid) +
                 "</code> " + html_escape(s["status"].is_string() ? s["status"].get<std::string>() : "") +
                 " <form method=\"post\" action=\"/articles/" + j.id + "/obligations/" + oid +
                 "/prove\"><button>by</button></form> thesis after: <code>" +
                 html_escape(s["thesis_after"].is_string() ? s["thesis_after"].get<std::string>() : "") +
                 "</code></li>\n";
        }
        if (s.contains("proof")) steps(s["proof"], item);
      }
    };
    for (const auto& it : doc["items"]) steps(it["steps"], it["label"]);
    out += "</ul>";
    return html_page(doc["article"].get<std::string>(), out);
  }

  Response get_log(Job& j, const Request& r) {
    std::string text;
    {
      std::lock_guard lk(j.m);
      text = read_file(j.dir / "job.log");
    }
    if (wants_html(r.accept)) return {200, "text/html; charset=utf-8", html_page("log " + j.id, "<pre>" + html_escape(text) + "</pre>")};
    return {200, "text/plain; charset=utf-8", text};
  }

  Response get_obligations(Job& j) {
    std::lock_guard lk(j.m);
    if (!at_least(j.state, JobState::verified) && !(j.state == JobState::failed && j.report))
      return error_response(409, "article not verified yet", {{"state", job_state_name(j.state)}});
    try {
      materialize(j);
    } catch (const std::exception& e) {
      return error_response(500, e.what());
    }
    json list = json::array();
    for (const auto& o : j.report->obligations) {
      const StepReport* s = j.report->step_for(o.id);
      list.push_back({{"id", o.id},
                      {"item", o.item_label},
                      {"step", o.step_index},
                      {"status", s && s->status ? json(step_status_name(*s->status)) : json(nullptr)},
                      {"generated", fs::exists(j.dir / "problems" / (o.id + ".p"))}});
    }
    return json_response(200, {{"id", j.id}, {"state", job_state_name(j.state)}, {"obligations", list}});
  }

  // Shared checks for obligation endpoints; sets `o` on success.
  std::optional<Response> obligation_guard(Job& j, const std::string& oid, const Obligation*& o,
                                           bool need_problem) {
    if (!at_least(j.state, JobState::verified) && !(j.state == JobState::failed && fs::exists(j.dir / "report.json")))
      return error_response(409, "article not verified yet", {{"state", job_state_name(j.state)}});
    try {
      materialize(j);
    } catch (const std::exception& e) {
      return error_response(500, e.what());
    }
    o = find_obligation(j, oid);
    if (!o) return error_response(404, "no obligation " + oid);
    if (need_problem && !fs::exists(j.dir / "problems" / (oid + ".p")))
      return error_response(409, "problem not yet generated", {{"state", job_state_name(j.state)}});
    return std::nullopt;
  }

  Response get_problem(Job& j, const std::string& oid) {
    std::lock_guard lk(j.m);
    const Obligation* o = nullptr;
    if (auto err = obligation_guard(j, oid, o, true)) return *err;
    return {200, "text/plain; charset=utf-8", read_file(j.dir / "problems" / (oid + ".p"))};
  }

  Response prove(Job& j, const std::string& oid, const Request& r) {
    json body = json::object();
    if (r.body.find_first_not_of(" \t\r\n") != std::string::npos) {
      try {
        body = json::parse(r.body);
      } catch (const std::exception& e) {
        return error_response(400, std::string("bad request body: ") + e.what());
      }
      if (!body.is_object()) return error_response(400, "request body must be an object");
    }
    std::string system_name(kInternalSystem);
    if (body.contains("system") && !body["system"].is_null()) {
      if (!body["system"].is_string()) return error_response(400, "system must be a string");
      system_name = body["system"];
    }
    const ProverSystem* sys = find_system(systems, system_name);
    if (!sys) return error_response(400, "unknown system " + system_name);
    Limits limits = cfg.user_limits;
    if (body.contains("cpu") && !body["cpu"].is_null()) {
      if (!body["cpu"].is_number() || !(body["cpu"].get<double>() > 0))
        return error_response(400, "cpu must be a positive number");
      limits.cpu_seconds = body["cpu"].get<double>();
      limits.wall_seconds = limits.cpu_seconds;
    } else if (sys->kind == SystemKind::external) {
      limits.cpu_seconds = sys->default_cpu;
      limits.wall_seconds = std::max(limits.wall_seconds, sys->default_cpu);
    }

    fs::path problem, out;
    int seq = 0;
    {
      std::lock_guard lk(j.m);
      const Obligation* o = nullptr;
      if (auto err = obligation_guard(j, oid, o, true)) return *err;
      if (!j.next_seq.contains(oid)) {
        int n = 0;
        std::error_code ec;
        if (fs::exists(j.dir / "runs"))
          for (const auto& e : fs::directory_iterator(j.dir / "runs", ec))
            n += e.path().filename().string().starts_with(oid + ".");
        j.next_seq[oid] = n;
      }
      seq = j.next_seq[oid]++;
      problem = j.dir / "problems" / (oid + ".p");
    }
    std::string file = oid + "." + sys->name + "." + std::to_string(seq) + ".out";
    out = j.dir / "runs" / file;
    RunResult res = run_system(*sys, problem, limits, out);

    std::lock_guard lk(j.m);
    log(j, "prove " + oid + " " + sys->name + " " + std::string(szs_name(res.status)) + " " +
               std::to_string(res.wall_millis) + "ms");
    json refs = json::array();
    bool reported = res.used_axioms.has_value();
    if (res.status == SzsStatus::theorem) {
      j.theorem_runs[oid] = res;
      std::vector<std::string> names;
      if (res.used_axioms) {
        names = *res.used_axioms;
      } else {
        for (const auto& f : tptp::parse(read_file(problem)))
          if (f.role != "conjecture") names.push_back(f.name);
      }
      for (const auto& n : names)
        if (n != oid) refs.push_back(describe(j, n));
    }
    json doc{{"obligation", oid},
             {"system", sys->name},
             {"status", szs_name(res.status)},
             {"cpu_millis", res.cpu_millis},
             {"wall_millis", res.wall_millis},
             {"used_references", refs},
             {"used_axioms_reported", reported},
             {"raw_output", "/articles/" + j.id + "/runs/" + file},
             {"hints_available", res.status != SzsStatus::theorem}};
    doc["diagnostic"] = res.diagnostic.empty() ? json(nullptr) : json(res.diagnostic);
    return json_response(200, doc);
  }

  Response hints(Job& j, const std::string& oid, const Request& r) {
    std::size_t k = 20;
    if (r.body.find_first_not_of(" \t\r\n") != std::string::npos) {
      json body;
      try {
        body = json::parse(r.body);
      } catch (const std::exception& e) {
        return error_response(400, std::string("bad request body: ") + e.what());
      }
      if (!body.is_object()) return error_response(400, "request body must be an object");
      if (body.contains("k") && !body["k"].is_null()) {
        if (!body["k"].is_number_integer() || body["k"].get<long long>() <= 0)
          return error_response(400, "k must be a positive integer");
        k = body["k"].get<std::size_t>();
      }
    }
    std::lock_guard lk(j.m);
    const Obligation* o = nullptr;
    if (auto err = obligation_guard(j, oid, o, false)) return *err;
    auto lib_now = library();
    auto m = model();
    std::set<std::string> earlier;
    for (const auto& it : j.article->items)
      if (it.position < o->item_position)
        earlier.insert(format_name({it.kind == ItemKind::theorem ? NameKind::theorem : NameKind::definition,
                                    it.ordinal, 0, j.article->name}));
    auto goal = goal_symbols(*o);
    auto t0 = std::chrono::steady_clock::now();
    HintList list = suggest_hints(*m, goal, k, [&](const std::string& n) {
      return lib_now->find(n) != nullptr || earlier.contains(n);
    });
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0).count();
    json out = json::array();
    for (const auto& h : list) {
      json d = describe(j, h.name);
      d["score"] = h.score;
      out.push_back(d);
    }
    log(j, "hints " + oid + " " + std::to_string(list.size()) + " " + std::to_string(micros) + "us");
    return json_response(200, {{"obligation", oid}, {"k", k}, {"goal_symbols", goal}, {"hints", out}});
  }

  Response get_run(Job& j, const std::string& file) {
    if (!std::regex_match(file, kSafeFile)) return error_response(404, "no such run");
    auto p = j.dir / "runs" / file;
    if (!fs::exists(p)) return error_response(404, "no such run");
    return {200, "text/plain; charset=utf-8", read_file(p)};
  }

  Response install(Job& j, const Request& r) {
    bool force = false;
    if (r.body.find_first_not_of(" \t\r\n") != std::string::npos) {
      try {
        json body = json::parse(r.body);
        force = body.value("force", false);
      } catch (const std::exception& e) {
        return error_response(400, std::string("bad request body: ") + e.what());
      }
    }
    std::lock_guard install_lk(install_m);
    std::lock_guard lk(j.m);
    if (!at_least(j.state, JobState::verified))
      return error_response(409, "article not verified", {{"state", job_state_name(j.state)}});
    try {
      materialize(j);
    } catch (const std::exception& e) {
      return error_response(500, e.what());
    }
    if (j.failed_steps > 0 && !force)
      return error_response(409, "article has failed steps", {{"failed_steps", j.failed_steps}});
    auto old = library();
    if (old->contains_article(j.article->name))
      return error_response(409, "article " + j.article->name + " already installed");
    auto next = std::make_shared<LibraryStore>(*old);
    try {
      next->add(*j.local);
    } catch (const LibraryError& e) {
      return error_response(409, e.what());
    }
    next->save(library_dir());

    std::map<std::string, TptpProblem> problems;
    for (const auto& o : j.report->obligations) {
      try {
        problems.emplace(o.id, generate_problem(o, *old, *j.local));
      } catch (const std::exception&) {
        // Ungeneratable obligations contribute no example.
      }
    }
    auto examples = harvest(*j.report, problems, j.theorem_runs);
    {
      std::ofstream(training_path(), std::ios::app | std::ios::binary) << serialize_examples(examples);
    }
    {
      std::lock_guard slk(shared_m);
      lib = next;
    }
    retrain();
    j.installed = true;
    save_job(j);
    log(j, "installed " + j.article->name + " (" + std::to_string(examples.size()) + " training examples)");
    json names = json::array();
    for (const auto& it : j.local->items) names.push_back(it.name);
    return json_response(200, {{"installed", j.article->name}, {"items", names},
                               {"training_examples", examples.size()}, {"forced", force && j.failed_steps > 0}});
  }

  Response get_library() {
    auto l = library();
    json items = json::array();
    for (const auto* it : l->items())
      items.push_back({{"name", it->name}, {"kind", export_kind_name(it->kind)}, {"title", it->title},
                       {"article", it->article}, {"anchor", "/library/" + it->name}});
    return json_response(200, {{"items", items}});
  }

  Response get_library_item(const std::string& name) {
    auto l = library();
    const ExportedItem* it = l->find(name);
    if (!it) return error_response(404, "no library item " + name);
    std::string source_anchor = it->kind == ExportKind::functor_type ? "#func-" + it->source : "#item-" + it->source;
    return json_response(200, {{"name", it->name},
                               {"kind", export_kind_name(it->kind)},
                               {"title", it->title},
                               {"article", it->article},
                               {"formula", tptp::format_formula(it->formula)},
                               {"symbols", it->symbols},
                               {"anchor", "/library/" + it->name},
                               {"source", it->source},
                               {"source_anchor", source_anchor}});
  }

  Response get_systems() {
    json list = json::array();
    for (const auto& s : systems)
      list.push_back({{"name", s.name},
                      {"kind", s.kind == SystemKind::internal ? "internal" : "external"},
                      {"default_cpu", s.kind == SystemKind::internal ? cfg.user_limits.cpu_seconds : s.default_cpu}});
    return json_response(200, {{"systems", list}});
  }

  Response route(const Request& r) {
    auto seg = split_path(r.path);
    const std::string& m = r.method;
    if (seg.empty()) return error_response(404, "not found");
    if (seg[0] == "library") {
      if (m != "GET") return error_response(405, "method not allowed");
      if (seg.size() == 1) return get_library();
      if (seg.size() == 2) return get_library_item(seg[1]);
      return error_response(404, "not found");
    }
    if (seg[0] == "systems" && seg.size() == 1 && m == "GET") return get_systems();
    if (seg[0] != "articles") return error_response(404, "not found");
    if (seg.size() == 1) {
      if (m == "POST") return submit(r);
      return error_response(405, "method not allowed");
    }
    auto j = find_job(seg[1]);
    if (!j) return error_response(404, "no article job " + seg[1]);
    if (seg.size() == 2 && m == "GET") return get_job(*j);
    if (seg.size() == 3) {
      if (seg[2] == "render" && m == "GET") return get_render(*j, r);
      if (seg[2] == "log" && m == "GET") return get_log(*j, r);
      if (seg[2] == "obligations" && m == "GET") return get_obligations(*j);
      if (seg[2] == "install" && m == "POST") return install(*j, r);
    }
    if (seg.size() == 4 && seg[2] == "runs" && m == "GET") return get_run(*j, seg[3]);
    if (seg.size() == 5 && seg[2] == "obligations") {
      if (seg[4] == "prove" && m == "POST") return prove(*j, seg[3], r);
      if (seg[4] == "hints" && m == "POST") return hints(*j, seg[3], r);
      if (seg[4] == "problem" && m == "GET") return get_problem(*j, seg[3]);
    }
    return error_response(404, "not found");
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  auto& d = *impl_;
  d.cfg = std::move(config);
  d.cfg.user_limits.validate();
  d.cfg.checker_limits.validate();
  fs::create_directories(d.jobs_dir());
  fs::create_directories(d.library_dir());
  d.systems = d.cfg.systems_db.empty() ? parse_system_db("") : load_system_db(d.cfg.systems_db);
  d.lib = std::make_shared<LibraryStore>(LibraryStore::load(d.library_dir()));
  // A stored model is trusted only if no fixture asks for a fresh fit.
  if (d.cfg.training_fixture.empty() && fs::exists(d.model_path()))
    d.advisor = std::make_shared<AdvisorModel>(load_model(d.model_path()));
  else
    d.retrain();
  d.pool = std::make_unique<WorkerPool>(d.cfg.background_workers);
  d.load_jobs();
}

Service::~Service() {
  impl_->stopping = true;
  impl_->pool.reset();
}

Response Service::handle(const Request& r) {
  Response res;
  try {
    res = impl_->route(r);
  } catch (const std::exception& e) {
    res = error_response(500, e.what());
  }
  if (wants_html(r.accept) && res.content_type == "application/json")
    res = {res.status, "text/html; charset=utf-8",
           html_page(r.method + " " + r.path, "<pre>" + html_escape(res.body) + "</pre>")};
  return res;
}

void Service::wait_idle() { impl_->pool->wait_idle(); }

const ServiceConfig& Service::config() const { return impl_->cfg; }

}  // namespace mflar
