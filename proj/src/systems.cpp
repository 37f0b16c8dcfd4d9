#include "mflar/systems.hpp"

#include <dirent.h>
#include <fcntl.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "mflar/clausify.hpp"
#include "mflar/tptp.hpp"

namespace mflar {

ProverSystem internal_system() {
  ProverSystem s;
  s.name = std::string(kInternalSystem);
  s.kind = SystemKind::internal;
  return s;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_system_name(const std::string& n) {
  static const std::regex re("[A-Za-z0-9_.+-]+");
  return std::regex_match(n, re);
}

void check_template(const std::string& t, int line) {
  int s_count = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != '%') continue;
    if (i + 1 == t.size()) throw SystemDbError(line, "command ends with '%'");
    char c = t[++i];
    if (c == 's') {
      ++s_count;
    } else if (c != 'd') {
      throw SystemDbError(line, std::string("unknown placeholder '%") + c + "' in command");
    }
  }
  if (s_count != 1)
    throw SystemDbError(line, "command must contain %s exactly once, found " +
                                  std::to_string(s_count));
}

std::string format_seconds(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Stanza {
  ProverSystem sys;
  int start = 0;
  bool has_name = false;
  bool has_command = false;
  bool has_cpu = false;
};

void finish_stanza(Stanza& st, std::vector<ProverSystem>& out) {
  if (!st.has_name) throw SystemDbError(st.start, "stanza has no name");
  if (!st.has_command) throw SystemDbError(st.start, "system '" + st.sys.name + "' has no command");
  out.push_back(std::move(st.sys));
}

}  // namespace

std::vector<ProverSystem> parse_system_db(std::string_view text) {
  std::vector<ProverSystem> out{internal_system()};
  std::map<std::string, int> seen{{std::string(kInternalSystem), 0}};
  std::optional<Stanza> st;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty()) {
      if (st) finish_stanza(*st, out);
      st.reset();
      continue;
    }
    if (line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw SystemDbError(lineno, "expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!st) {
      st.emplace();
      st->start = lineno;
    }
    ProverSystem& sys = st->sys;
    if (key == "name") {
      if (st->has_name) throw SystemDbError(lineno, "second name in stanza");
      if (!valid_system_name(value)) throw SystemDbError(lineno, "bad system name '" + value + "'");
      if (!seen.emplace(value, lineno).second)
        throw SystemDbError(lineno, "duplicate system '" + value + "'");
      sys.name = value;
      st->has_name = true;
    } else if (key == "command") {
      if (st->has_command) throw SystemDbError(lineno, "second command in stanza");
      check_template(value, lineno);
      sys.command_template = value;
      st->has_command = true;
    } else if (key == "cpu") {
      if (st->has_cpu) throw SystemDbError(lineno, "second cpu in stanza");
      double v = 0;
      auto res = std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !(v > 0) ||
          !std::isfinite(v))
        throw SystemDbError(lineno, "cpu must be a positive number");
      sys.default_cpu = v;
      st->has_cpu = true;
    } else if (key.rfind("status ", 0) == 0) {
      std::string sname = trim(std::string_view(key).substr(7));
      auto status = parse_szs(sname);
      if (!status) throw SystemDbError(lineno, "unknown SZS status '" + sname + "'");
      if (value.empty()) throw SystemDbError(lineno, "empty status pattern");
      for (const auto& [pat, s] : sys.status_patterns) {
        if (s == *status) throw SystemDbError(lineno, "second pattern for " + sname);
        if (pat.find(value) != std::string::npos || value.find(pat) != std::string::npos)
          throw SystemDbError(lineno, "pattern '" + value + "' overlaps '" + pat + "'");
      }
      sys.status_patterns.emplace_back(value, *status);
    } else {
      throw SystemDbError(lineno, "unknown key '" + key + "'");
    }
  }
  if (st) finish_stanza(*st, out);
  return out;
}

std::vector<ProverSystem> load_system_db(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read system database " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_system_db(os.str());
}

std::string serialize_system_db(const std::vector<ProverSystem>& systems) {
  std::string out;
  for (const auto& s : systems) {
    if (s.kind == SystemKind::internal) continue;
    if (!out.empty()) out += "\n";
    out += "name = " + s.name + "\n";
    out += "command = " + s.command_template + "\n";
    out += "cpu = " + format_seconds(s.default_cpu) + "\n";
    for (const auto& [pat, st] : s.status_patterns)
      out += "status " + std::string(szs_name(st)) + " = " + pat + "\n";
  }
  return out;
}

const ProverSystem* find_system(const std::vector<ProverSystem>& systems, std::string_view name) {
  for (const auto& s : systems)
    if (s.name == name) return &s;
  return nullptr;
}

std::string expand_command(const ProverSystem& sys, const std::string& problem_path,
                           double cpu_seconds) {
  std::string quoted = "'";
  for (char c : problem_path) {
    if (c == '\'')
      quoted += "'\\''";
    else
      quoted += c;
  }
  quoted += "'";
  std::string cpu = std::to_string(static_cast<long>(std::ceil(cpu_seconds)));
  std::string out;
  const std::string& t = sys.command_template;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] == '%' && i + 1 < t.size() && (t[i + 1] == 's' || t[i + 1] == 'd')) {
      out += t[i + 1] == 's' ? quoted : cpu;
      ++i;
    } else {
      out += t[i];
    }
  }
  return out;
}

std::vector<std::string> cited_names(std::string_view output,
                                     const std::vector<std::string>& known) {
  static const std::regex re(R"((?:fof|cnf)\(\s*([A-Za-z0-9_]+)\s*,)");
  std::set<std::string> allowed(known.begin(), known.end());
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::string s(output);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    std::string n = (*it)[1];
    if (allowed.contains(n) && seen.insert(n).second) out.push_back(n);
  }
  return out;
}

RunSlots::RunSlots(unsigned n) : free_(std::max(1u, n)) {}

void RunSlots::acquire() {
  std::unique_lock lk(m_);
  cv_.wait(lk, [&] { return free_ > 0; });
  --free_;
}

void RunSlots::release() {
  {
    std::lock_guard lk(m_);
    ++free_;
  }
  cv_.notify_one();
}

RunSlots& external_slots() {
  static RunSlots slots(std::thread::hardware_concurrency());
  return slots;
}

namespace {

struct ProcInfo {
  pid_t pid = 0;
  pid_t ppid = 0;
  pid_t pgrp = 0;
  char state = '?';
  long ticks = 0;  // utime + stime
  unsigned long long start = 0;
  long rss_pages = 0;
};

std::optional<ProcInfo> read_proc(pid_t pid) {
  std::ifstream in("/proc/" + std::to_string(pid) + "/stat");
  if (!in) return std::nullopt;
  std::string line;
  std::getline(in, line);
  auto close = line.rfind(')');
  if (close == std::string::npos) return std::nullopt;
  std::istringstream rest(line.substr(close + 2));
  ProcInfo p;
  p.pid = pid;
  // Fields 3.. of proc(5).
  std::vector<std::string> f;
  std::string tok;
  while (rest >> tok) f.push_back(tok);
  if (f.size() < 22) return std::nullopt;
  p.state = f[0].empty() ? '?' : f[0][0];
  p.ppid = static_cast<pid_t>(std::stol(f[1]));
  p.pgrp = static_cast<pid_t>(std::stol(f[2]));
  p.ticks = std::stol(f[11]) + std::stol(f[12]);
  p.start = std::stoull(f[19]);
  p.rss_pages = std::stol(f[21]);
  return p;
}

std::vector<ProcInfo> all_processes() {
  std::vector<ProcInfo> out;
  DIR* d = opendir("/proc");
  if (!d) return out;
  while (dirent* e = readdir(d)) {
    const char* n = e->d_name;
    if (*n < '0' || *n > '9') continue;
    auto p = read_proc(static_cast<pid_t>(std::atol(n)));
    if (p) out.push_back(*p);
  }
  closedir(d);
  return out;
}

// Everything descended from the run: its process group, anything whose parent
// is already known, and every process seen before (grandchildren that escaped
// the group or were reparented).
class TreeWatch {
 public:
  explicit TreeWatch(pid_t root) : root_(root) {}

  struct Sample {
    long ticks = 0;
    long rss_pages = 0;
    std::size_t live = 0;
  };

  Sample poll() {
    auto procs = all_processes();
    std::set<pid_t> members;
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& p : procs) {
        if (members.contains(p.pid)) continue;
        auto known = seen_.find(p.pid);
        bool same_known = known != seen_.end() && known->second.start == p.start;
        if (p.pid == root_ || p.pgrp == root_ || same_known || members.contains(p.ppid)) {
          members.insert(p.pid);
          grew = true;
        }
      }
    }
    Sample s;
    for (const auto& p : procs) {
      if (!members.contains(p.pid)) continue;
      auto& rec = seen_[p.pid];
      if (rec.start != p.start) rec = {p.start, 0};
      rec.max_ticks = std::max(rec.max_ticks, p.ticks);
      if (p.state != 'Z' && p.state != 'X') {
        ++s.live;
        s.rss_pages += p.rss_pages;
      }
      live_[p.pid] = p.state != 'Z' && p.state != 'X';
    }
    for (const auto& e : seen_) s.ticks += e.second.max_ticks;
    for (auto& [pid, alive] : live_)
      if (!members.contains(pid)) alive = false;
    return s;
  }

  // Kills until a poll finds nothing alive.
  void kill_all() {
    for (int round = 0; round < 50; ++round) {
      ::kill(-root_, SIGKILL);
      for (const auto& [pid, alive] : live_)
        if (alive) ::kill(pid, SIGKILL);
      // Reap our own child if it died so it does not linger as a zombie member.
      int st = 0;
      if (!root_reaped_ && waitpid(root_, &st, WNOHANG) == root_) root_reaped_ = true;
      if (poll().live == 0) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }

  void mark_root_reaped() { root_reaped_ = true; }
  bool root_reaped() const { return root_reaped_; }

 private:
  struct Record {
    unsigned long long start = 0;
    long max_ticks = 0;
  };
  pid_t root_;
  std::map<pid_t, Record> seen_;
  std::map<pid_t, bool> live_;
  bool root_reaped_ = false;
};

std::string slurp_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> problem_names(const std::filesystem::path& problem_path) {
  std::vector<std::string> out;
  try {
    for (const auto& f : tptp::parse(slurp_file(problem_path))) out.push_back(f.name);
  } catch (const std::exception&) {
    // Unparsable problems still run; no names can be attributed.
  }
  return out;
}

std::int64_t millis_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t)
      .count();
}

}  // namespace

RunResult run_external(const ProverSystem& sys, const std::filesystem::path& problem_path,
                       const Limits& limits, const std::filesystem::path& output_path) {
  limits.validate();
  RunResult r;
  r.system = sys.name;
  r.raw_output_path = output_path.string();
  if (!output_path.parent_path().empty()) std::filesystem::create_directories(output_path.parent_path());

  std::string cmd = expand_command(sys, problem_path.string(), limits.cpu_seconds);
  int out_fd = ::open(output_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  int null_fd = ::open("/dev/null", O_RDONLY | O_CLOEXEC);
  if (out_fd < 0 || null_fd < 0) {
    if (out_fd >= 0) ::close(out_fd);
    if (null_fd >= 0) ::close(null_fd);
    r.status = SzsStatus::error;
    r.diagnostic = "cannot open output file " + output_path.string();
    return r;
  }
  const char* argv[] = {"/bin/sh", "-c", cmd.c_str(), nullptr};

  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid == 0) {
    setpgid(0, 0);
    dup2(null_fd, 0);
    dup2(out_fd, 1);
    dup2(out_fd, 2);
    close_range(3, ~0U, 0);
    execv("/bin/sh", const_cast<char* const*>(argv));
    _exit(127);
  }
  ::close(out_fd);
  ::close(null_fd);
  if (pid < 0) {
    r.status = SzsStatus::error;
    r.diagnostic = "fork failed";
    return r;
  }
  setpgid(pid, pid);

  const long tick_hz = sysconf(_SC_CLK_TCK);
  const long page = sysconf(_SC_PAGESIZE);
  TreeWatch watch(pid);
  int wstatus = 0;
  rusage usage{};
  std::string breach;
  long ticks = 0;
  for (;;) {
    pid_t w = wait4(pid, &wstatus, WNOHANG, &usage);
    if (w == pid) {
      watch.mark_root_reaped();
      break;
    }
    auto s = watch.poll();
    ticks = std::max(ticks, s.ticks);
    double cpu = static_cast<double>(ticks) / static_cast<double>(tick_hz);
    double wall = static_cast<double>(millis_since(start)) / 1000.0;
    if (cpu > limits.cpu_seconds) {
      breach = "cpu limit " + format_seconds(limits.cpu_seconds) + " s exceeded";
    } else if (wall > limits.wall_seconds) {
      breach = "wall limit " + format_seconds(limits.wall_seconds) + " s exceeded";
    } else if (static_cast<std::uint64_t>(s.rss_pages) * static_cast<std::uint64_t>(page) >
               limits.memory_bytes) {
      breach = "memory limit exceeded";
    }
    if (!breach.empty()) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  // Stragglers outlive a finished root too; nothing of the run may survive it.
  watch.kill_all();
  if (!watch.root_reaped()) {
    wait4(pid, &wstatus, 0, &usage);
    watch.mark_root_reaped();
  }
  auto final_sample = watch.poll();
  ticks = std::max(ticks, final_sample.ticks);
  std::int64_t rusage_ms = (usage.ru_utime.tv_sec + usage.ru_stime.tv_sec) * 1000 +
                           (usage.ru_utime.tv_usec + usage.ru_stime.tv_usec) / 1000;
  r.cpu_millis = std::max<std::int64_t>(ticks * 1000 / tick_hz, rusage_ms);
  r.wall_millis = millis_since(start);

  if (!breach.empty()) {
    r.status = SzsStatus::resource_out;
    r.diagnostic = breach;
    return r;
  }
  std::string output = slurp_file(output_path);
  if (WIFEXITED(wstatus) && WEXITSTATUS(wstatus) == 127) {
    r.status = SzsStatus::error;
    r.diagnostic = "cannot run '" + cmd + "': " + trim(output);
    return r;
  }
  std::size_t best = std::string::npos;
  r.status = SzsStatus::gave_up;
  for (const auto& [pat, st] : sys.status_patterns) {
    auto at = output.find(pat);
    if (at < best) {
      best = at;
      r.status = st;
    }
  }
  if (r.status == SzsStatus::theorem) {
    auto used = cited_names(output, problem_names(problem_path));
    if (!used.empty()) r.used_axioms = std::move(used);
  }
  if (WIFSIGNALED(wstatus) && best == std::string::npos)
    r.diagnostic = "terminated by signal " + std::to_string(WTERMSIG(wstatus));
  return r;
}

RunResult run_internal(const std::filesystem::path& problem_path, const Limits& limits,
                       const std::filesystem::path& output_path) {
  RunResult r;
  std::vector<NamedFormula> axioms;
  std::optional<NamedFormula> conjecture;
  try {
    for (auto& f : tptp::parse(slurp_file(problem_path))) {
      if (f.role == "conjecture") {
        if (conjecture) throw std::runtime_error("more than one conjecture");
        conjecture = NamedFormula{f.name, f.formula};
      } else {
        axioms.push_back({f.name, f.formula});
      }
    }
    r = saturate(clausify(axioms, conjecture), limits);
    if (r.status == SzsStatus::theorem && r.used_axioms) {
      std::set<std::string> used(r.used_axioms->begin(), r.used_axioms->end());
      std::vector<NamedFormula> kept;
      for (const auto& a : axioms)
        if (used.contains(a.name)) kept.push_back(a);
      auto check = saturate(clausify(kept, conjecture), limits);
      if (check.status != SzsStatus::theorem) {
        std::vector<std::string> all;
        for (const auto& a : axioms) all.push_back(a.name);
        if (conjecture) all.push_back(conjecture->name);
        r.used_axioms = all;
        r.diagnostic = "used-axiom self-check failed; reporting all names";
      }
    }
  } catch (const std::exception& e) {
    r = RunResult{};
    r.system = std::string(kInternalSystem);
    r.status = SzsStatus::error;
    r.diagnostic = e.what();
  }
  r.raw_output_path = output_path.string();
  if (!output_path.empty()) {
    if (!output_path.parent_path().empty())
      std::filesystem::create_directories(output_path.parent_path());
    std::ofstream(output_path, std::ios::binary | std::ios::trunc)
        << format_transcript(r, problem_path.stem().string());
  }
  return r;
}

RunResult run_system(const ProverSystem& sys, const std::filesystem::path& problem_path,
                     const Limits& limits, const std::filesystem::path& output_path) {
  if (sys.kind == SystemKind::internal) return run_internal(problem_path, limits, output_path);
  auto& slots = external_slots();
  slots.acquire();
  struct Release {
    RunSlots& s;
    ~Release() { s.release(); }
  } guard{slots};
  return run_external(sys, problem_path, limits, output_path);
}

std::vector<RunResult> prove_with_fallback(const std::filesystem::path& problem_path,
                                           const ProverSystem& primary,
                                           const ProverSystem& fallback, const Limits& limits,
                                           const OutputPathFor& output_for) {
  std::vector<RunResult> out;
  out.push_back(run_system(primary, problem_path, limits, output_for(primary, 0)));
  auto s = out.back().status;
  if (s != SzsStatus::theorem && s != SzsStatus::counter_satisfiable)
    out.push_back(run_system(fallback, problem_path, limits, output_for(fallback, 1)));
  return out;
}

}  // namespace mflar
