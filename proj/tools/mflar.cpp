// Command-line front end: the same engine as the service, without the server.

#include <pthread.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mflar/advisor.hpp"
#include "mflar/article.hpp"
#include "mflar/errors.hpp"
#include "mflar/names.hpp"
#include "mflar/problem.hpp"
#include "mflar/service.hpp"
#include "mflar/systems.hpp"
#include "mflar/verifier.hpp"

namespace fs = std::filesystem;
using namespace mflar;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

LibraryStore open_library(const fs::path& dir) {
  if (dir.empty()) return {};
  return LibraryStore::load(dir);
}

// Exit codes: 0 ok, 1 failed steps / non-theorem, 2 input errors.
int cmd_verify(const fs::path& file, const fs::path& library, unsigned workers, bool as_json) {
  Article a = parse_article(read_file(file));
  LibraryStore lib = open_library(library);
  VerificationReport r = verify_article(a, lib, workers);
  std::cout << (as_json ? report_json(r) + "\n" : report_text_log(r));
  return r.failed_steps() == 0 ? 0 : 1;
}

int cmd_gen_problems(const fs::path& file, const fs::path& out, const fs::path& library) {
  Article a = parse_article(read_file(file));
  LibraryStore lib = open_library(library);
  fs::create_directories(out);
  auto obligations = extract_obligations(a, lib);
  auto log = generate_all(
      obligations, lib, translate_article(a),
      [&](const TptpProblem& p, const std::string& text) {
        write_problem_file(out, p, text);
        return true;
      },
      [](const std::string& line) { std::cout << line << "\n"; });
  return log.errors == 0 ? 0 : 1;
}

int cmd_prove(const fs::path& problem, const std::string& system, double cpu, const fs::path& systems_db,
              fs::path output) {
  std::vector<ProverSystem> systems{internal_system()};
  if (!systems_db.empty())
    for (auto& s : load_system_db(systems_db)) systems.push_back(std::move(s));
  const ProverSystem* sys = find_system(systems, system);
  if (!sys) {
    std::cerr << "unknown system " << system << "\n";
    return 2;
  }
  Limits limits = Limits::user_default();
  if (cpu > 0) {
    limits.cpu_seconds = cpu;
    limits.wall_seconds = cpu;
  } else if (sys->kind == SystemKind::external) {
    limits.cpu_seconds = sys->default_cpu;
    limits.wall_seconds = sys->default_cpu;
  }
  if (output.empty()) output = fs::path(problem).replace_extension("." + sys->name + ".out");
  RunResult r = run_system(*sys, problem, limits, output);
  std::cout << "status " << szs_name(r.status) << "\n"
            << "cpu " << r.cpu_millis << "ms wall " << r.wall_millis << "ms\n";
  if (r.used_axioms) {
    std::cout << "used";
    for (const auto& n : *r.used_axioms) std::cout << " " << n;
    std::cout << "\n";
  }
  if (!r.diagnostic.empty()) std::cout << "diagnostic " << r.diagnostic << "\n";
  std::cout << "output " << output.string() << "\n";
  return r.status == SzsStatus::theorem ? 0 : 1;
}

int cmd_advise(const fs::path& file, const std::string& oid, std::size_t k, const fs::path& model_path,
               const fs::path& training, const fs::path& library) {
  Article a = parse_article(read_file(file));
  LibraryStore lib = open_library(library);
  AdvisorModel model;
  if (!model_path.empty())
    model = load_model(model_path);
  else if (!training.empty())
    model = train(parse_examples(read_file(training)));
  auto obligations = extract_obligations(a, lib);
  const Obligation* o = nullptr;
  for (const auto& ob : obligations)
    if (ob.id == oid) o = &ob;
  if (!o) {
    std::cerr << "no obligation " << oid << "\n";
    return 2;
  }
  std::set<std::string> earlier;
  for (const auto& it : a.items)
    if (it.position < o->item_position)
      earlier.insert(format_name(
          {it.kind == ItemKind::theorem ? NameKind::theorem : NameKind::definition, it.ordinal, 0, a.name}));
  auto hints = suggest_hints(model, goal_symbols(*o), k, [&](const std::string& n) {
    return lib.find(n) != nullptr || earlier.contains(n);
  });
  for (const auto& h : hints) std::cout << h.name << "\t" << h.score << "\n";
  return 0;
}

int cmd_serve(const std::string& host, int port, ServiceConfig config) {
  // Block before any worker thread exists so every thread inherits the mask.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  Service service(std::move(config));
  HttpServer http(service, host, port);
  int bound = http.start();
  std::cerr << "listening on " << host << ":" << bound << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  http.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mflar: verify articles, generate ATP problems, run provers, suggest premises"};
  app.require_subcommand(1);

  fs::path file, out, library, systems_db, output, model, training, workdir, static_dir;
  unsigned workers = 1;
  bool as_json = false;
  std::string system = std::string(kInternalSystem), oid, host = "127.0.0.1";
  double cpu = 0;
  std::size_t k = 20;
  int port = 8080;

  auto* verify = app.add_subcommand("verify", "check an article and list obligations");
  verify->add_option("FILE", file)->required()->check(CLI::ExistingFile);
  verify->add_option("--library", library, "installed library directory");
  verify->add_option("--workers", workers)->check(CLI::Range(1u, 64u));
  verify->add_flag("--json", as_json);

  auto* gen = app.add_subcommand("gen-problems", "write one TPTP problem per obligation");
  gen->add_option("FILE", file)->required()->check(CLI::ExistingFile);
  gen->add_option("-o,--output", out)->required();
  gen->add_option("--library", library);

  auto* prove = app.add_subcommand("prove", "run a prover on a TPTP problem");
  prove->add_option("PROBLEM", file)->required()->check(CLI::ExistingFile);
  prove->add_option("--system", system);
  prove->add_option("--cpu", cpu)->check(CLI::PositiveNumber);
  prove->add_option("--systems", systems_db)->check(CLI::ExistingFile);
  prove->add_option("--out", output, "raw output file");

  auto* advise = app.add_subcommand("advise", "rank premises for an obligation");
  advise->add_option("FILE", file)->required()->check(CLI::ExistingFile);
  advise->add_option("--obligation", oid)->required();
  advise->add_option("-k", k)->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
  auto* model_opt = advise->add_option("--model", model)->check(CLI::ExistingFile);
  advise->add_option("--training", training, "JSON-lines examples")->check(CLI::ExistingFile)->excludes(model_opt);
  advise->add_option("--library", library);

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--workdir", workdir)->required();
  serve->add_option("--systems", systems_db)->check(CLI::ExistingFile);
  serve->add_option("--training", training)->check(CLI::ExistingFile);
  serve->add_option("--static", static_dir)->check(CLI::ExistingDirectory);
  serve->add_option("--workers", workers)->check(CLI::Range(1u, 64u));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) return cmd_verify(file, library, workers, as_json);
    if (*gen) return cmd_gen_problems(file, out, library);
    if (*prove) return cmd_prove(file, system, cpu, systems_db, output);
    if (*advise) return cmd_advise(file, oid, k, model, training, library);
    if (*serve) {
      ServiceConfig c;
      c.workdir = workdir;
      c.systems_db = systems_db;
      c.training_fixture = training;
      c.static_dir = static_dir;
      c.verify_workers = workers;
      return cmd_serve(host, port, std::move(c));
    }
  } catch (const SyntaxError& e) {
    std::cerr << file.string() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
