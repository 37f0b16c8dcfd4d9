#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "mflar/problem.hpp"
#include "mflar/prover.hpp"

namespace mflar {

enum class JobState { received, parsed, verified, generating, ready, failed };

std::string_view job_state_name(JobState s);
std::optional<JobState> parse_job_state(std::string_view s);

struct ServiceConfig {
  std::filesystem::path workdir;
  // Optional; the internal prover is always available.
  std::filesystem::path systems_db;
  // Optional JSON-lines training examples merged into every advisor retrain.
  std::filesystem::path training_fixture;
  // Optional directory served under /ui/.
  std::filesystem::path static_dir;
  unsigned verify_workers = 1;
  unsigned background_workers = 2;
  Limits user_limits = Limits::user_default();
  Limits checker_limits = Limits::checker_default();
  std::size_t max_body_bytes = std::size_t{1} << 20;
  // Larger submissions are parsed and verified in the background.
  std::size_t sync_verify_bytes = 64 * 1024;
  Clock clock = iso_timestamp_now;
};

struct Request {
  std::string method;
  std::string path;
  std::string body;
  std::string accept;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// The pipeline engine behind both the HTTP server and tests. Routes:
//   POST /articles                                 submit (body = article text)
//   GET  /articles/{id}                            state, timestamps
//   GET  /articles/{id}/render                     render model
//   GET  /articles/{id}/log                        text log
//   GET  /articles/{id}/obligations                obligations with statuses
//   POST /articles/{id}/obligations/{oid}/prove    {system?, cpu?}
//   GET  /articles/{id}/obligations/{oid}/problem  TPTP text
//   POST /articles/{id}/obligations/{oid}/hints    {k?}
//   GET  /articles/{id}/runs/{file}                raw prover output
//   POST /articles/{id}/install                    {force?}
//   GET  /library, GET /library/{name}, GET /systems
class Service {
 public:
  // Loads library, systems and advisor from the workdir and resumes unfinished jobs.
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response handle(const Request& r);

  // Blocks until background work queued so far has finished.
  void wait_idle();

  const ServiceConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP front end over a Service; serves until stop(). Port 0 picks a free port.
class HttpServer {
 public:
  HttpServer(Service& service, std::string host, int port);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and starts serving on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread.
  void run();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mflar
