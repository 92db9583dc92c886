#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "invtransfer/io.hpp"

namespace httplib {
class Server;
}

namespace invtransfer {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Request handling for the explorer HTTP API over an output root. Run
/// directories are only read; queries and evaluations are appended to
/// `<root>/.explorer-log/<run id>.jsonl`. Safe for concurrent callers.
class ExplorerService {
public:
  static constexpr const char* kLogDirectory = ".explorer-log";

  explicit ExplorerService(std::filesystem::path root);

  /// Routes GET /runs, POST /runs/{id}/query, POST /runs/{id}/evaluate and
  /// GET /runs/{id}/front. Never throws; failures become error responses.
  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  const std::filesystem::path& root() const { return root_; }

private:
  struct LoadedRun {
    StoredRun stored;
    std::optional<Problem> problem;
  };

  HttpResponse list_runs();
  HttpResponse query(const std::string& id, const std::string& body);
  HttpResponse evaluate(const std::string& id, const std::string& body);
  HttpResponse front(const std::string& id);

  /// Null when the id does not name a run directory under the root.
  std::shared_ptr<const LoadedRun> find_run(const std::string& id);
  void append_log(const std::string& id, nlohmann::json entry);

  std::filesystem::path root_;
  std::mutex cache_mutex_;
  std::map<std::string, std::shared_ptr<const LoadedRun>> cache_;
  std::mutex log_mutex_;
};

/// HTTP binding of an ExplorerService, with CORS headers for browser clients.
class ExplorerServer {
public:
  explicit ExplorerServer(ExplorerService& service);
  ~ExplorerServer();
  ExplorerServer(const ExplorerServer&) = delete;
  ExplorerServer& operator=(const ExplorerServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop(); requires a successful bind().
  bool listen();
  void stop();

private:
  std::unique_ptr<httplib::Server> server_;
};

/// Blocks serving `service` over HTTP until the process is stopped.
/// Returns false when the address cannot be bound.
bool serve(ExplorerService& service, const std::string& host, int port);

} // namespace invtransfer
