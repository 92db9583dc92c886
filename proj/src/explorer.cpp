#include "invtransfer/explorer.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cmath>
#include <regex>

#include <httplib.h>

#include "invtransfer/decomposition.hpp"
#include "invtransfer/errors.hpp"

namespace invtransfer {

namespace fs = std::filesystem;

namespace {

HttpResponse json_response(int status, const nlohmann::json& body) { return {status, body.dump() + "\n"}; }

HttpResponse error_response(int status, const std::string& message)
{
  return json_response(status, {{"error", message}});
}

bool valid_id(const std::string& id)
{
  return !id.empty() && id[0] != '.' && id.find('/') == std::string::npos && id.find('\\') == std::string::npos;
}

/// Vector of finite numbers or nullopt.
std::optional<VectorXd> number_array(const nlohmann::json& j)
{
  if (!j.is_array())
    return std::nullopt;
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      return std::nullopt;
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  if (!v.allFinite())
    return std::nullopt;
  return v;
}

double noise_variance(const VariableModel& model)
{
  if (const auto* m = std::get_if<InverseGpModel>(&model))
    return m->noise_variance();
  return std::get<InvTgpModel>(model).target_noise_variance();
}

std::string timestamp()
{
  const auto now = std::chrono::system_clock::now();
  return std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count());
}

// Final IGD and RMSE of one seed, from <root>/<name>-metrics.json when present.
void attach_metrics(const fs::path& root, const std::string& name, std::uint64_t seed, nlohmann::json& summary)
{
  const fs::path path = root / (name + "-metrics.json");
  if (!fs::exists(path))
    return;
  try {
    const nlohmann::json report = nlohmann::json::parse(read_text_file(path));
    const auto seeds = report.at("run_seeds").get<std::vector<std::uint64_t>>();
    const auto it = std::find(seeds.begin(), seeds.end(), seed);
    if (it == seeds.end())
      return;
    const auto index = static_cast<std::size_t>(it - seeds.begin());
    const int last = report.at("checkpoints").back().get<int>();
    summary["final_igd"] = report.at("igd").at(std::to_string(last)).at("runs").at(index);
    const nlohmann::json& rmse = report.at("rmse_final");
    if (!rmse.is_null() && rmse.at("runs").size() == seeds.size())
      summary["final_rmse"] = rmse.at("runs").at(index);
  } catch (const std::exception&) {
    // metrics are optional decoration of the summary
  }
}

} // namespace

ExplorerService::ExplorerService(fs::path root) : root_(std::move(root)) {}

HttpResponse ExplorerService::handle(const std::string& method, const std::string& path, const std::string& body)
{
  static const std::regex run_route(R"(^/runs/([^/]+)/(query|evaluate|front)/?$)");
  try {
    if (path == "/runs" || path == "/runs/") {
      if (method != "GET")
        return error_response(405, "method not allowed");
      return list_runs();
    }
    std::smatch match;
    if (!std::regex_match(path, match, run_route))
      return error_response(404, "no such endpoint: " + path);
    const std::string id = match[1];
    const std::string action = match[2];
    const std::string expected = action == "front" ? "GET" : "POST";
    if (method != expected)
      return error_response(405, "method not allowed");
    if (action == "query")
      return query(id, body);
    if (action == "evaluate")
      return evaluate(id, body);
    return front(id);
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpResponse ExplorerService::list_runs()
{
  std::vector<fs::path> dirs;
  try {
    dirs = find_run_dirs(root_);
  } catch (const std::exception& e) {
    return error_response(500, std::string("cannot read output root: ") + e.what());
  }
  nlohmann::json runs = nlohmann::json::array();
  for (const fs::path& dir : dirs) {
    nlohmann::json summary{{"id", dir.filename().string()}};
    try {
      const nlohmann::json meta = nlohmann::json::parse(read_text_file(dir / "meta.json"));
      summary["name"] = meta.at("name");
      summary["seed"] = meta.at("seed");
      summary["variant"] = meta.at("variant");
      summary["problem"] = meta.at("problem");
      summary["evaluations"] = meta.at("evaluations");
      summary["status"] = meta.at("failure").is_null() ? "ok" : "failed";
      attach_metrics(root_, meta.at("name").get<std::string>(), meta.at("seed").get<std::uint64_t>(), summary);
    } catch (const std::exception& e) {
      summary["status"] = "invalid";
      summary["error"] = e.what();
    }
    runs.push_back(std::move(summary));
  }
  return json_response(200, {{"runs", std::move(runs)}});
}

std::shared_ptr<const ExplorerService::LoadedRun> ExplorerService::find_run(const std::string& id)
{
  if (!valid_id(id))
    return nullptr;
  {
    std::lock_guard lock(cache_mutex_);
    const auto it = cache_.find(id);
    if (it != cache_.end())
      return it->second;
  }
  const fs::path dir = root_ / id;
  if (!fs::exists(dir / "meta.json"))
    return nullptr;
  auto run = std::make_shared<LoadedRun>();
  run->stored = load_run(dir);
  if (run->stored.info.benchmark)
    run->problem = make_mdtlz(*run->stored.info.benchmark);
  std::lock_guard lock(cache_mutex_);
  return cache_.emplace(id, std::move(run)).first->second;
}

void ExplorerService::append_log(const std::string& id, nlohmann::json entry)
{
  entry["timestamp_ms"] = timestamp();
  std::lock_guard lock(log_mutex_);
  const fs::path dir = root_ / kLogDirectory;
  fs::create_directories(dir);
  std::ofstream out(dir / (id + ".jsonl"), std::ios::app);
  out << entry.dump() << "\n";
}

HttpResponse ExplorerService::query(const std::string& id, const std::string& body)
{
  const auto run = find_run(id);
  if (!run)
    return error_response(404, "unknown run: " + id);
  const StoredRun& s = run->stored;
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    return error_response(422, "request body is not valid JSON");
  }
  const std::optional<VectorXd> parsed = request.is_object() && request.contains("w")
                                             ? number_array(request.at("w"))
                                             : std::nullopt;
  if (!parsed)
    return error_response(422, "\"w\" must be an array of numbers");
  VectorXd w = *parsed;
  if (w.size() != s.archive.m())
    return error_response(422, "\"w\" must have " + std::to_string(s.archive.m()) + " components");
  if (w.minCoeff() < -1e-12)
    return error_response(422, "\"w\" has a negative component");
  w = w.cwiseMax(0.0);
  if (std::abs(w.sum() - 1.0) > 1e-3)
    return error_response(422, "\"w\" must sum to 1 (tolerance 1e-3)");
  w /= w.sum();
  if (s.models.empty())
    return error_response(409, "run has no inverse models");

  const SolutionDistribution dist = predict_solution_distribution(s.models, w);
  VectorXd lower = VectorXd::Zero(dist.mean.size());
  VectorXd upper = VectorXd::Ones(dist.mean.size());
  if (run->problem) {
    lower = run->problem->lower();
    upper = run->problem->upper();
  }
  nlohmann::json x_mean = nlohmann::json::array();
  nlohmann::json x_std = nlohmann::json::array();
  nlohmann::json clamped = nlohmann::json::array();
  std::vector<const VariableModel*> by_index(s.models.size());
  for (const VariableModel& m : s.models)
    by_index[var_index(m)] = &m;
  for (Eigen::Index j = 0; j < dist.mean.size(); ++j) {
    const double value = std::clamp(dist.mean[j], lower[j], upper[j]);
    x_mean.push_back(value);
    x_std.push_back(std::sqrt(dist.variance[j] + noise_variance(*by_index[j])));
    clamped.push_back(value != dist.mean[j]);
  }
  nlohmann::json response{{"run", id},
                          {"w", vector_to_json(w)},
                          {"x_mean", x_mean},
                          {"x_std", x_std},
                          {"clamped_flags", clamped}};
  append_log(id, {{"kind", "query"}, {"w", vector_to_json(w)}, {"x_mean", x_mean}, {"x_std", x_std}});
  return json_response(200, response);
}

HttpResponse ExplorerService::evaluate(const std::string& id, const std::string& body)
{
  const auto run = find_run(id);
  if (!run)
    return error_response(404, "unknown run: " + id);
  if (!run->problem)
    return error_response(409, "run problem is not a built-in benchmark; cannot evaluate in-process");
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    return error_response(422, "request body is not valid JSON");
  }
  const std::optional<VectorXd> x = request.is_object() && request.contains("x")
                                        ? number_array(request.at("x"))
                                        : std::nullopt;
  if (!x)
    return error_response(422, "\"x\" must be an array of numbers");
  if (x->size() != run->problem->d())
    return error_response(422, "\"x\" must have " + std::to_string(run->problem->d()) + " components");
  VectorXd f;
  try {
    f = run->problem->evaluate(*x);
  } catch (const BoundsError& e) {
    return error_response(422, e.what());
  }
  append_log(id, {{"kind", "evaluate"}, {"x", vector_to_json(*x)}, {"f", vector_to_json(f)}});
  return json_response(200, {{"run", id}, {"x", vector_to_json(*x)}, {"f", vector_to_json(f)}});
}

HttpResponse ExplorerService::front(const std::string& id)
{
  const auto run = find_run(id);
  if (!run)
    return error_response(404, "unknown run: " + id);
  const StoredRun& s = run->stored;
  nlohmann::json points = nlohmann::json::array();
  for (int i : s.nondominated) {
    const ArchiveEntry& e = s.archive.entries()[static_cast<std::size_t>(i)];
    const VectorXd w = preference_from_objectives(s.normalizer.normalize(e.f));
    points.push_back({{"x", vector_to_json(e.x)}, {"f", vector_to_json(e.f)}, {"w", vector_to_json(w)}});
  }
  return json_response(200, {{"run", id}, {"normalizer", s.normalizer}, {"points", std::move(points)}});
}

// ---------------------------------------------------------------------------

ExplorerServer::ExplorerServer(ExplorerService& service) : server_(std::make_unique<httplib::Server>())
{
  auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, r.content_type);
  };
  server_->Get(R"(/.*)", dispatch);
  server_->Post(R"(/.*)", dispatch);
  server_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

ExplorerServer::~ExplorerServer() = default;

int ExplorerServer::bind(const std::string& host, int port)
{
  if (port == 0)
    return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool ExplorerServer::listen() { return server_->listen_after_bind(); }

void ExplorerServer::stop() { server_->stop(); }

bool serve(ExplorerService& service, const std::string& host, int port)
{
  ExplorerServer server(service);
  return server.bind(host, port) >= 0 && server.listen();
}

} // namespace invtransfer
