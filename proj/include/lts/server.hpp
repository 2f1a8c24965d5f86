#pragma once

// HTTP/JSON front end for interactive threshold exploration. One dataset
// entry per upload; simplified results are cached per quantized epsilon.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <vector>

// httplib's default backlog of 5 drops connections when a burst of clients
// arrives at once.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 256
#endif
#include <httplib.h>
#include <json.hpp>

#include "lts/io.hpp"
#include "lts/persistence.hpp"

namespace lts {

struct ServerOptions {
  std::int64_t maxVertices = std::int64_t{1} << 27;
  std::string dataDir;  // empty: memory only
  std::size_t cacheEntries = 16;
  int threadCount = 0;
};

/// A persistence simplification at one quantized epsilon.
struct CachedSimplification {
  double epsilon = 0;
  ScalarField field;
  OrderField order;
  SimplifyReport report;
  std::string body;  // POST simplify response, kept so hits and misses match byte for byte
};

struct DatasetEntry {
  std::string id;
  Dataset data;
  double range = 0;
  OrderField order;
  std::vector<PersistencePair> diagram;  // merged, both polarities
  PersistenceCurve curve;
  std::int64_t minima = 0, maxima = 0;

  std::mutex simplifyMutex;  // one simplification at a time per dataset
  std::shared_mutex cacheMutex;
  std::list<std::int64_t> lru;  // most recent first
  std::map<std::int64_t, std::shared_ptr<const CachedSimplification>> cache;
};

class Server {
 public:
  explicit Server(ServerOptions options = {}) : options_(std::move(options)) {
    if (!options_.dataDir.empty()) load_data_dir();
    install_routes();
  }

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  httplib::Server& http() { return http_; }

  /// Binds and serves until stop(); returns false if the port is unavailable.
  bool listen(const std::string& host, int port) { return http_.listen(host, port); }
  int bind_to_any_port(const std::string& host) { return http_.bind_to_any_port(host); }
  bool listen_after_bind() { return http_.listen_after_bind(); }
  void stop() { http_.stop(); }
  void wait_until_ready() { http_.wait_until_ready(); }

  /// Registers a dataset and returns its id. Same content, same id.
  std::shared_ptr<DatasetEntry> add_dataset(std::string_view body, bool persist = true) {
    check_size(body);
    Dataset ds = parse_field(body);
    const auto id = content_id(body);
    {
      std::shared_lock lock(datasetsMutex_);
      if (auto it = datasets_.find(id); it != datasets_.end()) return it->second;
    }
    auto entry = build_entry(id, std::move(ds));
    if (persist && !options_.dataDir.empty()) {
      std::filesystem::create_directories(options_.dataDir);
      write_file((std::filesystem::path(options_.dataDir) / (id + ".sfg")).string(), std::string(body));
    }
    std::unique_lock lock(datasetsMutex_);
    auto [it, inserted] = datasets_.emplace(id, entry);
    return it->second;
  }

  std::shared_ptr<DatasetEntry> find(const std::string& id) const {
    std::shared_lock lock(datasetsMutex_);
    auto it = datasets_.find(id);
    return it == datasets_.end() ? nullptr : it->second;
  }

  /// Cache key: epsilon in units of 1e-6 of the value range.
  static std::int64_t quantize(double epsilon, double range) {
    const double unit = (range > 0 ? range : 1.0) * 1e-6;
    const double q = std::round(epsilon / unit);
    return q > 9e15 ? std::int64_t{9'000'000'000'000'000} : static_cast<std::int64_t>(q);
  }

  static double dequantize(std::int64_t key, double range) { return static_cast<double>(key) * (range > 0 ? range : 1.0) * 1e-6; }

  std::shared_ptr<const CachedSimplification> simplified(DatasetEntry& e, double epsilon) {
    const auto key = quantize(epsilon, e.range);
    if (auto hit = lookup(e, key)) return hit;
    // Bounded worker pool across datasets, then one job per dataset.
    workers_.acquire();
    struct Release {
      std::counting_semaphore<64>& s;
      ~Release() { s.release(); }
    } release{workers_};
    std::lock_guard job(e.simplifyMutex);
    if (auto hit = lookup(e, key)) return hit;

    auto out = std::make_shared<CachedSimplification>();
    out->epsilon = dequantize(key, e.range);
    SimplifyOptions opt;
    opt.threadCount = options_.threadCount;
    auto res = persistence_simplify(e.data.mesh, e.data.field, out->epsilon, opt);
    out->field = std::move(res.field);
    out->order = std::move(res.order);
    out->report = std::move(res.report);
    const auto& r = out->report;
    json body = {{"epsilon", out->epsilon},
                 {"maxInfinityDeviation", r.maxInfinityDeviation},
                 {"criticalPoints", critical_points_to_json(e.data.mesh, out->order, out->field, opt.threadCount)},
                 {"reportSummary",
                  {{"regionCount", r.regionCount},
                   {"largestRegion", r.largestRegion},
                   {"maxIterations", r.maxIterationCount},
                   {"meanIterations", r.meanIterationCount},
                   {"rounds", r.rounds}}}};
    out->body = body.dump();

    std::unique_lock lock(e.cacheMutex);
    e.cache[key] = out;
    e.lru.remove(key);
    e.lru.push_front(key);
    while (e.lru.size() > std::max<std::size_t>(1, options_.cacheEntries)) {
      e.cache.erase(e.lru.back());
      e.lru.pop_back();
    }
    return out;
  }

 private:
  static std::string content_id(std::string_view body) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : body) {
      h ^= c;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  void check_size(std::string_view body) const {
    const auto nl = body.find('\n');
    std::istringstream head{std::string(body.substr(0, nl))};
    std::string magic;
    int d = 0;
    head >> magic >> d;
    std::int64_t n = 1;
    for (int i = 0; i < d && i < 3; ++i) {
      std::int64_t k = 0;
      head >> k;
      if (k > 0) n = n > options_.maxVertices ? n : n * k;
    }
    if (n > options_.maxVertices) throw TooLarge{n};
  }

  struct TooLarge {
    std::int64_t vertices;
  };

  std::shared_ptr<DatasetEntry> build_entry(const std::string& id, Dataset ds) const {
    auto e = std::make_shared<DatasetEntry>();
    e->id = id;
    e->range = value_range(ds.field);
    e->order = compute_order_field(ds.field, resolve_threads(options_.threadCount));
    const int threads = resolve_threads(options_.threadCount);
    auto mx = persistence_diagram(ds.mesh, ds.field, e->order, Polarity::MaxSaddle, threads);
    auto mn = persistence_diagram(ds.mesh, ds.field, e->order, Polarity::MinSaddle, threads);
    e->diagram = merged_diagram(mx, mn);
    e->curve = persistence_curve(e->diagram);
    auto [mins, maxs] = extract_extrema(ds.mesh, e->order.rank, threads);
    e->minima = static_cast<std::int64_t>(mins.size());
    e->maxima = static_cast<std::int64_t>(maxs.size());
    e->data = std::move(ds);
    return e;
  }

  std::shared_ptr<const CachedSimplification> lookup(DatasetEntry& e, std::int64_t key) {
    {
      std::shared_lock lock(e.cacheMutex);
      auto it = e.cache.find(key);
      if (it == e.cache.end()) return nullptr;
    }
    std::unique_lock lock(e.cacheMutex);
    auto it = e.cache.find(key);
    if (it == e.cache.end()) return nullptr;
    e.lru.remove(key);
    e.lru.push_front(key);
    return it->second;
  }

  void load_data_dir() {
    namespace fs = std::filesystem;
    if (!fs::exists(options_.dataDir)) return;
    for (const auto& p : fs::directory_iterator(options_.dataDir)) {
      if (p.path().extension() != ".sfg") continue;
      try {
        add_dataset(read_file(p.path().string()), false);
      } catch (const Error&) {
        // Unreadable files stay on disk and are skipped.
      }
    }
  }

  static void send_json(httplib::Response& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& msg) {
    send_json(res, {{"error", msg}}, status);
  }

  static std::optional<double> query_epsilon(const httplib::Request& req, const DatasetEntry& e) {
    if (!req.has_param("epsilon")) return std::nullopt;
    return parse_epsilon(req.get_param_value("epsilon"), e.range);
  }

  // Wraps a handler with dataset lookup and error mapping.
  template <class Fn>
  httplib::Server::Handler with_dataset(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      auto e = find(req.matches[1]);
      if (!e) return send_error(res, 404, "unknown dataset '" + std::string(req.matches[1]) + "'");
      try {
        fn(*e, req, res);
      } catch (const Error& err) {
        send_error(res, 400, err.what());
      } catch (const json::exception& err) {
        send_error(res, 400, err.what());
      } catch (const std::logic_error& err) {  // stoll on a bad query parameter
        send_error(res, 400, std::string("bad parameter: ") + err.what());
      }
    };
  }

  json slice(const DatasetEntry& e, const ScalarField& f, std::int64_t z, std::int64_t maxDim) const {
    const auto& dims = e.data.dims;
    const std::int64_t nx = dims[0], ny = dims.size() > 1 ? dims[1] : 1, nz = dims.size() > 2 ? dims[2] : 1;
    if (z < 0 || z >= nz) throw Error(ErrorCode::InvalidArgument, "z out of range");
    if (maxDim < 1) throw Error(ErrorCode::InvalidArgument, "maxDim must be positive");
    const std::int64_t step = std::max<std::int64_t>(1, (std::max(nx, ny) + maxDim - 1) / maxDim);
    const std::int64_t w = (nx + step - 1) / step, h = (ny + step - 1) / step;
    std::vector<double> out(static_cast<std::size_t>(w * h), -std::numeric_limits<double>::infinity());
    for (std::int64_t y = 0; y < ny; ++y)
      for (std::int64_t x = 0; x < nx; ++x) {
        auto& cell = out[static_cast<std::size_t>((y / step) * w + x / step)];
        cell = std::max(cell, f.values[static_cast<std::size_t>(x + nx * (y + ny * z))]);
      }
    return {{"dims", {w, h}}, {"step", step}, {"values", out}};
  }

  void install_routes() {
    http_.set_payload_max_length(static_cast<std::size_t>(options_.maxVertices) * 32 + 4096);
    http_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                               {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                               {"Access-Control-Allow-Headers", "Content-Type"}});
    http_.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http_.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        auto e = add_dataset(req.body);
        send_json(res,
                  {{"id", e->id},
                   {"dims", e->data.dims},
                   {"range", e->range},
                   {"extremumCounts", {{"minima", e->minima}, {"maxima", e->maxima}}}},
                  201);
      } catch (const TooLarge& t) {
        send_error(res, 413, "dataset has " + std::to_string(t.vertices) + " vertices, cap is " + std::to_string(options_.maxVertices));
      } catch (const Error& err) {
        send_error(res, 400, err.what());
      }
    });

    http_.Get("/datasets", [this](const httplib::Request&, httplib::Response& res) {
      json ids = json::array();
      std::shared_lock lock(datasetsMutex_);
      for (const auto& [id, e] : datasets_) ids.push_back({{"id", id}, {"dims", e->data.dims}, {"range", e->range}});
      send_json(res, ids);
    });

    http_.Get(R"(/datasets/([0-9a-f]+)/curve)",
              with_dataset([](DatasetEntry& e, const httplib::Request&, httplib::Response& res) { send_json(res, curve_to_json(e.curve)); }));

    http_.Get(R"(/datasets/([0-9a-f]+)/diagram)",
              with_dataset([](DatasetEntry& e, const httplib::Request&, httplib::Response& res) { send_json(res, diagram_to_json(e.diagram)); }));

    http_.Post(R"(/datasets/([0-9a-f]+)/simplify)",
               with_dataset([this](DatasetEntry& e, const httplib::Request& req, httplib::Response& res) {
                 const auto body = json::parse(req.body);
                 const auto& eps = body.at("epsilon");
                 const double epsilon = eps.is_string() ? parse_epsilon(eps.get<std::string>(), e.range) : eps.get<double>();
                 if (!(epsilon >= 0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be non-negative");
                 res.set_content(simplified(e, epsilon)->body, "application/json");
               }));

    http_.Get(R"(/datasets/([0-9a-f]+)/field)",
              with_dataset([this](DatasetEntry& e, const httplib::Request& req, httplib::Response& res) {
                const auto eps = query_epsilon(req, e);
                const std::int64_t z = req.has_param("z") ? std::stoll(req.get_param_value("z")) : 0;
                const std::int64_t maxDim = req.has_param("maxDim") ? std::stoll(req.get_param_value("maxDim")) : 256;
                if (!eps) return send_json(res, slice(e, e.data.field, z, maxDim));
                auto s = simplified(e, *eps);
                send_json(res, slice(e, s->field, z, maxDim));
              }));

    http_.Get(R"(/datasets/([0-9a-f]+)/criticalpoints)",
              with_dataset([this](DatasetEntry& e, const httplib::Request& req, httplib::Response& res) {
                const auto eps = query_epsilon(req, e);
                const int threads = resolve_threads(options_.threadCount);
                if (!eps) return send_json(res, critical_points_to_json(e.data.mesh, e.order, e.data.field, threads));
                auto s = simplified(e, *eps);
                send_json(res, critical_points_to_json(e.data.mesh, s->order, s->field, threads));
              }));
  }

  ServerOptions options_;
  httplib::Server http_;
  mutable std::shared_mutex datasetsMutex_;
  std::map<std::string, std::shared_ptr<DatasetEntry>> datasets_;
  std::counting_semaphore<64> workers_{2};
};

}  // namespace lts
