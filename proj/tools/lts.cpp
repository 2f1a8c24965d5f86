// lts: batch front end. Exit codes: 0 success, 1 verification failure, 2 usage or input error.

#include <chrono>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "lts/lts.hpp"
#include "lts/oracle.hpp"
#include "lts/server.hpp"

namespace {

using namespace lts;

void save_field(const std::string& path, const Dataset& ds, const ScalarField& f) {
  const bool binary = path.size() >= 5 && path.substr(path.size() - 5) == ".sfgb";
  write_file(path, binary ? write_sfgb(ds.dims, f) : write_sfg(ds.dims, f));
}

std::vector<int> parse_thread_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int t = 0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), t);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size() || t < 1)
      throw Error(ErrorCode::InvalidArgument, "bad thread count '" + item + "'");
    out.push_back(t);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty thread list");
  return out;
}

int cmd_simplify(const std::string& input, const std::string& epsilon, const std::string& preserve, const std::string& output,
                 const std::string& reportPath, int threads, bool noRestore) {
  const auto ds = load_field(input);
  SimplifyOptions opt;
  opt.threadCount = threads;
  opt.restoreInteriorExtrema = !noRestore;
  ScalarField g;
  SimplifyReport report;
  json extra;
  if (!preserve.empty()) {
    const auto F = compute_order_field(ds.field, resolve_threads(threads));
    const auto ids = read_preserve_list(read_file(preserve), ds.mesh.vertex_count());
    auto res = simplify_field(ds.mesh, ds.field, constraints_from_ids(ds.mesh, F, ids), opt);
    g = std::move(res.field);
    report = std::move(res.report);
    extra = {{"mode", "preserve"}, {"preserved", ids.size()}};
  } else {
    const double eps = parse_epsilon(epsilon, value_range(ds.field));
    auto res = persistence_simplify(ds.mesh, ds.field, eps, opt);
    g = std::move(res.field);
    report = std::move(res.report);
    extra = {{"mode", "epsilon"},
             {"epsilon", eps},
             {"removedMaxima", res.maxSide.pairs.size()},
             {"removedMinima", res.minSide.pairs.size()}};
  }
  save_field(output, ds, g);
  if (!reportPath.empty()) {
    auto j = report_to_json(report);
    j.update(extra);
    write_file(reportPath, j.dump(2) + "\n");
  }
  std::cerr << "regions " << report.regionCount << ", max iterations " << report.maxIterationCount << ", deviation "
            << report.maxInfinityDeviation << "\n";
  return 0;
}

int cmd_diagram(const std::string& input, const std::string& epsilon, const std::string& output, const std::string& polarity,
                int threads) {
  const auto ds = load_field(input);
  const auto F = compute_order_field(ds.field, resolve_threads(threads));
  auto half = [&](Polarity p) {
    if (epsilon.empty()) return persistence_diagram(ds.mesh, ds.field, F, p, threads);
    const double eps = parse_epsilon(epsilon, value_range(ds.field));
    return compute_extremum_saddle_pairs(ds.mesh, ds.field, F, p, eps, threads).pairs;
  };
  std::vector<PersistencePair> pairs;
  if (polarity == "max") pairs = half(Polarity::MaxSaddle);
  else if (polarity == "min") pairs = half(Polarity::MinSaddle);
  else pairs = merged_diagram(half(Polarity::MaxSaddle), half(Polarity::MinSaddle));
  write_file(output, diagram_to_json(pairs).dump(2) + "\n");
  return 0;
}

int cmd_curve(const std::string& input, const std::string& output, int threads) {
  const auto ds = load_field(input);
  const auto F = compute_order_field(ds.field, resolve_threads(threads));
  const auto pairs = merged_diagram(persistence_diagram(ds.mesh, ds.field, F, Polarity::MaxSaddle, threads),
                                    persistence_diagram(ds.mesh, ds.field, F, Polarity::MinSaddle, threads));
  write_file(output, curve_to_json(persistence_curve(pairs)).dump(2) + "\n");
  return 0;
}

int cmd_synth(const std::string& specPath, const std::string& output) {
  const auto spec = parse_synth_spec(json::parse(read_file(specPath)));
  const auto ds = synth_field(spec);
  save_field(output, ds, ds.field);
  return 0;
}

// Independent checks of a simplified field against its original.
int cmd_verify(const std::string& original, const std::string& simplified, const std::string& epsilon) {
  const auto f = load_field(original);
  const auto g = load_field(simplified);
  if (f.dims != g.dims) throw Error(ErrorCode::SizeMismatch, "original and simplified dims differ");
  const double eps = parse_epsilon(epsilon, value_range(f.field));
  json out;
  bool ok = true;

  const double dev = max_abs_difference(f.field, g.field);
  out["maxInfinityDeviation"] = dev;
  out["boundOk"] = dev <= eps;
  ok = ok && dev <= eps;

  // Expected extrema: those of f whose oracle pair is at least epsilon persistent.
  std::set<VertexId> removed;
  for (auto pol : {Polarity::MaxSaddle, Polarity::MinSaddle})
    for (const auto& p : oracle::oracle_pairs_sweep(f.mesh, f.field, pol))
      if (p.saddle != kNoVertex && p.persistence < eps) removed.insert(p.extremum);
  const auto F = compute_order_field(f.field);
  const auto G = compute_order_field(g.field);
  auto [fmin, fmax] = oracle::brute_force_extrema(f.mesh, F.rank);
  auto [gmin, gmax] = oracle::brute_force_extrema(g.mesh, G.rank);
  std::vector<VertexId> wantMin, wantMax;
  for (auto v : fmin)
    if (!removed.count(v)) wantMin.push_back(v);
  for (auto v : fmax)
    if (!removed.count(v)) wantMax.push_back(v);
  const bool extremaOk = wantMin == gmin && wantMax == gmax;
  out["extremaOk"] = extremaOk;
  out["expected"] = {{"minima", wantMin.size()}, {"maxima", wantMax.size()}};
  out["found"] = {{"minima", gmin.size()}, {"maxima", gmax.size()}};
  ok = ok && extremaOk;

  // Reported, not enforced: flattening a hill can lower the saddle of a
  // neighboring surviving extremum below epsilon.
  std::int64_t residual = 0;
  for (auto pol : {Polarity::MaxSaddle, Polarity::MinSaddle})
    for (const auto& p : oracle::oracle_pairs_sweep(g.mesh, g.field, pol))
      if (p.saddle != kNoVertex && p.persistence < eps) ++residual;
  out["residualPairsBelowEpsilon"] = residual;
  out["ok"] = ok;
  std::cout << out.dump(2) << "\n";
  return ok ? 0 : 1;
}

int cmd_bench(const std::string& input, const std::string& threadList, const std::string& epsilon) {
  const auto ds = load_field(input);
  const double eps = parse_epsilon(epsilon, value_range(ds.field));
  json runs = json::array();
  double base = 0;
  for (int t : parse_thread_list(threadList)) {
    SimplifyOptions opt;
    opt.threadCount = t;
    const auto t0 = std::chrono::steady_clock::now();
    auto res = persistence_simplify(ds.mesh, ds.field, eps, opt);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& tm = res.report.timings;
    const double simplification = tm.total();
    if (runs.empty()) base = simplification;
    runs.push_back({{"threads", t},
                    {"wall", wall},
                    {"pairing", tm.discover},
                    {"localize", tm.localize},
                    {"integrate", tm.integrate},
                    {"restore", tm.restore},
                    {"verify", tm.verify},
                    {"realize", tm.realize},
                    {"simplification", simplification},
                    {"speedup", simplification > 0 ? base / simplification : 0.0},
                    {"regions", res.report.regionCount}});
  }
  std::cout << json{{"vertices", ds.mesh.vertex_count()}, {"epsilon", eps}, {"runs", runs}}.dump(2) << "\n";
  return 0;
}

int cmd_serve(const std::string& host, int port, const std::string& dataDir, std::int64_t maxVertices, int threads) {
  ServerOptions opt;
  opt.dataDir = dataDir;
  opt.maxVertices = maxVertices;
  opt.threadCount = threads;
  Server server(opt);
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized topological simplification of scalar fields"};
  app.require_subcommand(1);

  std::string input, output, epsilon, preserve, report, polarity = "both", spec, original, simplified, threadList = "1",
                                                      dataDir, host = "127.0.0.1";
  int threads = 0, port = 8080;
  bool noRestore = false;
  std::int64_t maxVertices = std::int64_t{1} << 27;

  auto* simplify = app.add_subcommand("simplify", "Remove extrema by persistence or keep a given list");
  simplify->add_option("--input", input, "Input field (SFG or SFGB)")->required()->check(CLI::ExistingFile);
  auto* eps = simplify->add_option("--epsilon", epsilon, "Persistence threshold, E or E% of the range");
  auto* keep = simplify->add_option("--preserve", preserve, "File with one extremum id per line")->check(CLI::ExistingFile);
  eps->excludes(keep);
  simplify->add_option("--output", output, "Output field")->required();
  simplify->add_option("--report", report, "Write a JSON report");
  simplify->add_option("--threads", threads, "Worker threads (0: all)")->check(CLI::NonNegativeNumber);
  simplify->add_flag("--no-restore", noRestore, "Skip restoring preserved extrema swallowed by a region");

  auto* diagram = app.add_subcommand("diagram", "Extremum-saddle persistence pairs");
  diagram->add_option("--input", input)->required()->check(CLI::ExistingFile);
  diagram->add_option("--epsilon", epsilon, "Only pairs below this persistence");
  diagram->add_option("--output", output)->required();
  diagram->add_option("--polarity", polarity)->check(CLI::IsMember({"max", "min", "both"}));
  diagram->add_option("--threads", threads)->check(CLI::NonNegativeNumber);

  auto* curve = app.add_subcommand("curve", "Persistence curve of both polarities");
  curve->add_option("--input", input)->required()->check(CLI::ExistingFile);
  curve->add_option("--output", output)->required();
  curve->add_option("--threads", threads)->check(CLI::NonNegativeNumber);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic field from a JSON spec");
  synth->add_option("--spec", spec)->required()->check(CLI::ExistingFile);
  synth->add_option("--output", output)->required();

  auto* verify = app.add_subcommand("verify", "Check a simplified field against the reference pairing");
  verify->add_option("--original", original)->required()->check(CLI::ExistingFile);
  verify->add_option("--simplified", simplified)->required()->check(CLI::ExistingFile);
  verify->add_option("--epsilon", epsilon)->required();

  auto* bench = app.add_subcommand("bench", "Per-phase timings for several thread counts");
  bench->add_option("--input", input)->required()->check(CLI::ExistingFile);
  bench->add_option("--threads", threadList, "Comma separated, e.g. 1,2,4,8");
  bench->add_option("--epsilon", epsilon)->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--host", host);
  serve->add_option("--data-dir", dataDir);
  serve->add_option("--max-vertices", maxVertices)->check(CLI::PositiveNumber);
  serve->add_option("--threads", threads)->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simplify) {
      if (epsilon.empty() && preserve.empty()) {
        std::cerr << "error: simplify needs --epsilon or --preserve\n";
        return 2;
      }
      return cmd_simplify(input, epsilon, preserve, output, report, threads, noRestore);
    }
    if (*diagram) return cmd_diagram(input, epsilon, output, polarity, threads);
    if (*curve) return cmd_curve(input, output, threads);
    if (*synth) return cmd_synth(spec, output);
    if (*verify) return cmd_verify(original, simplified, epsilon);
    if (*bench) return cmd_bench(input, threadList, epsilon);
    if (*serve) return cmd_serve(host, port, dataDir, maxVertices, threads);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
