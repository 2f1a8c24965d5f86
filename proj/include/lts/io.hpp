#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lts/common.hpp"
#include "lts/criticality.hpp"
#include "lts/lts_engine.hpp"
#include "lts/order_field.hpp"
#include "lts/persistence.hpp"
#include "lts/triangulation.hpp"

namespace lts {

using json = nlohmann::json;

/// A grid field together with its triangulation.
struct Dataset {
  std::vector<std::int64_t> dims;
  Triangulation mesh;
  ScalarField field;
};

inline Dataset make_dataset(std::vector<std::int64_t> dims, ScalarField field) {
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  if (field.size() != n) throw Error(ErrorCode::SizeMismatch, "field has " + std::to_string(field.size()) + " values, dims need " + std::to_string(n));
  auto mesh = Triangulation::grid(dims);
  return {std::move(dims), std::move(mesh), std::move(field)};
}

/// SplitMix64, the seeding generator from Steele, Lea and Flood; identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------- SFG text

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::int64_t> parse_header(std::string_view line, std::string_view magic, std::size_t lineNo) {
  std::istringstream in{std::string(line)};
  std::string word;
  in >> word;
  if (word != magic) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": expected '" + std::string(magic) + "' header");
  int d = 0;
  if (!(in >> d) || (d != 2 && d != 3))
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": dimension must be 2 or 3");
  std::vector<std::int64_t> dims(static_cast<std::size_t>(d));
  for (auto& x : dims)
    if (!(in >> x) || x < 2) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": bad grid extent");
  std::string extra;
  if (in >> extra) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": trailing header token '" + extra + "'");
  return dims;
}

}  // namespace detail

inline Dataset read_sfg(std::string_view text) {
  std::size_t pos = text.find('\n');
  const auto header = text.substr(0, pos);
  auto dims = detail::parse_header(header, "SFG", 1);
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  ScalarField f;
  f.values.reserve(static_cast<std::size_t>(n));
  std::size_t lineNo = 1, lastLine = 1;
  const char* p = pos == std::string_view::npos ? text.data() + text.size() : text.data() + pos;
  const char* end = text.data() + text.size();
  while (p < end) {
    if (*p == '\n') {
      ++lineNo;
      ++p;
      continue;
    }
    if (*p == ' ' || *p == '\t' || *p == '\r') {
      ++p;
      continue;
    }
    const char* tok = p;
    while (p < end && *p != ' ' && *p != '\t' && *p != '\r' && *p != '\n') ++p;
    double v = 0;
    auto res = std::from_chars(tok, p, v);
    if (res.ec != std::errc() || res.ptr != p)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": bad value '" + std::string(tok, p) + "'");
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "line " + std::to_string(lineNo) + ": non-finite value");
    if (static_cast<std::int64_t>(f.values.size()) == n)
      throw Error(ErrorCode::SizeMismatch, "line " + std::to_string(lineNo) + ": more than " + std::to_string(n) + " values");
    f.values.push_back(v);
    lastLine = lineNo;
  }
  if (static_cast<std::int64_t>(f.values.size()) != n)
    throw Error(ErrorCode::SizeMismatch, "line " + std::to_string(lastLine) + ": expected " + std::to_string(n) +
                                             " values, found " + std::to_string(f.values.size()));
  return make_dataset(std::move(dims), std::move(f));
}

/// One grid row (x-fastest) per line, shortest round-trip decimal form.
inline std::string write_sfg(const std::vector<std::int64_t>& dims, const ScalarField& f) {
  std::string out = "SFG " + std::to_string(dims.size());
  for (auto d : dims) out += " " + std::to_string(d);
  out += "\n";
  const auto nx = static_cast<std::size_t>(dims.at(0));
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    out += detail::format_double(f.values[i]);
    out += (i + 1) % nx == 0 ? '\n' : ' ';
  }
  return out;
}

// ---------------------------------------------------------------- SFGB binary
// Header line "SFGB <d> <nx> <ny> [<nz>]\n", then n little-endian float64.

inline std::string write_sfgb(const std::vector<std::int64_t>& dims, const ScalarField& f) {
  std::string out = "SFGB " + std::to_string(dims.size());
  for (auto d : dims) out += " " + std::to_string(d);
  out += "\n";
  const auto head = out.size();
  out.resize(head + 8 * f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &f.values[i], 8);
    for (int b = 0; b < 8; ++b) out[head + 8 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  return out;
}

inline Dataset read_sfgb(std::string_view data) {
  const auto pos = data.find('\n');
  if (pos == std::string_view::npos) throw Error(ErrorCode::ParseError, "line 1: missing SFGB header");
  auto dims = detail::parse_header(data.substr(0, pos), "SFGB", 1);
  std::int64_t n = 1;
  for (auto d : dims) n *= d;
  const auto body = data.substr(pos + 1);
  if (body.size() != static_cast<std::size_t>(n) * 8)
    throw Error(ErrorCode::SizeMismatch, "SFGB payload holds " + std::to_string(body.size()) + " bytes, expected " + std::to_string(n * 8));
  ScalarField f;
  f.values.resize(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(body[8 * i + b])) << (8 * b);
    std::memcpy(&f.values[i], &bits, 8);
    if (!std::isfinite(f.values[i])) throw Error(ErrorCode::NonFiniteValue, "value " + std::to_string(i) + " is not finite");
  }
  return make_dataset(std::move(dims), std::move(f));
}

/// Reads SFG or SFGB, picking the format from the magic word.
inline Dataset parse_field(std::string_view data) {
  if (data.substr(0, 5) == "SFGB ") return read_sfgb(data);
  return read_sfg(data);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << data;
}

inline Dataset load_field(const std::string& path) { return parse_field(read_file(path)); }

// ---------------------------------------------------------------- synthesis

struct Bump {
  std::vector<double> center;
  double height = 1;
  double radius = 1;  // Gaussian standard deviation in grid units
};

struct SynthSpec {
  enum class Kind { UniformRandom, Bumps, BumpsPlusNoise };
  std::vector<std::int64_t> dims;
  Kind kind = Kind::UniformRandom;
  std::uint64_t seed = 0;
  std::vector<Bump> bumps;
  double noiseAmplitude = 0;
};

inline SynthSpec parse_synth_spec(const json& j) {
  SynthSpec s;
  try {
    s.dims = j.at("dims").get<std::vector<std::int64_t>>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "uniform_random") s.kind = SynthSpec::Kind::UniformRandom;
    else if (kind == "bumps") s.kind = SynthSpec::Kind::Bumps;
    else if (kind == "bumps_plus_noise") s.kind = SynthSpec::Kind::BumpsPlusNoise;
    else throw Error(ErrorCode::InvalidArgument, "unknown synth kind '" + kind + "'");
    s.seed = j.value("seed", std::uint64_t{0});
    s.noiseAmplitude = j.value("noiseAmplitude", 0.0);
    if (j.contains("bumps"))
      for (const auto& b : j.at("bumps"))
        s.bumps.push_back({b.at("center").get<std::vector<double>>(), b.at("height").get<double>(), b.at("radius").get<double>()});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("synth spec: ") + e.what());
  }
  return s;
}

inline Dataset synth_field(const SynthSpec& spec) {
  if (spec.dims.size() != 2 && spec.dims.size() != 3) throw Error(ErrorCode::InvalidArgument, "synth needs 2 or 3 dims");
  auto mesh = Triangulation::grid(spec.dims);
  const auto n = mesh.vertex_count();
  ScalarField f;
  f.values.assign(static_cast<std::size_t>(n), 0.0);
  if (spec.kind == SynthSpec::Kind::UniformRandom) {
    SplitMix64 rng(spec.seed);
    for (auto& v : f.values) v = rng.uniform();
    return {spec.dims, std::move(mesh), std::move(f)};
  }
  for (const auto& b : spec.bumps) {
    if (!(b.radius > 0)) throw Error(ErrorCode::InvalidArgument, "bump radius must be positive");
    if (b.center.size() != spec.dims.size()) throw Error(ErrorCode::InvalidArgument, "bump center has the wrong dimension");
  }
  for (VertexId v = 0; v < n; ++v) {
    const auto p = mesh.grid_position(v);
    double value = 0;
    for (const auto& b : spec.bumps) {
      double d2 = 0;
      for (std::size_t a = 0; a < spec.dims.size(); ++a) d2 += (p[a] - b.center[a]) * (p[a] - b.center[a]);
      value += b.height * std::exp(-d2 / (2 * b.radius * b.radius));
    }
    f.values[v] = value;
  }
  if (spec.kind == SynthSpec::Kind::BumpsPlusNoise) {
    SplitMix64 rng(spec.seed);
    for (auto& v : f.values) v += spec.noiseAmplitude * (2 * rng.uniform() - 1);
  }
  return {spec.dims, std::move(mesh), std::move(f)};
}

// ---------------------------------------------------------------- JSON

inline json diagram_to_json(const std::vector<PersistencePair>& pairs) {
  json a = json::array();
  for (const auto& p : pairs)
    a.push_back({{"extremumVertex", p.extremum},
                 {"saddleVertex", p.saddle == kNoVertex ? json(nullptr) : json(p.saddle)},
                 {"birth", p.birth},
                 {"death", p.death},
                 {"persistence", p.persistence},
                 {"polarity", to_string(p.polarity)}});
  return a;
}

inline std::vector<PersistencePair> diagram_from_json(const json& a) {
  std::vector<PersistencePair> out;
  for (const auto& e : a) {
    PersistencePair p;
    p.extremum = e.at("extremumVertex").get<VertexId>();
    p.saddle = e.at("saddleVertex").is_null() ? kNoVertex : e.at("saddleVertex").get<VertexId>();
    p.birth = e.at("birth").get<double>();
    p.death = e.at("death").get<double>();
    p.persistence = e.at("persistence").get<double>();
    p.polarity = e.at("polarity").get<std::string>() == "max-saddle" ? Polarity::MaxSaddle : Polarity::MinSaddle;
    out.push_back(p);
  }
  return out;
}

inline json curve_to_json(const PersistenceCurve& curve) {
  json a = json::array();
  for (const auto& c : curve) a.push_back({{"threshold", c.threshold}, {"count", c.count}});
  return a;
}

inline PersistenceCurve curve_from_json(const json& a) {
  PersistenceCurve c;
  for (const auto& e : a) c.push_back({e.at("threshold").get<double>(), e.at("count").get<std::int64_t>()});
  return c;
}

inline json critical_points_to_json(const Triangulation& mesh, const OrderField& order, const ScalarField& f,
                                    int threads = 1) {
  const auto cs = extract_critical_points(mesh, order, threads);
  std::vector<std::pair<VertexId, const char*>> all;
  for (auto v : cs.minima) all.emplace_back(v, "minimum");
  for (auto v : cs.maxima) all.emplace_back(v, "maximum");
  for (const auto& s : cs.saddles) all.emplace_back(s.vertex, "saddle");
  std::sort(all.begin(), all.end());
  json a = json::array();
  for (const auto& [v, kind] : all)
    a.push_back({{"vertexId", v}, {"kind", kind}, {"order", order.rank[v]}, {"value", f.values[v]}});
  return a;
}

inline json report_to_json(const SimplifyReport& r) {
  std::map<int, std::int64_t> histogram;
  for (auto i : r.iterations) ++histogram[i];
  json hist = json::object();
  for (const auto& [k, v] : histogram) hist[std::to_string(k)] = v;
  return {{"regionCount", r.regionCount},
          {"largestRegion", r.largestRegion},
          {"iterations", {{"max", r.maxIterationCount}, {"mean", r.meanIterationCount}, {"histogram", hist}, {"perRegion", r.iterations}}},
          {"rounds", r.rounds},
          {"restoredMinima", r.restoredMinima},
          {"restoredMaxima", r.restoredMaxima},
          {"maxInfinityDeviation", r.maxInfinityDeviation},
          {"maxRegionHeight", r.maxRegionHeight},
          {"zetaSlack", r.zetaSlack},
          {"timings",
           {{"discover", r.timings.discover},
            {"localize", r.timings.localize},
            {"integrate", r.timings.integrate},
            {"restore", r.timings.restore},
            {"verify", r.timings.verify},
            {"realize", r.timings.realize},
            {"total", r.timings.total()}}}};
}

/// One vertex id per line; blank lines and '#' comments are ignored.
inline std::vector<VertexId> read_preserve_list(std::string_view text, VertexId n) {
  std::vector<VertexId> ids;
  std::size_t lineNo = 0, start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++lineNo;
    auto line = text.substr(start, end - start);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b != std::string_view::npos) {
      line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
      VertexId v = 0;
      auto res = std::from_chars(line.data(), line.data() + line.size(), v);
      if (res.ec != std::errc() || res.ptr != line.data() + line.size())
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": malformed vertex id '" + std::string(line) + "'");
      if (v < 0 || v >= n)
        throw Error(ErrorCode::VertexOutOfRange, "line " + std::to_string(lineNo) + ": vertex id " + std::to_string(v) + " not in [0, " + std::to_string(n) + ")");
      ids.push_back(v);
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return ids;
}

/// Splits a list of vertex ids into minima and maxima of F.
inline ConstraintSet constraints_from_ids(const Triangulation& mesh, const OrderField& F, const std::vector<VertexId>& ids) {
  ConstraintSet c;
  for (auto v : ids) {
    if (is_minimum(mesh, F.rank, v)) c.preserveMinima.push_back(v);
    else if (is_maximum(mesh, F.rank, v)) c.preserveMaxima.push_back(v);
    else throw Error(ErrorCode::ConstraintNotExtremum, "vertex " + std::to_string(v) + " is not an extremum");
  }
  return c;
}

/// Parses "0.3" (field units) or "5%" (percent of the value range).
inline double parse_epsilon(const std::string& text, double range) {
  std::string s = text;
  bool percent = !s.empty() && s.back() == '%';
  if (percent) s.pop_back();
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::InvalidArgument, "bad epsilon '" + text + "'");
  if (!(v >= 0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be non-negative");
  return percent ? v / 100.0 * range : v;
}

}  // namespace lts
