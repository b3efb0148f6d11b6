#pragma once

// Config ingestion and result persistence: distribution JSON, RFC-4180 CSV,
// direct SVG emission (no plotting dependency), SHA-256 digests, and the
// per-run experiment manifest.

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "combust/classifier.hpp"
#include "combust/combustion.hpp"
#include "combust/dist.hpp"

namespace combust {

using nlohmann::json;

// ---------------------------------------------------------------- sha256 --

namespace sha256_detail {
inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

inline constexpr std::array<std::uint32_t, 64> kK = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};
}  // namespace sha256_detail

inline std::string sha256_hex(const std::string& data) {
  using namespace sha256_detail;
  std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                    0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::string msg = data;
  const std::uint64_t bitlen = static_cast<std::uint64_t>(msg.size()) * 8;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bitlen >> (8 * i)) & 0xff));
  for (std::size_t off = 0; off < msg.size(); off += 64) {
    std::array<std::uint32_t, 64> w{};
    for (int i = 0; i < 16; ++i)
      w[i] = (static_cast<std::uint8_t>(msg[off + 4 * i]) << 24) |
             (static_cast<std::uint8_t>(msg[off + 4 * i + 1]) << 16) |
             (static_cast<std::uint8_t>(msg[off + 4 * i + 2]) << 8) |
             static_cast<std::uint8_t>(msg[off + 4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    auto [a, b, c, d, e, f, g, hh] = h;
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = hh + s1 + ch + kK[i] + w[i];
      const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = s0 + maj;
      hh = g; g = f; f = e; e = d + t1; d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }
  char out[65];
  for (int i = 0; i < 8; ++i) std::snprintf(out + 8 * i, 9, "%08x", h[i]);
  return std::string(out, 64);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// ------------------------------------------------------------------- csv --

inline std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { append_row(header); }
  void append_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) body_ += ',';
      body_ += csv_escape(fields[i]);
    }
    body_ += "\r\n";
  }
  const std::string& str() const { return body_; }

 private:
  std::string body_;
};

// two-column (k, pmf) table
inline std::vector<double> read_pmf_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read pmf csv " + path);
  std::vector<double> pmf;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("k,", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const std::size_t k = static_cast<std::size_t>(std::stoull(line.substr(0, comma)));
    const double p = std::stod(line.substr(comma + 1));
    if (pmf.size() <= k) pmf.resize(k + 1, 0.0);
    pmf[k] = p;
  }
  if (pmf.empty()) throw std::runtime_error("empty pmf csv " + path);
  return pmf;
}

// ---------------------------------------------------- distribution <-> json

inline CountDistribution dist_from_json(const json& j, bool allow_trivial = false);

inline std::shared_ptr<CountDistribution> continuation_from_json(const json& j) {
  return std::make_shared<CountDistribution>(dist_from_json(j, /*allow_trivial=*/true));
}

inline CountDistribution dist_from_json(const json& j, bool allow_trivial) {
  if (!j.is_object() || !j.contains("kind"))
    throw std::invalid_argument("distribution json needs a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "delta") return CountDistribution::delta(j.at("m").get<std::uint64_t>(), allow_trivial);
  if (kind == "geometric") return CountDistribution::geometric(j.at("p").get<double>());
  if (kind == "poisson") return CountDistribution::poisson(j.at("lambda").get<double>());
  if (kind == "power_log_tail")
    return CountDistribution::power_log_tail(j.at("a").get<double>(), j.at("c").get<double>());
  if (kind == "log_log_tail") return CountDistribution::log_log_tail(j.at("c").get<double>());
  if (kind == "tabulated") {
    std::vector<double> pmf;
    if (j.contains("pmf"))
      pmf = j.at("pmf").get<std::vector<double>>();
    else if (j.contains("path"))
      pmf = read_pmf_csv(j.at("path").get<std::string>());
    else
      throw std::invalid_argument("tabulated needs \"pmf\" or \"path\"");
    const bool truncated = j.value("truncated", false);
    std::shared_ptr<CountDistribution> cont;
    if (j.contains("continuation")) cont = continuation_from_json(j.at("continuation"));
    return CountDistribution::tabulated(std::move(pmf), truncated, std::move(cont),
                                        allow_trivial);
  }
  throw std::invalid_argument("unknown distribution kind: " + kind);
}

inline json dist_to_json(const CountDistribution& d) {
  json j;
  j["kind"] = to_string(d.kind());
  switch (d.kind()) {
    case DistKind::Delta: j["m"] = d.param_m(); break;
    case DistKind::Geometric: j["p"] = d.param_p(); break;
    case DistKind::Poisson: j["lambda"] = d.param_lambda(); break;
    case DistKind::PowerLogTail:
      j["a"] = d.param_a();
      j["c"] = d.param_c();
      break;
    case DistKind::LogLogTail: j["c"] = d.param_c(); break;
    case DistKind::Tabulated:
      j["pmf"] = d.table();
      j["truncated"] = d.truncated();
      if (d.continuation()) j["continuation"] = dist_to_json(*d.continuation());
      break;
  }
  return j;
}

// ------------------------------------------------------- report serializers

inline json trace_to_json(const SeriesTrace& t) {
  json j;
  j["base"] = t.base;
  j["verdict"] = to_string(t.verdict);
  j["raw_trend"] = to_string(t.raw_trend);
  j["probe"] = to_string(t.probe);
  j["probe_level"] = t.probe_level;
  j["overflow_guard"] = t.overflow_guard;
  if (std::isfinite(t.remainder_estimate)) j["remainder_estimate"] = t.remainder_estimate;
  if (!t.note.empty()) j["note"] = t.note;
  json cps = json::array();
  for (const auto& cp : t.checkpoints) cps.push_back({{"m", cp.m}, {"partial_sum", cp.partial_sum}});
  j["checkpoints"] = cps;
  return j;
}

inline json report_to_json(const ClassificationReport& r) {
  json j;
  j["dimension"] = r.dimension;
  j["b_grid"] = r.b_grid;
  j["verdict"] = to_string(r.verdict);
  j["via_ii"] = r.via_ii;
  j["via_iii"] = r.via_iii;
  j["conflict"] = r.conflict;
  j["b_robust_i"] = r.b_robust_i;
  j["b_robust_iii"] = r.b_robust_iii;
  if (!r.notes.empty()) j["notes"] = r.notes;
  auto arr = [](const std::vector<SeriesTrace>& v) {
    json a = json::array();
    for (const auto& t : v) a.push_back(trace_to_json(t));
    return a;
  };
  j["criterion_i"] = arr(r.criterion_i);
  j["criterion_ii"] = arr(r.criterion_ii);
  j["criterion_iii"] = arr(r.criterion_iii);
  if (r.log_moment_check) {
    j["log_moment"] = {{"partial", r.log_moment_check->partial},
                       {"verdict", to_string(r.log_moment_check->verdict)}};
    if (std::isfinite(r.log_moment_check->tail_bound))
      j["log_moment"]["tail_bound"] = r.log_moment_check->tail_bound;
  }
  return j;
}

inline std::string report_to_csv(const ClassificationReport& r) {
  CsvWriter csv({"criterion", "B", "truncation", "partial_sum"});
  auto emit = [&](const char* name, const std::vector<SeriesTrace>& traces) {
    for (const auto& t : traces)
      for (const auto& cp : t.checkpoints)
        csv.append_row({name, fmt_double(t.base), std::to_string(cp.m), fmt_double(cp.partial_sum)});
  };
  emit("i", r.criterion_i);
  emit("ii", r.criterion_ii);
  emit("iii", r.criterion_iii);
  return csv.str();
}

inline std::string trajectory_to_csv(const Trajectory& t) {
  CsvWriter csv({"t", "visited_count", "tip", "leftmost", "events"});
  for (const auto& s : t.snapshots)
    csv.append_row({fmt_double(s.t), std::to_string(s.visited), std::to_string(s.tip),
                    std::to_string(s.leftmost), std::to_string(s.events)});
  return csv.str();
}

inline json trajectory_summary_json(const Trajectory& t, const SpreadRateEstimate& est) {
  json j;
  j["dim"] = t.dim;
  j["termination"] = to_string(t.termination);
  j["explosion_suspected"] = t.explosion_suspected;
  j["density_ratio"] = std::isfinite(t.density_ratio) ? t.density_ratio : -1.0;
  j["end_time"] = t.end_time;
  j["events"] = t.events;
  j["visited"] = t.visited;
  j["jumps_total"] = t.jumps_total;
  j["jumps_axis0"] = t.jumps_axis0;
  j["spread_rate"] = {{"verdict", to_string(est.verdict)}};
  if (std::isfinite(est.loglog_slope)) j["spread_rate"]["loglog_slope"] = est.loglog_slope;
  json w = json::array();
  for (const auto& [tt, ratio] : est.speed_windows) w.push_back({{"t", tt}, {"tip_over_t", ratio}});
  j["spread_rate"]["speed_windows"] = w;
  return j;
}

// -------------------------------------------------------------------- svg --

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Two-panel line plot (linear and log-log), deterministic byte output.
inline std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                                 const std::string& slope_annotation = {}) {
  constexpr int w = 460, h = 360, mx = 55, my = 40;
  static const char* kColors[] = {"#1f6fb2", "#c1403d", "#3d8f5f", "#8854a1", "#b07c28"};
  auto build_panel = [&](bool loglog, int x_off) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
      for (auto [x, y] : s.points) {
        if (loglog && (x <= 0.0 || y <= 0.0)) continue;
        const double px = loglog ? std::log10(x) : x;
        const double py = loglog ? std::log10(y) : y;
        xmin = std::min(xmin, px); xmax = std::max(xmax, px);
        ymin = std::min(ymin, py); ymax = std::max(ymax, py);
      }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    auto sx = [&](double x) { return mx + x_off + (x - xmin) / (xmax - xmin) * (w - 2 * mx); };
    auto sy = [&](double y) { return h - my - (y - ymin) / (ymax - ymin) * (h - 2 * my); };
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" "
                  "stroke=\"#333\"/>\n",
                  mx + x_off, my, w - 2 * mx, h - 2 * my);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
                  x_off + w / 2, h - 8, loglog ? "log10 t" : "t");
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"12\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 %d %d)\">%s</text>\n",
                  x_off + 14, h / 2, x_off + 14, h / 2, loglog ? "log10 tip" : "tip");
    out += buf;
    // axis extremes
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"10\">%.3g</text>\n"
                  "<text x=\"%d\" y=\"%d\" font-size=\"10\">%.3g</text>\n",
                  mx + x_off, h - my + 14, loglog ? std::pow(10, xmin) : xmin,
                  w - mx + x_off - 30, h - my + 14, loglog ? std::pow(10, xmax) : xmax);
    out += buf;
    int color = 0;
    for (const auto& s : series) {
      std::string pts;
      for (auto [x, y] : s.points) {
        if (loglog && (x <= 0.0 || y <= 0.0)) continue;
        const double px = loglog ? std::log10(x) : x;
        const double py = loglog ? std::log10(y) : y;
        char p[64];
        std::snprintf(p, sizeof p, "%.2f,%.2f ", sx(px), sy(py));
        pts += p;
      }
      std::snprintf(buf, sizeof buf,
                    "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" points=\"%s\"/>\n",
                    kColors[color % 5], pts.c_str());
      out += buf;
      ++color;
    }
    return out;
  };
  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n",
                2 * w, h);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">%s</text>\n", w,
                title.c_str());
  svg += buf;
  svg += build_panel(false, 0);
  svg += build_panel(true, w);
  if (!slope_annotation.empty()) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"34\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
                  w + w / 2, slope_annotation.c_str());
    svg += buf;
  }
  int color = 0, ly = my + 14;
  for (const auto& s : series) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-size=\"11\" fill=\"%s\">%s</text>\n", mx + 6, ly,
                  kColors[color % 5], xml_escape(s.label).c_str());
    svg += buf;
    ++color;
    ly += 14;
  }
  svg += "</svg>\n";
  return svg;
}

// --------------------------------------------------------------- manifest --

inline constexpr const char* kToolVersion = "0.1.0";

struct ManifestOutput {
  std::string path;
  std::string sha256;
  std::uint64_t bytes;
};

inline json make_manifest(const std::string& subcommand, const std::vector<std::string>& argv,
                          const json& config, std::uint64_t seed,
                          const std::vector<std::string>& output_paths, double wall_ms,
                          const json& counters = json::object()) {
  json j;
  j["tool"] = "combustlab";
  j["version"] = kToolVersion;
  j["subcommand"] = subcommand;
  j["args"] = argv;
  j["config"] = config;
  j["seed"] = seed;
  j["wall_ms"] = wall_ms;
  j["counters"] = counters;
  json outs = json::array();
  std::string digest_concat;
  for (const auto& p : output_paths) {
    const std::string content = read_file(p);
    const std::string digest = sha256_hex(content);
    outs.push_back({{"path", p}, {"sha256", digest}, {"bytes", content.size()}});
    digest_concat += digest;
  }
  j["outputs"] = outs;
  j["experiment_id"] = sha256_hex(subcommand + "|" + std::to_string(seed) + "|" + config.dump() +
                                  "|" + digest_concat)
                           .substr(0, 16);
  return j;
}

}  // namespace combust
