// combustlab: experiment driver for the combustion-growth laboratory.
//
// Subcommands: classify, simulate, tadbp, walks bounds, animals, report,
// rerun. Every run emits <out>.manifest.json with the config, seed and
// SHA-256 digests of its outputs; `rerun` replays a manifest into fresh
// paths and verifies the digests.
//
// Exit codes: 0 success, 1 internal error, 2 config/usage error,
// 3 cap-hit termination with the explosion heuristic triggered.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "combust/animals.hpp"
#include "combust/classifier.hpp"
#include "combust/combustion.hpp"
#include "combust/io.hpp"
#include "combust/parallel.hpp"
#include "combust/rng.hpp"
#include "combust/stats.hpp"
#include "combust/tadbp.hpp"
#include "combust/walks.hpp"

namespace {

using combust::json;

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

json parse_json_arg(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') return json::parse(combust::read_file(arg.substr(1)));
  return json::parse(arg);
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    out.push_back(std::stod(csv.substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const std::uint64_t v = std::stoull(s);
    return {v, v};
  }
  return {std::stoull(s.substr(0, dots)), std::stoull(s.substr(dots + 2))};
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  const auto dot = out.rfind('.');
  const std::string base = dot == std::string::npos ? out : out.substr(0, dot);
  return base + suffix;
}

void emit_manifest(const std::string& out, const std::string& subcommand,
                   const std::vector<std::string>& argv, const json& config,
                   std::uint64_t seed, const std::vector<std::string>& outputs,
                   double wall_ms, const json& counters = json::object()) {
  const json m = combust::make_manifest(subcommand, argv, config, seed, outputs, wall_ms,
                                        counters);
  combust::write_file(out + ".manifest.json", m.dump(2) + "\n");
}

// ------------------------------------------------------------- classify --

int run_classify(const std::string& dist_arg, int dim, const std::string& b_grid_arg,
                 std::uint64_t m_max, std::uint64_t n_max_iii, const std::string& out,
                 const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const json dist_json = parse_json_arg(dist_arg);
  const combust::CountDistribution mu = combust::dist_from_json(dist_json);
  std::vector<double> grid = combust::default_b_grid();
  if (!b_grid_arg.empty()) grid = parse_grid(b_grid_arg);
  combust::ClassifyBudgets budgets;
  budgets.m_max_i = budgets.m_max_ii = m_max;
  budgets.n_max_iii = n_max_iii;
  const combust::ClassificationReport rep = combust::classify(mu, dim, grid, budgets);
  combust::write_file(out, combust::report_to_json(rep).dump(2) + "\n");
  const std::string csv_path = sibling_path(out, ".csv");
  combust::write_file(csv_path, combust::report_to_csv(rep));
  json config = {{"dist", dist_json}, {"dim", dim}, {"b_grid", grid},
                 {"m_max", m_max}, {"n_max_iii", n_max_iii}};
  emit_manifest(out, "classify", argv, config, 0, {out, csv_path}, wall_ms_since(t0));
  std::cout << "verdict: " << combust::to_string(rep.verdict) << "\n";
  return 0;
}

// ------------------------------------------------------------- simulate --

combust::SimulationConfig sim_config_from_json(const json& j) {
  combust::SimulationConfig cfg;
  cfg.dim = j.value("dim", 1);
  cfg.mu = combust::dist_from_json(j.at("mu"));
  cfg.horizon = j.value("horizon", 1000.0);
  cfg.event_cap = j.value("event_cap", std::uint64_t(10000000));
  cfg.site_cap = j.value("site_cap", std::uint64_t(1000000));
  cfg.seed = j.value("seed", std::uint64_t(1));
  cfg.record_cadence = j.value("record_cadence", 1.0);
  cfg.bulk_threshold = j.value("bulk_threshold", std::uint64_t(64));
  const std::string mode = j.value("mode", std::string("full"));
  if (mode == "trimmed")
    cfg.mode = combust::SimMode::Trimmed;
  else if (mode != "full")
    throw std::invalid_argument("mode must be full or trimmed");
  if (j.contains("sources")) {
    for (const auto& src : j.at("sources")) {
      combust::Coord c;
      for (std::size_t i = 0; i < src.size() && i < combust::kMaxDim; ++i)
        c.c[i] = src[i].get<std::int64_t>();
      cfg.sources.push_back(c);
    }
  }
  return cfg;
}

int run_simulate(const std::string& config_path, const std::string& out,
                 const std::string& snapshot_dir, const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const json config = json::parse(combust::read_file(config_path));
  combust::SimulationConfig cfg = sim_config_from_json(config);
  cfg.dump_sites = !snapshot_dir.empty();
  const combust::Trajectory traj = combust::run(cfg);
  const combust::SpreadRateEstimate est = combust::spread_rate_estimate(traj);

  combust::write_file(out, combust::trajectory_to_csv(traj));
  const std::string summary_path = sibling_path(out, ".summary.json");
  combust::write_file(summary_path,
                      combust::trajectory_summary_json(traj, est).dump(2) + "\n");
  std::vector<std::string> outputs = {out, summary_path};
  if (!snapshot_dir.empty()) {
    if (cfg.dim < 2) throw std::invalid_argument("--snapshot-2d needs dim >= 2");
    std::filesystem::create_directories(snapshot_dir);
    combust::CsvWriter csv({"x", "y", "sigma"});
    for (const auto& [site, sigma] : traj.site_dump)
      csv.append_row({std::to_string(site.c[0]), std::to_string(site.c[1]),
                      combust::fmt_double(sigma)});
    const std::string frame = snapshot_dir + "/visited_final.csv";
    combust::write_file(frame, csv.str());
    outputs.push_back(frame);
  }
  emit_manifest(out, "simulate", argv, config, cfg.seed, outputs, wall_ms_since(t0),
                {{"events", traj.events}, {"visited", traj.visited}});
  std::cout << "termination: " << combust::to_string(traj.termination)
            << (traj.explosion_suspected ? " (ExplosionSuspected)" : "") << ", verdict: "
            << combust::to_string(est.verdict) << "\n";
  if (traj.termination != combust::Termination::Completed && traj.explosion_suspected) return 3;
  return 0;
}

// ---------------------------------------------------------------- tadbp --

int run_tadbp(const std::string& law_arg, const std::string& domain_arg, std::uint64_t n,
              std::uint64_t seed, const std::string& out,
              const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const json law_json = parse_json_arg(law_arg);
  const combust::CountDistribution mu =
      combust::dist_from_json(law_json, /*allow_trivial=*/true);
  const combust::TailLaw law = combust::TailLaw::from_distribution(mu);
  const combust::Domain domain =
      domain_arg == "z" ? combust::Domain::Z : combust::Domain::ZPlus;
  const std::uint64_t pad =
      domain == combust::Domain::Z ? combust::pad_for_law(law) : 0;
  combust::RngStream stream = combust::derive_stream(seed, combust::stream_tag::field);
  const combust::TadbpSample sample = combust::wet_dry(
      combust::sample_field(law, domain, 0, n, stream, pad));

  combust::CsvWriter csv({"site", "psi", "wet", "Y"});
  for (std::size_t i = 0; i < sample.wet.size(); ++i)
    csv.append_row({std::to_string(sample.field.window_lo + static_cast<std::int64_t>(i)),
                    std::to_string(sample.field.psi[sample.field.pad + i]),
                    std::to_string(static_cast<int>(sample.wet[i])),
                    std::to_string(sample.y_chain[i])});
  combust::write_file(out, csv.str());

  const combust::ExactFraction exact = combust::dry_fraction_exact(law, 200);
  const double empirical =
      static_cast<double>(sample.dry_count) / static_cast<double>(sample.wet.size());
  json summary = {{"dry_fraction_empirical", empirical},
                  {"dry_fraction_exact", exact.value},
                  {"dry_fraction_error_bound", exact.error_bound},
                  {"dry_fraction_certain_zero", exact.certain_zero},
                  {"chain_class", combust::to_string(combust::classify_chain(law))},
                  {"components", sample.components.size()},
                  {"edge_uncertain", sample.edge_uncertain}};
  const std::string summary_path = sibling_path(out, ".summary.json");
  combust::write_file(summary_path, summary.dump(2) + "\n");
  emit_manifest(out, "tadbp", argv, {{"law", law_json}, {"domain", domain_arg}, {"n", n}},
                seed, {out, summary_path}, wall_ms_since(t0));
  std::cout << "dry fraction: empirical " << empirical << ", exact " << exact.value << "\n";
  return 0;
}

// ---------------------------------------------------------------- walks --

int run_walks_bounds(double eps, const std::string& n_range, std::uint64_t trials,
                     std::uint64_t seed, const std::string& out,
                     const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto [n_lo, n_hi] = parse_range(n_range);
  if (n_lo < 1 || n_hi < n_lo) throw std::invalid_argument("bad --n range");
  const double a = 1.0 / eps;

  // one walk per trial decides the event for every n simultaneously
  const unsigned workers = combust::worker_count();
  std::vector<std::vector<std::uint64_t>> records(workers);
  combust::parallel_for(workers, [&](std::size_t w) {
    combust::RngStream stream =
        combust::derive_stream(seed, combust::stream_tag::trial, static_cast<std::int64_t>(w));
    const std::uint64_t lo = trials * w / workers, hi = trials * (w + 1) / workers;
    for (std::uint64_t i = lo; i < hi; ++i)
      records[w].push_back(combust::ell_A_sample(1, a, 1e-9, stream).value);
  });

  combust::CsvWriter csv({"n", "lower", "upper", "empirical", "stderr"});
  for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
    const combust::SpeedTailBounds b = combust::speed_tail_bounds(n, eps);
    std::uint64_t hits = 0;
    for (const auto& part : records)
      for (std::uint64_t r : part) hits += r >= n ? 1 : 0;
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    csv.append_row({std::to_string(n), combust::fmt_double(b.lower),
                    combust::fmt_double(b.upper), combust::fmt_double(p),
                    combust::fmt_double(combust::binomial_sigma(p, trials))});
  }
  combust::write_file(out, csv.str());
  emit_manifest(out, "walks", argv,
                {{"eps", eps}, {"n", n_range}, {"trials", trials}}, seed, {out},
                wall_ms_since(t0));
  return 0;
}

// --------------------------------------------------------------- animals --

int run_animals(const std::string& mu_arg, int dim, const std::string& a_grid_arg,
                const std::string& n_range, std::uint64_t trials, std::uint64_t seed,
                double tol, const std::string& out, const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const json mu_json = parse_json_arg(mu_arg);
  const combust::CountDistribution mu = combust::dist_from_json(mu_json);
  const std::vector<double> a_grid = parse_grid(a_grid_arg);
  const auto [n_lo, n_hi] = parse_range(n_range);
  std::vector<std::size_t> n_grid;
  for (std::uint64_t n = n_lo; n <= n_hi; ++n) n_grid.push_back(n);
  const combust::ScoreTable table =
      combust::normalized_score_table(mu, dim, a_grid, n_grid, trials, tol, seed);
  combust::CsvWriter csv({"A", "n", "trial", "score", "normalized"});
  for (const auto& r : table.rows)
    csv.append_row({combust::fmt_double(r.a), std::to_string(r.n), std::to_string(r.trial),
                    combust::fmt_double(r.score), combust::fmt_double(r.normalized)});
  combust::write_file(out, csv.str());
  emit_manifest(out, "animals", argv,
                {{"mu", mu_json}, {"dim", dim}, {"a_grid", a_grid}, {"n", n_range},
                 {"trials", trials}, {"tol", tol}},
                seed, {out}, wall_ms_since(t0));
  return 0;
}

// ---------------------------------------------------------------- report --

int run_report(const std::vector<std::string>& inputs, const std::string& out_prefix) {
  std::vector<combust::PlotSeries> series;
  std::string annotation;
  std::string md = "| trajectory | termination | verdict | slope | visited | end time |\n"
                   "|---|---|---|---|---|---|\n";
  for (const auto& path : inputs) {
    const std::string text = combust::read_file(path);
    combust::PlotSeries s;
    s.label = std::filesystem::path(path).filename().string();
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (header) {
        header = false;
        continue;
      }
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string f;
      std::vector<std::string> fields;
      while (std::getline(ls, f, ',')) fields.push_back(f);
      if (fields.size() < 3) continue;
      s.points.emplace_back(std::stod(fields[0]), std::stod(fields[2]));
    }
    if (s.points.empty()) {
      std::cerr << "report: no snapshots in " << path << "\n";
      return 2;
    }
    std::string term = "-", verdict = "-", slope = "-", visited = "-", end_time = "-";
    const std::string summary_path = sibling_path(path, ".summary.json");
    if (std::filesystem::exists(summary_path)) {
      const json sj = json::parse(combust::read_file(summary_path));
      term = sj.value("termination", "-");
      visited = std::to_string(sj.value("visited", std::uint64_t(0)));
      end_time = combust::fmt_double(sj.value("end_time", 0.0));
      if (sj.contains("spread_rate")) {
        verdict = sj["spread_rate"].value("verdict", "-");
        if (sj["spread_rate"].contains("loglog_slope")) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.2f", sj["spread_rate"]["loglog_slope"].get<double>());
          slope = buf;
          if (annotation.empty()) annotation = "slope " + std::string(buf);
        }
      }
    }
    md += "| " + s.label + " | " + term + " | " + verdict + " | " + slope + " | " + visited +
          " | " + end_time + " |\n";
    series.push_back(std::move(s));
  }
  combust::write_file(out_prefix + ".svg",
                      combust::svg_line_plot(series, "tip vs t", annotation));
  combust::write_file(out_prefix + ".md", md);
  return 0;
}

// ----------------------------------------------------------------- rerun --

int dispatch(std::vector<std::string> args);

int run_rerun(const std::string& manifest_path, const std::string& new_out) {
  const json m = json::parse(combust::read_file(manifest_path));
  std::vector<std::string> args = m.at("args").get<std::vector<std::string>>();
  std::string old_out;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--out") {
      old_out = args[i + 1];
      args[i + 1] = new_out;
    }
  }
  if (old_out.empty()) {
    std::cerr << "rerun: manifest args carry no --out\n";
    return 2;
  }
  const int rc = dispatch(args);
  if (rc != 0 && rc != 3) return rc;
  // compare digests of the replayed outputs against the manifest
  const std::string old_base = sibling_path(old_out, "");
  const std::string new_base = sibling_path(new_out, "");
  bool all_match = true;
  for (const auto& rec : m.at("outputs")) {
    std::string path = rec.at("path").get<std::string>();
    if (path == old_out)
      path = new_out;
    else if (path.rfind(old_base, 0) == 0)
      path = new_base + path.substr(old_base.size());
    const std::string digest = combust::sha256_hex(combust::read_file(path));
    const bool match = digest == rec.at("sha256").get<std::string>();
    std::cout << path << ": " << (match ? "match" : "MISMATCH") << "\n";
    all_match = all_match && match;
  }
  return all_match ? 0 : 1;
}

// ------------------------------------------------------------- dispatch --

int dispatch(std::vector<std::string> args) {
  CLI::App app{"combustlab: growth-process laboratory"};
  app.require_subcommand(1);

  std::string dist_arg, out, b_grid_arg, config_path, snapshot_dir, law_arg, domain_arg = "zplus";
  std::string n_range = "1..10", mu_arg, a_grid_arg = "2,4,8", manifest_path, rerun_out;
  std::vector<std::string> report_inputs;
  int dim = 1;
  double eps = 0.5, tol = 1e-6;
  double trials_arg = 1000000;  // double so 1e6-style spellings parse
  std::uint64_t m_max = 100000, n_max_iii = 10000, n_sites = 1000000, seed = 1;

  auto* classify = app.add_subcommand("classify", "series criteria over a B grid");
  classify->add_option("--dist", dist_arg, "distribution JSON (inline or @file)")->required();
  classify->add_option("--dim", dim, "lattice dimension")->required();
  classify->add_option("--b-grid", b_grid_arg, "comma-separated bases");
  classify->add_option("--m-max", m_max, "truncation for criteria (i)/(ii)");
  classify->add_option("--n-max-iii", n_max_iii, "truncation for criterion (iii)");
  classify->add_option("--out", out, "report JSON path")->required();

  auto* simulate = app.add_subcommand("simulate", "event-driven growth simulation");
  simulate->add_option("--config", config_path, "run config JSON")->required();
  simulate->add_option("--out", out, "trajectory CSV path")->required();
  simulate->add_option("--snapshot-2d", snapshot_dir, "directory for 2-d visited dumps");

  auto* tadbp = app.add_subcommand("tadbp", "coverage-process sampling and labeling");
  tadbp->add_option("--law", law_arg, "psi-law JSON (inline or @file)")->required();
  tadbp->add_option("--domain", domain_arg, "z or zplus");
  tadbp->add_option("--n", n_sites, "window size")->required();
  tadbp->add_option("--seed", seed, "root seed");
  tadbp->add_option("--out", out, "sample CSV path")->required();

  auto* walks = app.add_subcommand("walks", "walk bound experiments");
  auto* bounds = walks->add_subcommand("bounds", "speed bracket vs Monte Carlo");
  bounds->add_option("--eps", eps, "1/A in (0,1)")->required();
  bounds->add_option("--n", n_range, "record range lo..hi");
  bounds->add_option("--trials", trials_arg, "Monte Carlo trials");
  bounds->add_option("--seed", seed, "root seed");
  bounds->add_option("--out", out, "CSV path")->required();

  auto* animals = app.add_subcommand("animals", "normalized animal-score table");
  animals->add_option("--mu", mu_arg, "distribution JSON")->required();
  animals->add_option("--dim", dim, "lattice dimension")->required();
  animals->add_option("--a-grid", a_grid_arg, "comma-separated thresholds");
  animals->add_option("--n", n_range, "animal sizes lo..hi (n, sets of n+1 sites)");
  animals->add_option("--trials", trials_arg, "fields per threshold");
  animals->add_option("--seed", seed, "root seed");
  animals->add_option("--tol", tol, "weight-sampler residual budget");
  animals->add_option("--out", out, "CSV path")->required();

  auto* report = app.add_subcommand("report", "plots + markdown from results");
  report->add_option("inputs", report_inputs, "trajectory CSV files")->required();
  report->add_option("--out", out, "output prefix")->required();

  auto* rerun = app.add_subcommand("rerun", "replay a manifest and verify digests");
  rerun->add_option("--manifest", manifest_path, "manifest JSON")->required();
  rerun->add_option("--out", rerun_out, "fresh output path")->required();

  // manifests store the args verbatim (no binary name) so `rerun` can replay
  const std::vector<std::string> argv_copy = args;
  try {
    std::vector<const char*> argv;
    argv.push_back("combustlab");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  if (classify->parsed())
    return run_classify(dist_arg, dim, b_grid_arg, m_max, n_max_iii, out, argv_copy);
  if (simulate->parsed()) return run_simulate(config_path, out, snapshot_dir, argv_copy);
  if (tadbp->parsed()) return run_tadbp(law_arg, domain_arg, n_sites, seed, out, argv_copy);
  if (walks->parsed()) {
    if (!bounds->parsed()) {
      std::cerr << "walks: expected the 'bounds' subcommand\n";
      return 2;
    }
    return run_walks_bounds(eps, n_range, static_cast<std::uint64_t>(trials_arg), seed, out,
                            argv_copy);
  }
  if (animals->parsed())
    return run_animals(mu_arg, dim, a_grid_arg, n_range, static_cast<std::uint64_t>(trials_arg),
                       seed, tol, out, argv_copy);
  if (report->parsed()) return run_report(report_inputs, out);
  if (rerun->parsed()) return run_rerun(manifest_path, rerun_out);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(std::move(args));
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const combust::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
