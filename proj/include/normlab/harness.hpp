#pragma once

// Experiment configuration, dispatch, and report emission. A config is a
// JSON document validated against schemas/config.schema.json; every run
// yields one JSON report plus CSV tables.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "normlab/concentration.hpp"
#include "normlab/config_schema.hpp"
#include "normlab/distortion.hpp"
#include "normlab/io.hpp"
#include "normlab/nets.hpp"
#include "normlab/parallel.hpp"
#include "normlab/scalar.hpp"
#include "normlab/symmetrize.hpp"

#ifndef NORMLAB_VERSION
#define NORMLAB_VERSION "0.0.0"
#endif

namespace normlab {

inline constexpr std::size_t kHarnessEnumCap = 22;

// Random streams used by the harness, all derived from the master seed with
// derive_trial_seed(master, stream). Trials use indices 0, 1, 2, ...; the
// auxiliary streams sit far above any trial index.
inline constexpr std::uint64_t kFamilyStream = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kVectorStream = (std::uint64_t{1} << 40) + 1;
inline constexpr std::uint64_t kNetStream = (std::uint64_t{1} << 40) + 2;
inline constexpr std::uint64_t kSignStream = (std::uint64_t{1} << 40) + 3;

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned threads = 1;
};

struct RunReport {
  json report;
  /// file name -> CSV text
  std::map<std::string, std::string> csv;
  /// file name -> extra JSON documents (e.g. a built net)
  std::map<std::string, json> documents;
};

inline json parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("malformed JSON: ") + e.what());
  }
  validate_against_schema(doc, json::parse(kConfigSchema));
  return doc;
}

inline json load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::config, "cannot open config \"" + file + "\"");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

namespace detail {

struct Context {
  json config;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t enum_cap = kHarnessEnumCap;
  std::size_t vertex_cap = kDefaultMaxDualVertexDim;
};

inline VectorFamily resolve_family(const Context& ctx) {
  const auto& c = ctx.config;
  const int given = int(c.contains("family")) + int(c.contains("family_file")) + int(c.contains("random_family"));
  if (given != 1) {
    config_error("config.family", "exactly one of family, family_file, random_family is required");
  }
  if (c.contains("family")) return family_from_json(c["family"], "config.family");
  if (c.contains("family_file")) {
    const auto file = c["family_file"].get<std::string>();
    return family_from_json(read_json_file(file, "config.family_file"), "family_file");
  }
  const auto& r = c["random_family"];
  auto space = norm_spec_from_json(r["space"], "config.random_family.space");
  Rng rng(derive_trial_seed(ctx.seed, kFamilyStream));
  return random_family(space, r["n"].get<std::size_t>(), rng);
}

inline std::vector<std::vector<double>> resolve_vectors(const Context& ctx, std::size_t n, std::size_t default_count) {
  const auto& c = ctx.config;
  if (c.contains("x")) {
    auto xs = read_matrix(c["x"], "config.x");
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (xs[k].size() != n) {
        config_error("config.x[" + std::to_string(k) + "]", "expected " + std::to_string(n) + " entries");
      }
    }
    return xs;
  }
  const std::size_t count = c.value("x_count", default_count);
  Rng rng(derive_trial_seed(ctx.seed, kVectorStream));
  std::vector<std::vector<double>> xs;
  for (std::size_t k = 0; k < count; ++k) xs.push_back(gaussian_vector(rng, n));
  return xs;
}

/// N from xi and/or N; both present must agree under N = round((1+xi)n).
inline std::size_t resolve_columns(const Context& ctx, std::size_t n) {
  const auto& c = ctx.config;
  const bool has_xi = c.contains("xi"), has_N = c.contains("N");
  if (!has_xi && !has_N) config_error("config.xi", "one of xi or N is required");
  if (has_xi) {
    const std::size_t from_xi = columns_for_xi(n, c["xi"].get<double>());
    if (has_N && c["N"].get<std::size_t>() != from_xi) {
      config_error("config.N", "N = " + std::to_string(c["N"].get<std::size_t>()) + " disagrees with xi (round((1+xi)n) = " +
                                   std::to_string(from_xi) + ")");
    }
    return from_xi;
  }
  return c["N"].get<std::size_t>();
}

inline std::vector<double> resolve_xi_list(const Context& ctx) {
  if (!ctx.config.contains("xi_list") || ctx.config["xi_list"].empty()) {
    config_error("config.xi_list", "a nonempty list is required");
  }
  return ctx.config["xi_list"].get<std::vector<double>>();
}

inline TrialOptions resolve_trial_options(const Context& ctx, const NormInstance& inst,
                                          std::optional<NetPoints>& net_storage) {
  const auto& c = ctx.config;
  TrialOptions opt;
  const json probes = c.value("probes", json::object());
  opt.probes.samples = probes.value("samples", std::size_t{2000});
  opt.probes.descent_steps = probes.value("descent_steps", std::size_t{50});
  const double theta = c.value("theta", 0.25);
  opt.sigma0 = c.value("sigma0", std::sqrt(2.0) * theta);
  opt.max_dual_vertex_dim = ctx.vertex_cap;
  if (probes.contains("net_file")) {
    net_storage = net_from_json(read_json_file(probes["net_file"].get<std::string>(), "config.probes.net_file"),
                                "net_file");
    for (const auto& p : net_storage->points) {
      if (p.size() != inst.n()) config_error("config.probes.net_file", "net points do not match n");
    }
  } else if (probes.contains("net_theta")) {
    net_storage = build_net(inst, probes["net_theta"].get<double>(), probes.value("net_budget", std::size_t{0}),
                            derive_trial_seed(ctx.seed, kNetStream));
  }
  if (net_storage) opt.probes.net = &*net_storage;
  return opt;
}

inline json quartiles_json(const Quartiles& q) {
  return {{"q1", json_number(q.q1)}, {"median", json_number(q.median)}, {"q3", json_number(q.q3)}};
}

inline RunReport run_exact_norm(const Context& ctx) {
  NormInstance inst(resolve_family(ctx), ctx.enum_cap);
  const auto xs = resolve_vectors(ctx, inst.n(), 10);
  RunReport out;
  CsvWriter csv({"index", "x", "exact"});
  json rows = json::array();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double v = exact_unconditional_norm(inst, xs[k], ctx.threads);
    csv.row({std::to_string(k), join_doubles(xs[k]), format_double(v)});
    rows.push_back({{"index", k}, {"x", xs[k]}, {"exact", v}});
  }
  out.report = {{"family", to_json(inst.family())}, {"norms", rows}};
  out.csv["exact_norm.csv"] = csv.str();
  return out;
}

inline RunReport run_empirical_norm(const Context& ctx) {
  auto family = resolve_family(ctx);
  NormInstance inst(family, ctx.enum_cap);
  const std::size_t n = family.n();
  const bool enumerate = ctx.config.value("enumerate", false);
  const std::uint64_t sign_seed = derive_trial_seed(ctx.seed, kSignStream);
  SignMatrix signs = enumerate ? SignMatrix::full_enumeration(n, ctx.enum_cap)
                               : sample_sign_matrix(n, resolve_columns(ctx, n), sign_seed, kDefaultSignBitCap,
                                                    SeedRecord{ctx.seed, kSignStream});
  EmpiricalNormInstance emp(family, std::move(signs));
  const auto xs = resolve_vectors(ctx, n, 10);
  const bool exact_available = n <= ctx.enum_cap;

  RunReport out;
  CsvWriter csv({"index", "x", "empirical", "exact", "relative_delta", "seed"});
  json rows = json::array();
  double max_delta = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = empirical_norm(emp, xs[k]);
    json row = {{"index", k}, {"x", xs[k]}, {"empirical", e}};
    std::string exact_s = "", delta_s = "";
    if (exact_available) {
      const double x = exact_unconditional_norm(inst, xs[k], ctx.threads);
      const double delta = x > 0.0 ? std::abs(e - x) / x : std::abs(e - x);
      max_delta = std::max(max_delta, delta);
      row["exact"] = x;
      row["relative_delta"] = delta;
      exact_s = format_double(x);
      delta_s = format_double(delta);
    }
    csv.row({std::to_string(k), join_doubles(xs[k]), format_double(e), exact_s, delta_s,
             enumerate ? "enumeration" : std::to_string(sign_seed)});
    rows.push_back(row);
  }
  out.report = {{"family", to_json(family)},
                {"n", n},
                {"N", emp.N()},
                {"xi", emp.xi()},
                {"signs", enumerate ? "full-enumeration" : "random"},
                {"sign_seed", sign_seed},
                {"norms", rows}};
  if (exact_available) out.report["max_relative_delta"] = max_delta;
  out.csv["empirical_norm.csv"] = csv.str();
  return out;
}

inline std::vector<std::string> distortion_csv_header() {
  return {"trial", "seed",        "n",       "N",       "xi",      "min",     "max",     "certified_upper",
          "covering", "probe_min", "min_method", "max_method", "argmin", "u_count", "v_count", "u_min", "v_min"};
}

inline std::vector<std::string> distortion_csv_row(std::size_t t, const DistortionReport& r) {
  return {std::to_string(t),
          std::to_string(r.trial_seed),
          std::to_string(r.n),
          std::to_string(r.N),
          format_double(r.xi),
          format_double(r.min.value),
          format_double(r.max.value),
          r.certified_upper ? format_double(r.certified_upper->value) : "",
          r.certified_upper ? to_string(r.certified_upper->covering_status) : "",
          format_double(r.probe_min),
          to_string(r.min.method),
          to_string(r.max.method),
          join_doubles(r.min.direction),
          std::to_string(r.uv.u_count),
          std::to_string(r.uv.v_count),
          format_double(r.uv.u_min),
          format_double(r.uv.v_min)};
}

inline RunReport run_distortion(const Context& ctx) {
  NormInstance inst(resolve_family(ctx), ctx.enum_cap);
  const std::size_t N = resolve_columns(ctx, inst.n());
  const double xi = static_cast<double>(N) / static_cast<double>(inst.n()) - 1.0;
  std::optional<NetPoints> net;
  auto opt = resolve_trial_options(ctx, inst, net);
  const std::size_t trials = ctx.config.value("trials", std::size_t{1});
  // columns_for_xi(n, xi) recovers N exactly for xi = N/n - 1
  const auto reports = run_trials(inst, xi, ctx.seed, trials, opt, ctx.threads);

  RunReport out;
  CsvWriter csv(distortion_csv_header());
  json rows = json::array();
  std::vector<double> mins, maxs;
  for (std::size_t t = 0; t < reports.size(); ++t) {
    csv.row(distortion_csv_row(t, reports[t]));
    rows.push_back(to_json(reports[t]));
    mins.push_back(reports[t].min.value);
    maxs.push_back(reports[t].max.value);
  }
  out.report = {{"family", to_json(inst.family())},
                {"n", inst.n()},
                {"N", N},
                {"xi", xi},
                {"sigma0", opt.sigma0},
                {"net_points", net ? net->points.size() : 0},
                {"min_quartiles", quartiles_json(quartiles(mins))},
                {"max_quartiles", quartiles_json(quartiles(maxs))},
                {"trials", rows}};
  if (ctx.config.contains("targets")) {
    const auto& tg = ctx.config["targets"];
    Targets targets;
    if (tg.value("calibrate", false)) {
      targets = calibrate_targets(reports);
    } else {
      if (!tg.contains("c") || !tg.contains("C")) config_error("config.targets", "need c and C, or calibrate: true");
      targets = {read_number(tg["c"], "config.targets.c"), read_number(tg["C"], "config.targets.C")};
    }
    const auto f = failure_frequency(reports, targets.c_target, targets.C_target);
    out.report["failure"] = {{"c_target", json_number(f.c_target)},
                             {"C_target", json_number(f.C_target)},
                             {"failures", f.failures},
                             {"trials", f.trials},
                             {"frequency", f.frequency}};
  }
  out.csv["distortion.csv"] = csv.str();
  return out;
}

inline RunReport run_xi_sweep(const Context& ctx) {
  NormInstance inst(resolve_family(ctx), ctx.enum_cap);
  const auto xi_list = resolve_xi_list(ctx);
  std::optional<NetPoints> net;
  auto opt = resolve_trial_options(ctx, inst, net);
  const std::size_t trials = ctx.config.value("trials", std::size_t{1});
  const auto profile = xi_sweep(inst, xi_list, trials, ctx.seed, opt, ctx.threads);

  RunReport out;
  CsvWriter per_trial({"xi", "N", "trial", "seed", "min", "max", "ratio"});
  CsvWriter summary({"xi", "N", "min_q1", "min_median", "min_q3", "max_q1", "max_median", "max_q3", "median_ratio"});
  json rows = json::array();
  for (const auto& row : profile.rows) {
    for (std::size_t t = 0; t < row.trials.size(); ++t) {
      const auto& r = row.trials[t];
      per_trial.row({format_double(row.xi), std::to_string(row.N), std::to_string(t), std::to_string(r.trial_seed),
                     format_double(r.min.value), format_double(r.max.value),
                     format_double(r.min.value > 0.0 ? r.max.value / r.min.value : INFINITY)});
    }
    summary.row({format_double(row.xi), std::to_string(row.N), format_double(row.min.q1),
                 format_double(row.min.median), format_double(row.min.q3), format_double(row.max.q1),
                 format_double(row.max.median), format_double(row.max.q3), format_double(row.median_ratio)});
    rows.push_back({{"xi", row.xi},
                    {"N", row.N},
                    {"min", quartiles_json(row.min)},
                    {"max", quartiles_json(row.max)},
                    {"median_ratio", json_number(row.median_ratio)}});
  }
  out.report = {{"family", to_json(inst.family())},
                {"n", inst.n()},
                {"trials", trials},
                {"rows", rows},
                {"small_xi_log_slope", json_number(profile.small_xi_log_slope)},
                {"reference_small_xi_exponent", 2.0},
                {"note", profile.note}};
  out.csv["xi_sweep.csv"] = per_trial.str();
  out.csv["xi_sweep_summary.csv"] = summary.str();
  return out;
}

inline RunReport run_scalar_sweep(const Context& ctx) {
  if (!ctx.config.contains("n")) config_error("config.n", "missing");
  const std::size_t n = ctx.config["n"].get<std::size_t>();
  const auto xi_list = resolve_xi_list(ctx);
  const std::size_t trials = ctx.config.value("trials", std::size_t{1});
  const json probes = ctx.config.value("probes", json::object());
  ScalarProbeOptions opt;
  opt.samples = probes.value("samples", opt.samples);
  opt.restarts = probes.value("restarts", opt.restarts);
  opt.descent_steps = probes.value("descent_steps", opt.descent_steps);
  const double tau = ctx.config.value("tau", 0.0);
  const auto sweep = rudelson_sweep(n, xi_list, trials, ctx.seed, opt, tau, ctx.threads);

  RunReport out;
  CsvWriter csv({"xi", "n", "N", "trial", "kappa_min", "kappa_max", "certificate", "seed"});
  CsvWriter summary({"xi", "N", "within_statement_range", "kappa_min_q1", "kappa_min_median", "kappa_min_q3",
                     "kappa_max_q1", "kappa_max_median", "kappa_max_q3", "frequency_below_tau"});
  json rows = json::array();
  for (const auto& row : sweep.rows) {
    for (std::size_t t = 0; t < row.trials.size(); ++t) {
      const auto& r = row.trials[t];
      csv.row({format_double(row.xi), std::to_string(n), std::to_string(row.N), std::to_string(t),
               format_double(r.kappa_min), format_double(r.kappa_max), format_double(r.kappa_max_certificate),
               std::to_string(r.seed)});
    }
    summary.row({format_double(row.xi), std::to_string(row.N), row.within_statement_range ? "true" : "false",
                 format_double(row.kappa_min.q1), format_double(row.kappa_min.median), format_double(row.kappa_min.q3),
                 format_double(row.kappa_max.q1), format_double(row.kappa_max.median), format_double(row.kappa_max.q3),
                 format_double(row.frequency_below_tau)});
    rows.push_back({{"xi", row.xi},
                    {"N", row.N},
                    {"within_statement_range", row.within_statement_range},
                    {"kappa_min", quartiles_json(row.kappa_min)},
                    {"kappa_max", quartiles_json(row.kappa_max)},
                    {"frequency_below_tau", row.frequency_below_tau}});
  }
  out.report = {{"n", n},
                {"trials", trials},
                {"tau", tau},
                {"rows", rows},
                {"small_xi_log_slope", json_number(sweep.small_xi_log_slope)},
                {"reference_small_xi_exponent", 2.0}};
  out.csv["scalar_sweep.csv"] = csv.str();
  out.csv["scalar_sweep_summary.csv"] = summary.str();
  return out;
}

inline RunReport run_concentration(const Context& ctx) {
  auto family = resolve_family(ctx);
  auto xs = resolve_vectors(ctx, family.n(), 1);
  if (xs.empty()) config_error("config.x", "concentration needs one coefficient vector");
  const auto& x = xs.front();
  const auto dist = exact_distribution(family, x, ctx.enum_cap, ctx.vertex_cap);
  const auto t_grid =
      ctx.config.contains("t_grid") ? ctx.config["t_grid"].get<std::vector<double>>() : default_t_grid(dist);
  const auto tail = tail_check(dist, t_grid);
  const auto gap = median_vs_mean(dist);

  RunReport out;
  CsvWriter atoms({"value", "probability"});
  for (const auto& a : dist.atoms) atoms.row({format_double(a.value), format_double(a.probability)});
  CsvWriter tail_csv({"t", "p"});
  for (const auto& p : tail.points) tail_csv.row({format_double(p.t), format_double(p.probability)});
  out.report = {{"family", to_json(family)},
                {"x", x},
                {"atoms", dist.atoms.size()},
                {"expectation", dist.expectation},
                {"median", dist.median},
                {"variance", dist.variance},
                {"sigma", dist.sigma},
                {"sigma_lower_bound_only", dist.sigma_lower_bound_only},
                {"tail_fit",
                 {{"a", json_number(tail.a)},
                  {"b", json_number(tail.b)},
                  {"fit_skipped", tail.fit_skipped},
                  {"non_increasing", tail.non_increasing}}},
                {"median_gap",
                 {{"gap", gap.gap}, {"stddev", gap.stddev}, {"ratio", gap.ratio}, {"within_stddev", gap.within_stddev}}}};
  if (ctx.config.contains("t")) {
    const auto N_list = ctx.config.contains("N_list") ? ctx.config["N_list"].get<std::vector<std::size_t>>()
                                                      : std::vector<std::size_t>{2, 4, 8, 16};
    const std::size_t trials = ctx.config.value("trials", std::size_t{10000});
    const auto amp = amplification_check(dist, N_list, ctx.config["t"].get<double>(), trials, ctx.seed);
    CsvWriter amp_csv({"N", "frequency", "hits", "trials", "stderr", "seed"});
    json rows = json::array();
    for (const auto& r : amp.rows) {
      amp_csv.row({std::to_string(r.N), format_double(r.frequency), std::to_string(r.hits), std::to_string(r.trials),
                   format_double(r.stderr_), std::to_string(derive_trial_seed(ctx.seed, r.N))});
      rows.push_back({{"N", r.N}, {"frequency", r.frequency}, {"hits", r.hits}, {"trials", r.trials}});
    }
    out.report["amplification"] = {{"t", amp.t},
                                   {"rows", rows},
                                   {"slope", json_number(amp.slope)},
                                   {"nonzero_rows", amp.nonzero_rows},
                                   {"slope_check", amp.slope_check}};
    out.csv["concentration_amplification.csv"] = amp_csv.str();
  }
  out.csv["concentration_atoms.csv"] = atoms.str();
  out.csv["concentration_tail.csv"] = tail_csv.str();
  return out;
}

inline RunReport run_net_build(const Context& ctx) {
  NormInstance inst(resolve_family(ctx), ctx.enum_cap);
  const double theta = ctx.config.value("theta", 0.5);
  const std::size_t budget = ctx.config.value("budget", std::size_t{0});
  const auto net = build_net(inst, theta, budget, derive_trial_seed(ctx.seed, kNetStream));
  RunReport out;
  CsvWriter csv({"index", "point"});
  for (std::size_t k = 0; k < net.points.size(); ++k) csv.row({std::to_string(k), join_doubles(net.points[k])});
  out.report = {{"family", to_json(inst.family())},
                {"theta", theta},
                {"points", net.points.size()},
                {"covering_status", to_string(net.covering_status)},
                {"packing_bound", std::pow(3.0 / theta, static_cast<double>(inst.n()))}};
  out.documents["net.json"] = to_json(net);
  out.csv["net_points.csv"] = csv.str();
  return out;
}

}  // namespace detail

/// Runs a validated config. The report echoes the config with the resolved
/// seed; only `wall_time_seconds` varies between identical runs.
inline RunReport run_experiment(const json& config, const RunOptions& options = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::Context ctx;
  ctx.config = config;
  if (!config.contains("experiment")) throw Error(ErrorKind::config, "config.experiment: missing");
  ctx.seed = options.seed.value_or(config.value("seed", std::uint64_t{0}));
  ctx.config["seed"] = ctx.seed;
  ctx.threads = std::max(1u, options.threads);
  if (config.contains("caps")) {
    ctx.enum_cap = config["caps"].value("max_enum_n", kHarnessEnumCap);
    ctx.vertex_cap = config["caps"].value("max_dual_vertices_m", kDefaultMaxDualVertexDim);
  }
  const auto experiment = config["experiment"].get<std::string>();
  RunReport out;
  if (experiment == "exact-norm") {
    out = detail::run_exact_norm(ctx);
  } else if (experiment == "empirical-norm") {
    out = detail::run_empirical_norm(ctx);
  } else if (experiment == "distortion") {
    out = detail::run_distortion(ctx);
  } else if (experiment == "xi-sweep") {
    out = detail::run_xi_sweep(ctx);
  } else if (experiment == "scalar-sweep") {
    out = detail::run_scalar_sweep(ctx);
  } else if (experiment == "concentration") {
    out = detail::run_concentration(ctx);
  } else if (experiment == "net-build") {
    out = detail::run_net_build(ctx);
  } else {
    throw Error(ErrorKind::config, "config.experiment: unknown experiment \"" + experiment + "\"");
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.report = {{"config", ctx.config},
                {"version", NORMLAB_VERSION},
                {"wall_time_seconds", seconds},
                {"results", out.report}};
  return out;
}

/// Writes <experiment>.json, the CSV tables, and extra documents into `dir`.
inline std::vector<std::string> write_outputs(const RunReport& run, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> written;
  const auto& config = run.report["config"];
  std::vector<std::string> formats{"json", "csv"};
  if (config.contains("output") && config["output"].contains("formats")) {
    formats = config["output"]["formats"].get<std::vector<std::string>>();
  }
  auto wants = [&](const std::string& f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };
  auto write = [&](const std::string& name, const std::string& text) {
    const auto path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::config, "output: cannot write \"" + path + "\"");
    out << text;
    written.push_back(path);
  };
  if (wants("json")) {
    write(config["experiment"].get<std::string>() + ".json", run.report.dump(2) + "\n");
    for (const auto& [name, doc] : run.documents) write(name, doc.dump(2) + "\n");
  }
  if (wants("csv")) {
    for (const auto& [name, text] : run.csv) write(name, text);
  }
  return written;
}

}  // namespace normlab
