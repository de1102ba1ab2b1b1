#include "hml/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hml/acceptance.hpp"
#include "hml/contraction.hpp"
#include "hml/diagnostics.hpp"
#include "hml/parallel.hpp"
#include "hml/process_sim.hpp"
#include "hml/rough.hpp"

namespace hml {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string library_version() { return "0.1.0"; }

// ---------------------------------------------------------------- parsing

static void check_keys(const json& obj, const std::string& where,
                       const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
static T need(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": key '" + key + "' has the wrong type");
  }
}

template <typename T>
static T opt(const json& obj, const std::string& where, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": key '" + key + "' has the wrong type");
  }
}

static Centering parse_centering(const std::string& s, const std::string& where) {
  if (s == "none") return Centering::None;
  if (s == "mean") return Centering::Mean;
  if (s == "projection") return Centering::Projection;
  throw ConfigError(where + ": centering must be none|mean|projection, got '" + s + "'");
}

static const char* centering_name(Centering c) {
  switch (c) {
    case Centering::None: return "none";
    case Centering::Mean: return "mean";
    case Centering::Projection: return "projection";
  }
  return "none";
}

static KernelSpec parse_kernel(const json& k, const std::string& where) {
  check_keys(k, where, {"variant", "lambda", "lag_step", "values", "asserted_decay"});
  const auto variant = need<std::string>(k, where, "variant");
  if (variant == "exponential") {
    return KernelSpec::exponential(opt<double>(k, where, "lambda", 1.0));
  }
  if (variant == "tabulated") {
    return KernelSpec::tabulated(need<double>(k, where, "lag_step"),
                                 need<std::vector<double>>(k, where, "values"),
                                 opt<double>(k, where, "asserted_decay", 0.0));
  }
  throw ConfigError(where + ": kernel variant must be exponential|tabulated");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(root, "config",
             {"kind", "seed", "threads", "out_dir", "params", "kernel", "series", "eps_ladder",
              "replicas", "T_grid", "decompose", "simulate", "functional", "homogenize",
              "verify"});

  ExperimentConfig cfg;
  cfg.kind = need<std::string>(root, "config", "kind");
  static const std::set<std::string> kinds = {"decompose", "simulate", "functional", "homogenize",
                                              "verify"};
  if (!kinds.count(cfg.kind)) throw ConfigError("config: unknown kind '" + cfg.kind + "'");

  if (!root.contains("seed"))
    throw ConfigError("config: 'seed' is mandatory (reproducibility contract)");
  cfg.seed = need<std::uint64_t>(root, "config", "seed");
  cfg.seed_set = true;

  if (root.contains("threads")) cfg.threads = need<int>(root, "config", "threads");
  if (root.contains("out_dir")) cfg.out_dir = need<std::string>(root, "config", "out_dir");

  if (root.contains("params")) {
    const auto& p = root.at("params");
    check_keys(p, "params", {"H", "m"});
    cfg.H = need<double>(p, "params", "H");
    cfg.m = need<int>(p, "params", "m");
  }
  if (root.contains("kernel")) cfg.kernel = parse_kernel(root.at("kernel"), "kernel");

  if (root.contains("series")) {
    if (!root.at("series").is_array()) throw ConfigError("series: expected an array");
    for (const auto& s : root.at("series")) {
      const std::string where = "series[" + std::to_string(cfg.series.size()) + "]";
      check_keys(s, where, {"name", "coefficients", "declared_rank", "centering"});
      SeriesConfig sc;
      sc.name = opt<std::string>(s, where, "name", "G" + std::to_string(cfg.series.size()));
      sc.coefficients = need<std::vector<double>>(s, where, "coefficients");
      if (s.contains("declared_rank")) sc.declared_rank = need<int>(s, where, "declared_rank");
      sc.centering = parse_centering(opt<std::string>(s, where, "centering", "none"), where);
      cfg.series.push_back(std::move(sc));
    }
  }
  cfg.eps_ladder = opt<std::vector<double>>(root, "config", "eps_ladder", {});
  cfg.replicas = opt<int>(root, "config", "replicas", 256);
  cfg.T_grid = opt<std::vector<double>>(root, "config", "T_grid", cfg.T_grid);

  if (root.contains("decompose")) {
    check_keys(root.at("decompose"), "decompose", {"k"});
    cfg.decompose_k = need<int>(root.at("decompose"), "decompose", "k");
  }
  if (root.contains("simulate")) {
    const auto& s = root.at("simulate");
    check_keys(s, "simulate",
               {"process", "n_steps", "dt", "paths", "backend", "history", "refinement", "lambda",
                "sigma", "format"});
    auto& b = cfg.simulate;
    b.process = opt<std::string>(s, "simulate", "process", b.process);
    b.n_steps = opt<long>(s, "simulate", "n_steps", b.n_steps);
    b.dt = opt<double>(s, "simulate", "dt", b.dt);
    b.paths = opt<int>(s, "simulate", "paths", b.paths);
    b.backend = opt<std::string>(s, "simulate", "backend", b.backend);
    b.history = opt<double>(s, "simulate", "history", b.history);
    b.refinement = opt<int>(s, "simulate", "refinement", b.refinement);
    b.lambda = opt<double>(s, "simulate", "lambda", b.lambda);
    b.sigma = opt<double>(s, "simulate", "sigma", b.sigma);
    b.format = opt<std::string>(s, "simulate", "format", b.format);
  }
  if (root.contains("functional")) {
    const auto& f = root.at("functional");
    check_keys(f, "functional", {"estimate", "lag_cutoff", "burn_in", "dt_cap"});
    auto& b = cfg.functional;
    b.estimate = opt<std::vector<std::string>>(f, "functional", "estimate", {});
    b.lag_cutoff = opt<double>(f, "functional", "lag_cutoff", b.lag_cutoff);
    b.burn_in = opt<double>(f, "functional", "burn_in", b.burn_in);
    b.dt_cap = opt<double>(f, "functional", "dt_cap", b.dt_cap);
  }
  if (root.contains("homogenize")) {
    const auto& h = root.at("homogenize");
    check_keys(h, "homogenize",
               {"field", "x0", "eps", "solver_steps", "reference_replicas", "kappa_ladder",
                "lambda_cutoff"});
    auto& b = cfg.homogenize;
    if (h.contains("field")) {
      const auto& f = h.at("field");
      check_keys(f, "homogenize.field", {"type", "a", "frequency", "coefficients", "radius"});
      b.field.type = opt<std::string>(f, "field", "type", b.field.type);
      b.field.a = opt<double>(f, "field", "a", b.field.a);
      b.field.frequency = opt<double>(f, "field", "frequency", b.field.frequency);
      b.field.coefficients = opt<std::vector<double>>(f, "field", "coefficients", {});
      b.field.radius = opt<double>(f, "field", "radius", b.field.radius);
    }
    b.x0 = opt<double>(h, "homogenize", "x0", b.x0);
    b.eps = opt<double>(h, "homogenize", "eps", b.eps);
    b.solver_steps = opt<long>(h, "homogenize", "solver_steps", b.solver_steps);
    b.reference_replicas = opt<int>(h, "homogenize", "reference_replicas", b.reference_replicas);
    b.kappa_ladder = opt<std::vector<double>>(h, "homogenize", "kappa_ladder", {});
    b.lambda_cutoff = opt<double>(h, "homogenize", "lambda_cutoff", b.lambda_cutoff);
  }
  if (root.contains("verify")) {
    const auto& v = root.at("verify");
    check_keys(v, "verify", {"only", "scale"});
    cfg.verify.only = opt<std::string>(v, "verify", "only", "");
    cfg.verify.scale = opt<double>(v, "verify", "scale", 1.0);
  }

  // kind-level requirements
  auto require_params = [&] {
    if (!cfg.H || !cfg.m) throw ConfigError("config: kind '" + cfg.kind + "' requires params");
  };
  if (cfg.kind == "decompose") {
    require_params();
    if (cfg.decompose_k < 1) throw ConfigError("decompose: k >= 1 required");
  } else if (cfg.kind == "simulate") {
    require_params();
    if (cfg.simulate.process == "volterra" && !cfg.kernel)
      throw ConfigError("simulate: volterra process requires a kernel");
  } else if (cfg.kind == "functional") {
    require_params();
    if (!cfg.kernel) throw ConfigError("functional: kernel required");
    if (cfg.series.empty()) throw ConfigError("functional: at least one series required");
    if (cfg.eps_ladder.empty()) throw ConfigError("functional: eps_ladder must be non-empty");
  } else if (cfg.kind == "homogenize") {
    require_params();
    if (!cfg.kernel) throw ConfigError("homogenize: kernel required");
    if (cfg.series.size() != 1) throw ConfigError("homogenize: exactly one series required");
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

static json kernel_to_json(const KernelSpec& k) {
  json j;
  if (k.variant == KernelSpec::Variant::Exponential) {
    j["variant"] = "exponential";
    j["lambda"] = k.lambda;
  } else {
    j["variant"] = "tabulated";
    j["lag_step"] = k.lag_step;
    j["values"] = k.values;
    j["asserted_decay"] = k.asserted_decay;
  }
  return j;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = cfg.kind;
  j["seed"] = cfg.seed;
  if (cfg.threads) j["threads"] = *cfg.threads;
  if (cfg.out_dir) j["out_dir"] = *cfg.out_dir;
  if (cfg.H && cfg.m) j["params"] = {{"H", *cfg.H}, {"m", *cfg.m}};
  if (cfg.kernel) j["kernel"] = kernel_to_json(*cfg.kernel);
  if (!cfg.series.empty()) {
    json arr = json::array();
    for (const auto& s : cfg.series) {
      json e;
      e["name"] = s.name;
      e["coefficients"] = s.coefficients;
      if (s.declared_rank) e["declared_rank"] = *s.declared_rank;
      e["centering"] = centering_name(s.centering);
      arr.push_back(e);
    }
    j["series"] = arr;
  }
  if (!cfg.eps_ladder.empty()) j["eps_ladder"] = cfg.eps_ladder;
  j["replicas"] = cfg.replicas;
  j["T_grid"] = cfg.T_grid;
  if (cfg.kind == "decompose") j["decompose"] = {{"k", cfg.decompose_k}};
  if (cfg.kind == "simulate") {
    j["simulate"] = {{"process", cfg.simulate.process}, {"n_steps", cfg.simulate.n_steps},
                     {"dt", cfg.simulate.dt},           {"paths", cfg.simulate.paths},
                     {"backend", cfg.simulate.backend}, {"history", cfg.simulate.history},
                     {"refinement", cfg.simulate.refinement}, {"lambda", cfg.simulate.lambda},
                     {"sigma", cfg.simulate.sigma},     {"format", cfg.simulate.format}};
  }
  if (cfg.kind == "functional") {
    j["functional"] = {{"estimate", cfg.functional.estimate},
                       {"lag_cutoff", cfg.functional.lag_cutoff},
                       {"burn_in", cfg.functional.burn_in},
                       {"dt_cap", cfg.functional.dt_cap}};
  }
  if (cfg.kind == "homogenize") {
    json f;
    f["type"] = cfg.homogenize.field.type;
    f["a"] = cfg.homogenize.field.a;
    f["frequency"] = cfg.homogenize.field.frequency;
    if (!cfg.homogenize.field.coefficients.empty())
      f["coefficients"] = cfg.homogenize.field.coefficients;
    f["radius"] = cfg.homogenize.field.radius;
    j["homogenize"] = {{"field", f},
                       {"x0", cfg.homogenize.x0},
                       {"eps", cfg.homogenize.eps},
                       {"solver_steps", cfg.homogenize.solver_steps},
                       {"reference_replicas", cfg.homogenize.reference_replicas},
                       {"kappa_ladder", cfg.homogenize.kappa_ladder},
                       {"lambda_cutoff", cfg.homogenize.lambda_cutoff}};
  }
  if (cfg.kind == "verify")
    j["verify"] = {{"only", cfg.verify.only}, {"scale", cfg.verify.scale}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- outputs

void write_text_atomic(const std::string& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  const fs::path target = fs::path(dir) / name;
  const fs::path tmp = fs::path(dir) / (".tmp." + name);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_text_atomic: cannot open " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write_text_atomic: short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

static std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

static std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

static std::string functional_csv(const FunctionalSample& sample) {
  std::string out = "replica,T,value\n";
  for (std::size_t r = 0; r < sample.values.size(); ++r)
    for (std::size_t i = 0; i < sample.T_grid.size(); ++i)
      out += std::to_string(r) + "," + fmt_double(sample.T_grid[i]) + "," +
             fmt_double(sample.values[r][i]) + "\n";
  return out;
}

static std::string samples_csv(const std::vector<double>& v, const std::string& col) {
  std::string out = "replica," + col + "\n";
  for (std::size_t i = 0; i < v.size(); ++i) out += std::to_string(i) + "," + fmt_double(v[i]) + "\n";
  return out;
}

// ---------------------------------------------------------------- pieces

static PowerSeries to_series(const SeriesConfig& sc) {
  return PowerSeries::from_coefficients(sc.coefficients, sc.declared_rank);
}

static VectorField to_field(const FieldConfig& f) {
  if (f.type == "linear") return VectorField::linear(f.a);
  if (f.type == "sine") return VectorField::sine(f.a, f.frequency);
  if (f.type == "compact_polynomial")
    return VectorField::compact_polynomial(f.coefficients, f.radius);
  throw ConfigError("field: unknown type '" + f.type + "'");
}

static int rank_of(const PowerSeries& s, const HurstParams& p, const KernelSpec& k) {
  if (s.declared_rank) return *s.declared_rank;
  if (p.m == 1) return hermite_rank(s, std::sqrt(stationary_variance(k, p.H)));
  return chaos_rank(s, p, k, 1e-3).rank;
}

// ---------------------------------------------------------------- kinds

static json run_decompose(const ExperimentConfig& cfg, const std::string& dir,
                          std::vector<std::string>& outputs) {
  const int k = cfg.decompose_k, m = *cfg.m;
  json j;
  j["k"] = k;
  j["m"] = m;
  json vecs = json::array();
  for (const auto& v : enumerate_contractions(k, m)) {
    json e;
    e["r"] = v.r;
    e["delta"] = v.delta;
    e["c1"] = c1_constant(v).get_str();
    vecs.push_back(e);
  }
  j["vectors"] = vecs;
  json prof;
  for (const auto& [d, coeff] : chaos_projection_profile(k, m))
    prof[std::to_string(d)] = coeff.get_str();
  j["profile"] = prof;
  write_text_atomic(dir, "decompose.json", j.dump(2) + "\n");
  outputs.push_back("decompose.json");
  return json{{"k", k}, {"m", m}, {"vectors", vecs.size()}};
}

static json run_simulate(const ExperimentConfig& cfg, const std::string& dir,
                         std::vector<std::string>& outputs) {
  const auto& b = cfg.simulate;
  HurstParams p = make_params(*cfg.H, *cfg.m);
  HermiteBackend backend = HermiteBackend::Auto;
  if (b.backend == "quadrature") backend = HermiteBackend::Quadrature;
  else if (b.backend == "rank_sum") backend = HermiteBackend::RankSum;
  else if (b.backend != "auto") throw ConfigError("simulate: unknown backend '" + b.backend + "'");

  std::vector<PathGrid> paths(static_cast<std::size_t>(b.paths));
  parallel_for(paths.size(), [&](std::size_t r) {
    SimConfig sc;
    sc.n_steps = b.n_steps;
    sc.dt = b.dt;
    sc.history_truncation = b.history;
    sc.inner_grid_refinement = b.refinement;
    sc.seed = cfg.seed;
    sc.stream = r;
    if (b.process == "fbm") {
      paths[r] = simulate_fbm(p.H, sc);
    } else if (b.process == "hermite") {
      paths[r] = simulate_hermite(p, sc, backend);
    } else if (b.process == "volterra") {
      paths[r] = simulate_volterra(*cfg.kernel, p, sc);
    } else if (b.process == "hou") {
      paths[r] = simulate_hou(b.lambda, b.sigma, p, sc);
    } else {
      throw ConfigError("simulate: unknown process '" + b.process + "'");
    }
  });
  for (std::size_t r = 0; r < paths.size(); ++r) {
    char name[64];
    if (b.format == "csv" || b.format == "both") {
      std::snprintf(name, sizeof(name), "path_%04zu.csv", r);
      // build CSV in memory for the atomic-write contract
      std::string csv = "t,value\n";
      for (std::size_t i = 0; i < paths[r].values.size(); ++i)
        csv += fmt_double(paths[r].time_at(i)) + "," + fmt_double(paths[r].values[i]) + "\n";
      write_text_atomic(dir, name, csv);
      outputs.push_back(name);
    }
    if (b.format == "binary" || b.format == "both") {
      std::snprintf(name, sizeof(name), "path_%04zu.bin", r);
      const fs::path tmp = fs::path(dir) / (".tmp." + std::string(name));
      write_binary(paths[r], tmp.string());
      fs::rename(tmp, fs::path(dir) / name);
      outputs.push_back(name);
    }
  }
  json j;
  j["process"] = b.process;
  j["paths"] = b.paths;
  j["meta"] = paths.empty() ? "" : paths[0].meta;
  write_text_atomic(dir, "simulate_summary.json", j.dump(2) + "\n");
  outputs.push_back("simulate_summary.json");
  return j;
}

static json run_functional(const ExperimentConfig& cfg, const std::string& dir,
                           std::vector<std::string>& outputs) {
  HurstParams p = make_params(*cfg.H, *cfg.m);
  FunctionalDriver drv;
  drv.params = p;
  drv.kernel = *cfg.kernel;
  drv.burn_in = cfg.functional.burn_in;
  drv.dt_cap = cfg.functional.dt_cap;

  auto validation = validate_kernel(drv.kernel, p, {5.0, 10.0, 20.0, 35.0, 50.0});
  if (!validation.passed)
    throw ConfigError("functional: kernel fails the decay certificate: " + validation.message);

  std::vector<PowerSeries> series;
  std::vector<int> ranks;
  for (const auto& sc : cfg.series) {
    series.push_back(to_series(sc));
    ranks.push_back(rank_of(series.back(), p, drv.kernel));
  }

  json summary;
  summary["kernel_validation"] = {{"passed", validation.passed},
                                  {"c_fit", validation.c_fit},
                                  {"ratio_spread", validation.ratio_spread}};
  json ser = json::array();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto rc = classify_regime(p, ranks[i]);
    ser.push_back({{"name", cfg.series[i].name},
                   {"rank", ranks[i]},
                   {"regime", regime_name(rc.regime)},
                   {"scaling_exponent", rc.scaling_exponent}});
  }
  summary["series"] = ser;

  double eps_min = cfg.eps_ladder.front();
  for (double e : cfg.eps_ladder) eps_min = std::min(eps_min, e);

  bool any_fail = false;
  for (const auto& what : cfg.functional.estimate) {
    if (what == "scaling") {
      json block = json::array();
      for (std::size_t i = 0; i < series.size(); ++i) {
        auto fit = scaling_exponent(series[i], drv, cfg.eps_ladder, cfg.replicas,
                                    cfg.seed + 101 * i, ranks[i]);
        json pts = json::array();
        for (const auto& pt : fit.points)
          pts.push_back({{"eps", pt.eps},
                         {"log_inv_eps", pt.log_inv_eps},
                         {"log_variance", pt.log_variance},
                         {"se", pt.se_log_variance}});
        block.push_back({{"series", cfg.series[i].name},
                         {"slope", fit.slope},
                         {"stderr", fit.stderr_slope},
                         {"predicted", fit.predicted},
                         {"boundary_log_corrected", fit.boundary},
                         {"points", pts}});
        // plot-ready CSV: eps ladder vs log variance
        std::string csv = "eps,log_inv_eps,log_variance,se\n";
        for (const auto& pt : fit.points)
          csv += fmt_double(pt.eps) + "," + fmt_double(pt.log_inv_eps) + "," +
                 fmt_double(pt.log_variance) + "," + fmt_double(pt.se_log_variance) + "\n";
        const std::string name = "scaling_" + cfg.series[i].name + ".csv";
        write_text_atomic(dir, name, csv);
        outputs.push_back(name);
      }
      summary["scaling"] = block;
    } else if (what == "kappa") {
      json block = json::array();
      for (std::size_t i = 0; i < series.size(); ++i) {
        if (classify_regime(p, ranks[i]).regime != Regime::LongRange) continue;
        auto est = kappa_estimate(series[i], drv, cfg.eps_ladder, cfg.replicas,
                                  cfg.seed + 211 * i, ranks[i]);
        block.push_back({{"series", cfg.series[i].name},
                         {"kappa", est.kappa},
                         {"stderr", est.stderr_kappa},
                         {"per_eps", est.per_eps}});
      }
      summary["kappa"] = block;
    } else if (what == "limit_covariance") {
      const std::size_t j = series.size() > 1 ? 1 : 0;
      auto est = limit_covariance_srd(series[0], series[j], drv, cfg.functional.lag_cutoff,
                                      cfg.replicas, cfg.seed + 307, ranks[0], ranks[j]);
      summary["limit_covariance"] = {{"lambda", est.lambda},
                                     {"stderr", est.stderr_lambda},
                                     {"tail_bound", est.tail_bound}};
      std::string csv = "lag,covariance,se\n";
      for (std::size_t l = 0; l < est.lag_grid.size(); ++l)
        csv += fmt_double(est.lag_grid[l]) + "," + fmt_double(est.covariances[l]) + "," +
               fmt_double(est.covariance_se[l]) + "\n";
      write_text_atomic(dir, "limit_covariance.csv", csv);
      outputs.push_back("limit_covariance.csv");
    } else if (what == "gaussianity") {
      auto sample = sample_functional(series[0], drv, eps_min, cfg.T_grid, cfg.replicas,
                                      cfg.seed + 401, cfg.series[0].centering,
                                      cfg.series[0].name);
      auto rep = gaussianity_report(sample, cfg.seed + 402);
      summary["gaussianity"] = {{"series", cfg.series[0].name},
                                {"eps", eps_min},
                                {"excess_kurtosis", rep.excess_kurtosis},
                                {"se_kurtosis", rep.se_kurtosis},
                                {"skewness", rep.skewness},
                                {"se_skewness", rep.se_skewness},
                                {"ks_statistic", rep.ks_statistic},
                                {"ks_critical", rep.ks_critical},
                                {"holder_quantiles", rep.holder_quantiles},
                                {"label", rep.label}};
      write_text_atomic(dir, "functional_samples.csv", functional_csv(sample));
      outputs.push_back("functional_samples.csv");
      // plot-ready histogram bins of the terminal marginal
      auto term = sample.terminal();
      std::sort(term.begin(), term.end());
      const double lo = term.front(), hi = term.back();
      const int n_bins = 40;
      const double width = (hi - lo) / n_bins > 0 ? (hi - lo) / n_bins : 1.0;
      std::vector<int> counts(n_bins, 0);
      for (double v : term) {
        int b = static_cast<int>((v - lo) / width);
        counts[std::min(b, n_bins - 1)] += 1;
      }
      std::string hist = "bin_left,bin_right,count\n";
      for (int b = 0; b < n_bins; ++b)
        hist += fmt_double(lo + b * width) + "," + fmt_double(lo + (b + 1) * width) + "," +
                std::to_string(counts[b]) + "\n";
      write_text_atomic(dir, "terminal_histogram.csv", hist);
      outputs.push_back("terminal_histogram.csv");
    } else if (what == "independence") {
      if (series.size() < 2)
        throw ConfigError("functional: independence estimate needs two series");
      auto [a, bsample] = sample_functional_pair(series[0], series[1], drv, eps_min, cfg.T_grid,
                                                 cfg.replicas, cfg.seed + 501,
                                                 cfg.series[0].centering);
      auto rep = cross_independence(a, bsample);
      summary["independence"] = {{"eps", eps_min},
                                 {"correlation", rep.cross_covariance},
                                 {"se_correlation", rep.se_cross},
                                 {"correlation_of_squares", rep.independence_statistic},
                                 {"se_squares", rep.se_independence},
                                 {"independent_at_3se", rep.independent_at_3se}};
      if (!rep.independent_at_3se) any_fail = true;
      write_text_atomic(dir, "functional_samples_A.csv", functional_csv(a));
      write_text_atomic(dir, "functional_samples_B.csv", functional_csv(bsample));
      outputs.push_back("functional_samples_A.csv");
      outputs.push_back("functional_samples_B.csv");
    } else {
      throw ConfigError("functional: unknown estimate '" + what + "'");
    }
  }
  summary["pass"] = !any_fail;
  write_text_atomic(dir, "functional_summary.json", summary.dump(2) + "\n");
  outputs.push_back("functional_summary.json");
  return summary;
}

static json run_homogenize(const ExperimentConfig& cfg, const std::string& dir,
                           std::vector<std::string>& outputs) {
  const auto& hb = cfg.homogenize;
  HurstParams p = make_params(*cfg.H, *cfg.m);
  FunctionalDriver drv;
  drv.params = p;
  drv.kernel = *cfg.kernel;
  PowerSeries series = to_series(cfg.series[0]);
  const int w = rank_of(series, p, drv.kernel);
  const auto rc = classify_regime(p, w);
  if (rc.regime == Regime::Boundary)
    throw ConfigError("homogenize: boundary regime H*(w) = 1/2 rejected");
  const VectorField f = to_field(hb.field);

  // amplitude of the limit equation always comes from the estimators
  double c = 0.0;
  json c_block;
  if (rc.regime == Regime::LongRange) {
    std::vector<double> ladder = hb.kappa_ladder;
    if (ladder.empty()) ladder = {10.0 * hb.eps, 3.0 * hb.eps, hb.eps};
    auto est = kappa_estimate(series, drv, ladder, std::max(cfg.replicas / 4, 128),
                              cfg.seed + 11, w);
    c = est.kappa;
    c_block = {{"source", "kappa"}, {"c", c}, {"stderr", est.stderr_kappa}};
  } else {
    auto est = limit_covariance_srd(series, series, drv, hb.lambda_cutoff,
                                    std::max(cfg.replicas / 8, 48), cfg.seed + 11, w, w);
    c = std::sqrt(est.lambda);
    c_block = {{"source", "sqrt_lambda"}, {"c", c}, {"stderr", est.stderr_lambda}};
  }

  // slow variable at eps: driver X^eps on the solver grid, then Young/Davie
  std::vector<double> T_grid(static_cast<std::size_t>(hb.solver_steps) + 1);
  for (std::size_t j = 0; j < T_grid.size(); ++j)
    T_grid[j] = static_cast<double>(j) / static_cast<double>(hb.solver_steps);
  std::vector<double> terminal(static_cast<std::size_t>(cfg.replicas));
  CenteringContext ctx;
  ctx.m = p.m;
  ctx.sigma_y = std::sqrt(stationary_variance(drv.kernel, p.H));
  parallel_for(terminal.size(), [&](std::size_t r) {
    PathGrid y = driver_path(drv, hb.eps, 1.0, cfg.seed, 1000000 + r);
    PathGrid G = evaluate_series(series, y, cfg.series[0].centering, ctx);
    auto xvals = normalized_functional(G, hb.eps, rc, T_grid);
    PathGrid X = make_path(0.0, 1.0 / static_cast<double>(hb.solver_steps), std::move(xvals));
    PathGrid x = rc.regime == Regime::LongRange
                     ? solve_young(f, X, hb.x0)
                     : solve_rough(f, lift_symmetric(X, 0.45), hb.x0);
    terminal[r] = x.values.back();
  });

  // reference: solve the limiting SDE with the estimated amplitude
  std::vector<double> reference(static_cast<std::size_t>(hb.reference_replicas));
  LimitSde limit;
  if (rc.regime == Regime::LongRange) {
    limit.type = LimitSde::Type::YoungHermite;
    limit.params = make_params(rc.h_star, w);
  } else {
    limit.type = LimitSde::Type::StratonovichWiener;
  }
  parallel_for(reference.size(), [&](std::size_t r) {
    SimConfig sc;
    sc.dt = 1.0 / static_cast<double>(hb.solver_steps);
    sc.n_steps = hb.solver_steps;
    sc.seed = cfg.seed + 77;
    sc.stream = r;
    reference[r] = simulate_limit_sde(f, c, limit, sc, hb.x0).values.back();
  });

  auto wd = weak_distance(terminal, reference);
  json verdict = {{"ks", wd.ks},
                  {"threshold", wd.ks_critical},
                  {"pass", wd.pass},
                  {"moment_gaps", wd.moment_gaps},
                  {"moment_ses", wd.moment_ses},
                  {"regime", regime_name(rc.regime)},
                  {"rank", w},
                  {"amplitude", c_block}};
  write_text_atomic(dir, "x_eps_terminal.csv", samples_csv(terminal, "x_terminal"));
  write_text_atomic(dir, "reference_terminal.csv", samples_csv(reference, "x_terminal"));
  write_text_atomic(dir, "verdict.json", verdict.dump(2) + "\n");
  outputs.push_back("x_eps_terminal.csv");
  outputs.push_back("reference_terminal.csv");
  outputs.push_back("verdict.json");
  return verdict;
}

// ---------------------------------------------------------------- driver

int run_experiment(const ExperimentConfig& cfg, const RunOverrides& overrides) {
  ExperimentConfig effective = cfg;
  if (overrides.seed) effective.seed = *overrides.seed;
  if (overrides.threads) effective.threads = *overrides.threads;
  if (overrides.out_dir) effective.out_dir = *overrides.out_dir;
  if (overrides.only) effective.verify.only = *overrides.only;

  if (effective.threads) set_thread_budget(*effective.threads);
  const std::string dir = effective.out_dir.value_or("hml_run");
  fs::create_directories(dir);

  const auto t_start = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;
  json result;
  int code = 0;

  if (effective.kind == "decompose") {
    result = run_decompose(effective, dir, outputs);
  } else if (effective.kind == "simulate") {
    result = run_simulate(effective, dir, outputs);
  } else if (effective.kind == "functional") {
    result = run_functional(effective, dir, outputs);
    if (result.contains("pass") && !result["pass"].get<bool>()) code = 1;
  } else if (effective.kind == "homogenize") {
    result = run_homogenize(effective, dir, outputs);
    if (!result["pass"].get<bool>()) code = 1;
  } else if (effective.kind == "verify") {
    AcceptanceOptions opts;
    opts.seed = effective.seed;
    opts.only = effective.verify.only;
    opts.scale = effective.verify.scale;
    opts.out_dir = dir;
    auto results = verify_suite(opts);
    json arr = json::array();
    bool all = true;
    for (const auto& r : results) {
      arr.push_back(
          {{"name", r.name}, {"pass", r.pass}, {"details", r.details}, {"seconds", r.seconds}});
      all = all && r.pass;
    }
    result = {{"criteria", arr}, {"pass", all}};
    write_text_atomic(dir, "verify_summary.json", result.dump(2) + "\n");
    outputs.push_back("verify_summary.json");
    code = all ? 0 : 1;
  } else {
    throw ConfigError("run_experiment: unknown kind '" + effective.kind + "'");
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  const std::string canonical = serialize_config(effective);
  json manifest;
  manifest["kind"] = effective.kind;
  manifest["seed"] = effective.seed;
  manifest["version"] = library_version();
  manifest["config_hash"] = fnv1a(canonical);
  manifest["wall_time_s"] = wall;
  manifest["outputs"] = outputs;
  manifest["config"] = json::parse(canonical);
  write_text_atomic(dir, "manifest.json", manifest.dump(2) + "\n");
  return code;
}

int emit_report(const std::string& run_dir) {
  const fs::path mpath = fs::path(run_dir) / "manifest.json";
  if (!fs::exists(mpath)) throw ConfigError("report: no manifest.json in '" + run_dir + "'");
  std::ifstream in(mpath);
  json manifest = json::parse(std::string(std::istreambuf_iterator<char>(in), {}));

  // plain (key-sorted) json for a diffable consolidated report
  nlohmann::json report;
  report["manifest"] = nlohmann::json::parse(manifest.dump());
  for (const auto& name : manifest.at("outputs")) {
    const std::string fname = name.get<std::string>();
    if (fname.size() < 5 || fname.substr(fname.size() - 5) != ".json") continue;
    std::ifstream f(fs::path(run_dir) / fname);
    if (!f) continue;
    report[fname] = nlohmann::json::parse(std::string(std::istreambuf_iterator<char>(f), {}));
  }
  write_text_atomic(run_dir, "report.json", report.dump(2) + "\n");
  return 0;
}

}  // namespace hml
