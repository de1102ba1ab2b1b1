#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hml/acceptance.hpp"
#include "hml/experiment.hpp"
#include "hml/parallel.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* c = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--seed", [&args](const CLI::results_t& r) {
    args.seed = std::stoull(r[0]);
    return true;
  }, "override the config seed (u64)");
  cmd->add_option("--threads", [&args](const CLI::results_t& r) {
    args.threads = std::stoi(r[0]);
    return true;
  }, "worker thread budget (flag wins over HML_THREADS)");
  cmd->add_option("--out", [&args](const CLI::results_t& r) {
    args.out = r[0];
    return true;
  }, "output directory");
}

int run_kind(const std::string& kind, const CommonArgs& args, const std::string& only = "") {
  hml::ExperimentConfig cfg = hml::parse_config_file(args.config_path);
  if (cfg.kind != kind)
    throw hml::ConfigError("config kind '" + cfg.kind + "' does not match subcommand '" + kind +
                           "'");
  hml::RunOverrides ov;
  ov.seed = args.seed;
  ov.threads = args.threads;
  ov.out_dir = args.out;
  if (!only.empty()) ov.only = only;
  return hml::run_experiment(cfg, ov);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hermite moving-average limit theorems: simulation and verification"};
  app.require_subcommand(1);

  CommonArgs decompose_args, simulate_args, functional_args, homogenize_args, verify_args;
  std::string report_dir;
  std::string verify_only;

  auto* decompose =
      app.add_subcommand("decompose", "chaos decomposition of (y^k): vectors and profile");
  add_common(decompose, decompose_args);

  auto* simulate = app.add_subcommand("simulate", "sample paths: fbm, hermite, volterra, hou");
  add_common(simulate, simulate_args);

  auto* functional =
      app.add_subcommand("functional", "normalized functionals: scaling, kappa, diagnostics");
  add_common(functional, functional_args);

  auto* homogenize =
      app.add_subcommand("homogenize", "slow/fast system vs the limiting SDE, KS verdict");
  add_common(homogenize, homogenize_args);

  auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
  add_common(verify, verify_args, /*config_required=*/false);
  verify->add_option("--only", verify_only, "run a single criterion by name");

  auto* report = app.add_subcommand("report", "consolidate a run directory into report.json");
  report->add_option("dir", report_dir, "run directory containing manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (decompose->parsed()) return run_kind("decompose", decompose_args);
    if (simulate->parsed()) return run_kind("simulate", simulate_args);
    if (functional->parsed()) return run_kind("functional", functional_args);
    if (homogenize->parsed()) return run_kind("homogenize", homogenize_args);
    if (verify->parsed()) {
      if (!verify_args.config_path.empty()) return run_kind("verify", verify_args, verify_only);
      // config-free verify: defaults at desk scale
      hml::AcceptanceOptions opts;
      if (verify_args.seed) opts.seed = *verify_args.seed;
      if (verify_args.threads) hml::set_thread_budget(*verify_args.threads);
      if (verify_args.out) opts.out_dir = *verify_args.out;
      opts.only = verify_only;
      auto results = hml::verify_suite(opts);
      for (const auto& r : results)
        if (!r.pass) return 1;
      return 0;
    }
    if (report->parsed()) return hml::emit_report(report_dir);
  } catch (const hml::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
