#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hml/contraction.hpp"
#include "hml/diagnostics.hpp"
#include "hml/experiment.hpp"
#include "hml/functional.hpp"
#include "hml/hurst.hpp"
#include "hml/parallel.hpp"
#include "hml/power_series.hpp"
#include "hml/process_sim.hpp"
#include "hml/rough.hpp"

namespace py = pybind11;
using namespace hml;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::dict path_to_dict(const PathGrid& p) {
  py::dict d;
  d["t0"] = p.t0;
  d["dt"] = p.dt;
  d["values"] = to_array(p.values);
  d["meta"] = p.meta;
  return d;
}

SimConfig make_cfg(long n_steps, double dt, double history, int refinement, std::uint64_t seed,
                   std::uint64_t stream) {
  SimConfig cfg;
  cfg.n_steps = n_steps;
  cfg.dt = dt;
  cfg.history_truncation = history;
  cfg.inner_grid_refinement = refinement;
  cfg.seed = seed;
  cfg.stream = stream;
  return cfg;
}

PathGrid path_from(py::array_t<double, py::array::c_style | py::array::forcecast> values,
                   double t0, double dt) {
  std::vector<double> v(values.data(), values.data() + values.size());
  return make_path(t0, dt, std::move(v));
}

}  // namespace

PYBIND11_MODULE(_hml, m) {
  m.doc() = "Hermite moving averages: chaos calculus, simulation, limit-theorem checks";

  py::class_<HurstParams>(m, "HurstParams")
      .def_readonly("H", &HurstParams::H)
      .def_readonly("m", &HurstParams::m)
      .def_readonly("H0", &HurstParams::H0)
      .def_readonly("K", &HurstParams::K)
      .def("__repr__", [](const HurstParams& p) {
        return "HurstParams(H=" + std::to_string(p.H) + ", m=" + std::to_string(p.m) + ")";
      });

  m.def("make_params", &make_params, py::arg("H"), py::arg("m"));
  m.def("h_star", &h_star, py::arg("params"), py::arg("d"));
  m.def(
      "classify_regime",
      [](const HurstParams& p, int d) {
        const auto rc = classify_regime(p, d);
        py::dict out;
        out["h_star"] = rc.h_star;
        out["regime"] = regime_name(rc.regime);
        out["scaling_exponent"] = rc.scaling_exponent;
        out["excluded_by_limit_theorem"] = rc.excluded_by_limit_theorem;
        return out;
      },
      py::arg("params"), py::arg("d"));
  m.def("scaling_alpha", &scaling_alpha, py::arg("params"), py::arg("w"), py::arg("eps"));

  m.def(
      "enumerate_contractions",
      [](int k, int mm) {
        py::list out;
        for (const auto& v : enumerate_contractions(k, mm)) {
          py::dict e;
          e["r"] = v.r;
          e["delta"] = v.delta;
          e["c1"] = c1_constant(v).get_str();
          out.append(e);
        }
        return out;
      },
      py::arg("k"), py::arg("m"));
  m.def(
      "chaos_projection_profile",
      [](int k, int mm) {
        py::dict out;
        for (const auto& [d, c] : chaos_projection_profile(k, mm))
          out[py::int_(d)] = py::int_(py::str(c.get_str()));
        return out;
      },
      py::arg("k"), py::arg("m"));
  m.def("log_c4_bound", &log_c4_bound, py::arg("k"), py::arg("k2"), py::arg("m"), py::arg("d"),
        py::arg("frak_L"));

  m.def(
      "hermite_rank",
      [](const std::vector<double>& coeffs, double sigma) {
        return hermite_rank(PowerSeries::from_coefficients(coeffs), sigma);
      },
      py::arg("coefficients"), py::arg("sigma") = 1.0);
  m.def(
      "truncation_order",
      [](const std::vector<double>& coeffs, double moment_bound, double tol, int mm,
         double frak_L) {
        TruncationEnv env;
        env.m = mm;
        env.frak_L = frak_L;
        return truncation_order(PowerSeries::from_coefficients(coeffs), moment_bound, tol, env);
      },
      py::arg("coefficients"), py::arg("moment_bound"), py::arg("tol"), py::arg("m") = 1,
      py::arg("frak_L") = 1.0);
  m.def("hermite_polynomial", &hermite_poly, py::arg("n"), py::arg("x"));

  m.def(
      "simulate_fbm",
      [](double H, long n_steps, double dt, std::uint64_t seed, std::uint64_t stream, double t0) {
        return path_to_dict(simulate_fbm(H, make_cfg(n_steps, dt, 50.0, 1, seed, stream), t0));
      },
      py::arg("H"), py::arg("n_steps"), py::arg("dt"), py::arg("seed"), py::arg("stream") = 0,
      py::arg("t0") = 0.0);
  m.def(
      "simulate_hermite",
      [](const HurstParams& p, long n_steps, double dt, std::uint64_t seed, std::uint64_t stream,
         const std::string& backend) {
        HermiteBackend b = HermiteBackend::Auto;
        if (backend == "quadrature") b = HermiteBackend::Quadrature;
        else if (backend == "rank_sum") b = HermiteBackend::RankSum;
        return path_to_dict(simulate_hermite(p, make_cfg(n_steps, dt, 50.0, 1, seed, stream), b));
      },
      py::arg("params"), py::arg("n_steps"), py::arg("dt"), py::arg("seed"),
      py::arg("stream") = 0, py::arg("backend") = "auto");
  m.def(
      "simulate_volterra",
      [](double lambda, const HurstParams& p, long n_steps, double dt, double history,
         std::uint64_t seed, std::uint64_t stream) {
        return path_to_dict(simulate_volterra(KernelSpec::exponential(lambda), p,
                                              make_cfg(n_steps, dt, history, 1, seed, stream)));
      },
      py::arg("kernel_lambda"), py::arg("params"), py::arg("n_steps"), py::arg("dt"),
      py::arg("history") = 50.0, py::arg("seed") = 1, py::arg("stream") = 0);
  m.def(
      "simulate_hou",
      [](double lambda, double sigma, const HurstParams& p, long n_steps, double dt,
         double history, std::uint64_t seed, std::uint64_t stream) {
        return path_to_dict(
            simulate_hou(lambda, sigma, p, make_cfg(n_steps, dt, history, 1, seed, stream)));
      },
      py::arg("lam"), py::arg("sigma"), py::arg("params"), py::arg("n_steps"), py::arg("dt"),
      py::arg("history") = 50.0, py::arg("seed") = 1, py::arg("stream") = 0);

  m.def(
      "evaluate_series",
      [](const std::vector<double>& coeffs, py::array_t<double> values, double t0, double dt,
         const std::string& centering, int mm, double sigma_y) {
        Centering c = Centering::None;
        if (centering == "mean") c = Centering::Mean;
        else if (centering == "projection") c = Centering::Projection;
        CenteringContext ctx;
        ctx.m = mm;
        ctx.sigma_y = sigma_y;
        return path_to_dict(evaluate_series(PowerSeries::from_coefficients(coeffs),
                                            path_from(values, t0, dt), c, ctx));
      },
      py::arg("coefficients"), py::arg("values"), py::arg("t0"), py::arg("dt"),
      py::arg("centering") = "none", py::arg("m") = 1, py::arg("sigma_y") = 1.0);
  m.def(
      "normalized_functional",
      [](py::array_t<double> values, double t0, double dt, double eps, const HurstParams& p,
         int w, const std::vector<double>& T_grid) {
        return to_array(
            normalized_functional(path_from(values, t0, dt), eps, classify_regime(p, w), T_grid));
      },
      py::arg("values"), py::arg("t0"), py::arg("dt"), py::arg("eps"), py::arg("params"),
      py::arg("w"), py::arg("T_grid"));
  m.def(
      "holder_seminorm",
      [](py::array_t<double> values, double t0, double dt, double gamma) {
        return holder_seminorm(path_from(values, t0, dt), gamma);
      },
      py::arg("values"), py::arg("t0"), py::arg("dt"), py::arg("gamma"));

  m.def(
      "solve_young",
      [](const std::string& field, double a, py::array_t<double> values, double t0, double dt,
         double x0) {
        const VectorField f =
            field == "sine" ? VectorField::sine(a) : VectorField::linear(a);
        return path_to_dict(solve_young(f, path_from(values, t0, dt), x0));
      },
      py::arg("field"), py::arg("a"), py::arg("values"), py::arg("t0"), py::arg("dt"),
      py::arg("x0"));
  m.def(
      "solve_rough",
      [](const std::string& field, double a, py::array_t<double> values, double t0, double dt,
         double x0, double gamma) {
        const VectorField f =
            field == "sine" ? VectorField::sine(a) : VectorField::linear(a);
        return path_to_dict(solve_rough(f, lift_symmetric(path_from(values, t0, dt), gamma), x0));
      },
      py::arg("field"), py::arg("a"), py::arg("values"), py::arg("t0"), py::arg("dt"),
      py::arg("x0"), py::arg("gamma") = 0.45);

  m.def(
      "weak_distance",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto wd = weak_distance(a, b);
        py::dict out;
        out["ks"] = wd.ks;
        out["ks_critical"] = wd.ks_critical;
        out["pass"] = wd.pass;
        out["moment_gaps"] = wd.moment_gaps;
        return out;
      },
      py::arg("a"), py::arg("b"));

  m.def("stationary_variance",
        [](double lambda, double H) { return stationary_variance(KernelSpec::exponential(lambda), H); },
        py::arg("kernel_lambda"), py::arg("H"));
  m.def("set_thread_budget", &set_thread_budget, py::arg("n"));
  m.def("run_experiment_json",
        [](const std::string& json_text, const std::string& out_dir) {
          RunOverrides ov;
          ov.out_dir = out_dir;
          return run_experiment(parse_config(json_text), ov);
        },
        py::arg("config_json"), py::arg("out_dir"));
  m.attr("__version__") = library_version();
}
