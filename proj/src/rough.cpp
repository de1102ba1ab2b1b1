#include "hml/rough.hpp"

#include "hml/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hml/process_sim.hpp"

namespace hml {

RoughDriver lift_symmetric(const PathGrid& X, double gamma) {
  RoughDriver d;
  d.path = X;
  d.gamma = gamma;
  return d;
}

VectorField VectorField::linear(double a) {
  VectorField v;
  v.f_ = [a](double x) { return a * x; };
  v.df_ = [a](double) { return a; };
  v.d2f_ = [](double) { return 0.0; };
  v.name_ = "linear";
  return v;
}

VectorField VectorField::sine(double amplitude, double frequency) {
  VectorField v;
  v.f_ = [=](double x) { return amplitude * std::sin(frequency * x); };
  v.df_ = [=](double x) { return amplitude * frequency * std::cos(frequency * x); };
  v.d2f_ = [=](double x) { return -amplitude * frequency * frequency * std::sin(frequency * x); };
  v.name_ = "sine";
  return v;
}

// C^3 taper: 1 on [0,..], falls to 0 over [0,1] with s(u)=1-u^4(35-84u+70u^2-20u^3)
static double bump(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double u4 = u * u * u * u;
  return 1.0 - u4 * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u * u * u);
}
static double bump_d(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double u3 = u * u * u;
  return -u3 * (140.0 - 420.0 * u + 420.0 * u * u - 140.0 * u3);
}
static double bump_d2(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double u2 = u * u;
  return -u2 * (420.0 - 1680.0 * u + 2100.0 * u2 - 840.0 * u2 * u);
}

VectorField VectorField::compact_polynomial(std::vector<double> coeffs, double radius,
                                            double taper_width) {
  if (!(radius > 0.0) || !(taper_width > 0.0))
    throw std::invalid_argument("compact_polynomial: radius and taper width must be positive");
  auto poly = [coeffs](double x) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
  };
  auto dpoly = [coeffs](double x) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 1;)
      acc = acc * x + coeffs[i] * static_cast<double>(i);
    return acc;
  };
  auto d2poly = [coeffs](double x) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 2;)
      acc = acc * x + coeffs[i] * static_cast<double>(i) * static_cast<double>(i - 1);
    return acc;
  };
  const double r = radius, w = taper_width;
  VectorField v;
  v.f_ = [=](double x) { return poly(x) * bump((std::abs(x) - r) / w); };
  v.df_ = [=](double x) {
    const double u = (std::abs(x) - r) / w;
    const double sgn = x < 0.0 ? -1.0 : 1.0;
    return dpoly(x) * bump(u) + poly(x) * bump_d(u) * sgn / w;
  };
  v.d2f_ = [=](double x) {
    const double u = (std::abs(x) - r) / w;
    const double sgn = x < 0.0 ? -1.0 : 1.0;
    return d2poly(x) * bump(u) + 2.0 * dpoly(x) * bump_d(u) * sgn / w +
           poly(x) * bump_d2(u) / (w * w);
  };
  v.name_ = "compact_polynomial";
  return v;
}

static PathGrid euler_young(const VectorField& f, const PathGrid& X, double x0, std::size_t stride) {
  const std::size_t n = (X.values.size() - 1) / stride;
  std::vector<double> x(n + 1);
  x[0] = x0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dX = X.values[(i + 1) * stride] - X.values[i * stride];
    x[i + 1] = x[i] + f(x[i]) * dX;
  }
  return make_path(X.t0, X.dt * static_cast<double>(stride), std::move(x), "method=young_euler");
}

PathGrid solve_young(const VectorField& f, const PathGrid& X, double x0, const SolveOptions& opts) {
  if (X.values.size() < 3) throw std::invalid_argument("solve_young: driver too short");
  PathGrid fine = euler_young(f, X, x0, 1);
  PathGrid coarse = euler_young(f, X, x0, 2);
  const double err = step_halving_error(fine, coarse);
  if (opts.step_tolerance > 0.0 && err > opts.step_tolerance)
    throw std::runtime_error("solve_young: step-halving discrepancy " + std::to_string(err) +
                             " above tolerance; refine the driver grid");
  std::ostringstream meta;
  meta << "method=young_euler halving_error=" << err;
  fine.meta = meta.str();
  return fine;
}

static PathGrid davie(const VectorField& f, const RoughDriver& d, double x0, std::size_t stride) {
  const std::size_t n = (d.path.values.size() - 1) / stride;
  std::vector<double> x(n + 1);
  x[0] = x0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dX = d.increment(i * stride, (i + 1) * stride);
    const double lvl2 = d.second_level(i * stride, (i + 1) * stride);
    x[i + 1] = x[i] + f(x[i]) * dX + f.deriv(x[i]) * f(x[i]) * lvl2;
  }
  return make_path(d.path.t0, d.path.dt * static_cast<double>(stride), std::move(x),
                   "method=davie");
}

PathGrid solve_rough(const VectorField& f, const RoughDriver& driver, double x0,
                     const SolveOptions& opts) {
  if (driver.path.values.size() < 3) throw std::invalid_argument("solve_rough: driver too short");
  if (!(driver.gamma > 1.0 / 3.0 && driver.gamma <= 0.5))
    throw std::invalid_argument("solve_rough: gamma must lie in (1/3, 1/2]");
  PathGrid fine = davie(f, driver, x0, 1);
  PathGrid coarse = davie(f, driver, x0, 2);
  const double err = step_halving_error(fine, coarse);
  if (opts.step_tolerance > 0.0 && err > opts.step_tolerance)
    throw std::runtime_error("solve_rough: step-halving discrepancy " + std::to_string(err) +
                             " above tolerance; refine the driver grid");
  std::ostringstream meta;
  meta << "method=davie halving_error=" << err;
  fine.meta = meta.str();
  return fine;
}

double step_halving_error(const PathGrid& fine, const PathGrid& coarse) {
  double err = 0.0;
  for (std::size_t j = 0; j < coarse.values.size(); ++j) {
    const std::size_t i = 2 * j;
    if (i >= fine.values.size()) break;
    err = std::max(err, std::abs(fine.values[i] - coarse.values[j]));
  }
  return err;
}

PathGrid simulate_limit_sde(const VectorField& f, double c, const LimitSde& limit,
                            const SimConfig& cfg, double x0) {
  if (c == 0.0) {
    std::vector<double> x(static_cast<std::size_t>(cfg.n_steps) + 1, x0);
    return make_path(0.0, cfg.dt, std::move(x), "method=limit_sde degenerate_c");
  }
  if (limit.type == LimitSde::Type::YoungHermite) {
    PathGrid Z = simulate_hermite(limit.params, cfg);
    for (auto& v : Z.values) v *= c;
    PathGrid x = solve_young(f, Z, x0);
    x.meta += " limit=young_hermite";
    return x;
  }
  // Stratonovich Wiener: Brownian driver with the symmetric lift
  Rng rng(cfg.seed, cfg.stream);
  std::vector<double> w(static_cast<std::size_t>(cfg.n_steps) + 1, 0.0);
  const double sd = c * std::sqrt(cfg.dt);
  for (std::size_t i = 0; i + 1 < w.size(); ++i) w[i + 1] = w[i] + sd * rng.normal();
  PathGrid W = make_path(0.0, cfg.dt, std::move(w), "method=wiener");
  PathGrid x = solve_rough(f, lift_symmetric(W, 0.45), x0);
  x.meta += " limit=stratonovich_wiener";
  return x;
}

}  // namespace hml
