#pragma once

#include <functional>
#include <string>

#include "hml/hurst.hpp"
#include "hml/path_grid.hpp"

namespace hml {

/// A path with its symmetric second-level lift X_{s,t} = (X_t - X_s)^2 / 2,
/// stored in increment-generating form so the Chen relation is exact algebra.
struct RoughDriver {
  PathGrid path;
  double gamma = 0.5;  // asserted Hoelder exponent

  double increment(std::size_t i, std::size_t j) const {
    return path.values[j] - path.values[i];
  }
  double second_level(std::size_t i, std::size_t j) const {
    const double d = increment(i, j);
    return 0.5 * d * d;
  }
};

RoughDriver lift_symmetric(const PathGrid& X, double gamma = 0.5);

/// Smooth 1-D vector fields with analytic first and second derivatives; the
/// compact polynomial is tapered to zero outside its radius by a C^3 bump so
/// the three-bounded-derivatives hypothesis holds on the whole line.
class VectorField {
 public:
  static VectorField linear(double a);
  static VectorField sine(double amplitude, double frequency = 1.0);
  static VectorField compact_polynomial(std::vector<double> coeffs, double radius,
                                        double taper_width = 1.0);

  double operator()(double x) const { return f_(x); }
  double deriv(double x) const { return df_(x); }
  double deriv2(double x) const { return d2f_(x); }
  const std::string& name() const { return name_; }

 private:
  std::function<double(double)> f_, df_, d2f_;
  std::string name_;
};

struct SolveOptions {
  double step_tolerance = 0.0;  // 0 disables the coarse-grid failure check
};

/// Euler scheme for the Young equation dx = f(x) dX on the driver grid;
/// meta records a step-halving (coarse-grid) error estimate.
PathGrid solve_young(const VectorField& f, const PathGrid& X, double x0,
                     const SolveOptions& opts = {});

/// Davie second-order scheme x' = x + f dX + f' f X2 over the symmetric lift.
PathGrid solve_rough(const VectorField& f, const RoughDriver& driver, double x0,
                     const SolveOptions& opts = {});

struct LimitSde {
  enum class Type { YoungHermite, StratonovichWiener };
  Type type = Type::StratonovichWiener;
  HurstParams params;  // for the Hermite driver: H = H*(w), m = w
};

/// Reference solution path of the limiting equation dx = c f(x) dZ (Young,
/// Hermite driver) or dx = c f(x) o dW (Stratonovich via the symmetric lift).
PathGrid simulate_limit_sde(const VectorField& f, double c, const LimitSde& limit,
                            const SimConfig& cfg, double x0);

/// Coarse/fine discrepancy of a solver on the same driver (order studies).
double step_halving_error(const PathGrid& fine, const PathGrid& coarse);

}  // namespace hml
