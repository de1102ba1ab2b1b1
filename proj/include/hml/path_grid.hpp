#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hml {

/// A sampled trajectory on a uniform time grid.
struct PathGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;
  std::string meta;  // generation descriptor: seed, method, truncation

  std::size_t size() const { return values.size(); }
  double time_at(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
  double t_end() const { return time_at(values.size() - 1); }
  /// Index of the grid point nearest to t; throws if t is off the grid by
  /// more than half a step.
  std::size_t index_of(double t) const;
};

PathGrid make_path(double t0, double dt, std::vector<double> values, std::string meta = "");

struct SimConfig {
  long n_steps = 0;            // number of increments; path has n_steps+1 values
  double dt = 0.0;
  double history_truncation = 50.0;  // L, lower integration limit replacing -inf
  int inner_grid_refinement = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;    // replica stream index
};

void write_csv(const PathGrid& p, const std::string& file);
PathGrid read_csv(const std::string& file);

/// Compact binary format: 16-byte prelude {magic "HMPG", version u32, n u64},
/// then t0 and dt as f64, then n little-endian f64 values.
void write_binary(const PathGrid& p, const std::string& file);
PathGrid read_binary(const std::string& file);

}  // namespace hml
