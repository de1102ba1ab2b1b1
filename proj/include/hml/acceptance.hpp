#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hml {

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string details;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 2026;
  std::string only;        // run a single named criterion when non-empty
  double scale = 1.0;      // replica multiplier for desk-scale runs
  std::string out_dir;     // optional artifact directory
  bool print = true;       // one pass/fail line per criterion on stdout
};

/// Registered acceptance criteria, in run order.
std::vector<std::string> acceptance_criteria();

/// Runs the acceptance suite (optionally filtered); one verdict per criterion.
std::vector<CriterionResult> verify_suite(const AcceptanceOptions& opts);

}  // namespace hml
