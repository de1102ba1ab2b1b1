#pragma once

#include <cstdint>

namespace hml {

/// Counter-based splittable generator. Stream i of a master seed is an
/// independent sequence; output j of a stream is a pure function of
/// (master_seed, stream, j), so replica work is deterministic under any
/// thread schedule.
class Rng {
 public:
  Rng(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform01();  // in the open interval (0,1)
  double normal();     // standard normal, Box-Muller with cached spare

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hml
