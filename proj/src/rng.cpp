#include "hml/rng.hpp"

#include <cmath>

namespace hml {

static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t Rng::mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

Rng::Rng(std::uint64_t master_seed, std::uint64_t stream) {
  // two finalizer rounds decorrelate nearby (seed, stream) pairs
  base_ = mix(master_seed + kGolden * (mix(stream + kGolden) | 1ULL));
}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return mix(base_ + counter_ * kGolden);
}

double Rng::uniform01() {
  // 53-bit mantissa, offset by half an ulp so 0 and 1 are never produced
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

}  // namespace hml
