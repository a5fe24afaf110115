#pragma once

#include <cstdint>
#include <random>

#include "fringe/optics.hpp"

namespace fringe {

// Grey-level detector with full scale g_max = 2^bit_depth - 1 and shot-noise
// figure 1/sqrt(g_max) at full scale.
struct DetectorModel {
  int bit_depth = 8;
  std::int64_t g_max = 255;
  double noise_figure = 0.0;

  static DetectorModel from_bit_depth(int bit_depth);
};

// Noise ratio at full scale, 1/sqrt(g_max).
double snr(const DetectorModel& detector);

// Deterministic 64-bit random source. The engine is std::mt19937_64, whose
// output sequence for a given seed is pinned by the standard, and all
// derived draws (uniforms, bounded ints, Poisson counts) are computed here
// rather than through distribution classes, so a seed fixes every byte of
// downstream output on any platform.
class RngState {
 public:
  explicit RngState(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  // Independent substream for a record index; generation order across
  // records does not matter because each record owns its substream.
  RngState substream(std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01();

  // Uniform integer in [0, n), n >= 1.
  std::uint64_t bounded(std::uint64_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer over (seed, index); used to derive substream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// One Poisson-distributed count. Inversion by sequential search below mean
// 30, Hormann's PTRS transformed rejection above, so counts are exact (not
// normal-approximated) across the full grey-level range.
std::int64_t poisson_sample(double mean, RngState& rng);

// Per-pixel poisson_sample(I * g_max)/g_max. Draws above full scale are kept
// unless clamp is set; the thickness tag is preserved.
LineProfile add_shot_noise(const LineProfile& profile, const DetectorModel& detector,
                           RngState& rng, bool clamp = false);

}  // namespace fringe
