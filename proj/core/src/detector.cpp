#include "fringe/detector.hpp"

#include <cmath>
#include <string>

#include "fringe/errors.hpp"

namespace fringe {

DetectorModel DetectorModel::from_bit_depth(int bit_depth) {
  if (bit_depth < 1 || bit_depth > 30)
    throw validation_error("detector: bit depth must be in [1, 30], got " +
                           std::to_string(bit_depth));
  DetectorModel d;
  d.bit_depth = bit_depth;
  d.g_max = (std::int64_t{1} << bit_depth) - 1;
  d.noise_figure = 1.0 / std::sqrt(static_cast<double>(d.g_max));
  return d;
}

double snr(const DetectorModel& detector) { return detector.noise_figure; }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

RngState::RngState(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RngState RngState::substream(std::uint64_t index) const {
  return RngState(mix_seed(seed_, index));
}

double RngState::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngState::bounded(std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(engine_()) * n) >> 64);
}

namespace {

// Cumulative inversion; expected iterations are O(mean), fine below 30.
std::int64_t poisson_inversion(double mean, RngState& rng) {
  const double u = rng.uniform01();
  double p = std::exp(-mean);
  double cumulative = p;
  std::int64_t k = 0;
  // The loop bound guards against u landing in the rounded-away tail.
  const std::int64_t k_max = static_cast<std::int64_t>(mean + 12.0 * std::sqrt(mean) + 50.0);
  while (u > cumulative && k < k_max) {
    ++k;
    p *= mean / static_cast<double>(k);
    cumulative += p;
  }
  return k;
}

// Hormann's PTRS transformed rejection (valid for mean >= 10). Constants are
// the published ones; the log-pmf acceptance test uses lgamma directly.
std::int64_t poisson_ptrs(double mean, RngState& rng) {
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    double u = rng.uniform01() - 0.5;
    double v = rng.uniform01();
    double us = 0.5 - std::abs(u);
    double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        k * log_mean - mean - std::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

}  // namespace

std::int64_t poisson_sample(double mean, RngState& rng) {
  if (!std::isfinite(mean) || mean < 0.0)
    throw validation_error("poisson_sample: mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  if (mean < 30.0) return poisson_inversion(mean, rng);
  return poisson_ptrs(mean, rng);
}

LineProfile add_shot_noise(const LineProfile& profile, const DetectorModel& detector,
                           RngState& rng, bool clamp) {
  const double g = static_cast<double>(detector.g_max);
  LineProfile noisy;
  noisy.thickness = profile.thickness;
  noisy.samples.reserve(profile.samples.size());
  for (double intensity : profile.samples) {
    if (!(intensity >= 0.0))
      throw validation_error("add_shot_noise: clean intensity must be nonnegative");
    std::int64_t count = poisson_sample(intensity * g, rng);
    if (clamp && count > detector.g_max) count = detector.g_max;
    noisy.samples.push_back(static_cast<double>(count) / g);
  }
  return noisy;
}

}  // namespace fringe
