#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fringe/detector.hpp"
#include "fringe/optics.hpp"

namespace fringe {

// The network consumes 40 samples taken from the 1000-pixel profile.
inline constexpr int kFeatureCount = 40;
inline constexpr int kProfilePixels = 1000;
inline constexpr int kDownsampleStride = kProfilePixels / kFeatureCount;

// Arithmetic thickness grid start, start+step, ..., start+(count-1)*step, nm.
struct ThicknessGrid {
  double start_nm = 0.0;
  double step_nm = 0.0;
  int count = 0;

  void validate() const;
  double thickness_nm(int i) const { return start_nm + i * step_nm; }
  std::vector<double> values_nm() const;

  // Index of a grid value within tol_nm, or -1.
  int index_of(double nm, double tol_nm = 1e-6) const;

  // "start:step:stop" in nm, e.g. "10:10:200".
  static ThicknessGrid parse(const std::string& text);

  static ThicknessGrid train_default() { return {10.0, 10.0, 20}; }
  static ThicknessGrid test_default() { return {5.0, 5.0, 40}; }
};

enum class DownsampleMode { stride, block, head };

DownsampleMode parse_downsample_mode(const std::string& name);
std::string to_string(DownsampleMode mode);

using FeatureVector = std::array<double, kFeatureCount>;

struct DatasetRecord {
  double thickness_nm = 0.0;
  FeatureVector features{};
};

enum class DatasetKind { train, test };

// How the records were produced; carried for reporting, not persisted in CSV.
struct Provenance {
  bool noisy = false;
  int bit_depth = 0;
  std::uint64_t seed = 0;
};

struct Dataset {
  DatasetKind kind = DatasetKind::train;
  Provenance provenance;
  std::vector<DatasetRecord> records;
};

// 1000 -> 40 reduction. stride keeps pixels 0, 25, ..., 975; block averages
// each 25-pixel window; head keeps the first 40 pixels. Profiles of any other
// length are rejected.
FeatureVector downsample(const LineProfile& profile,
                         DownsampleMode mode = DownsampleMode::stride);

// One clean record per grid thickness.
Dataset build_training_set(const OpticalSetup& setup, const ThicknessGrid& grid,
                           DownsampleMode mode = DownsampleMode::stride);

// realizations noisy records per grid thickness; record j (thickness-major)
// draws from substream(seed, j).
Dataset build_test_set(const OpticalSetup& setup, const ThicknessGrid& grid,
                       const DetectorModel& detector, std::uint64_t seed,
                       DownsampleMode mode = DownsampleMode::stride,
                       int realizations = 1, bool clamp = false);

// CSV with header thickness_nm,f000,...,f039; floats as shortest round-trip
// decimals, so save followed by load is bit-exact.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path,
                     DatasetKind kind = DatasetKind::train,
                     Provenance provenance = {});

}  // namespace fringe
