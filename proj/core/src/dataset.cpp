#include "fringe/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fringe/errors.hpp"
#include "fringe/numio.hpp"

namespace fringe {

namespace {

constexpr double kMaxThicknessNm = 200.0;

std::string expected_header() {
  std::string h = "thickness_nm";
  for (int j = 0; j < kFeatureCount; ++j) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "f%03d", j);
    h += ",";
    h += buf;
  }
  return h;
}

}  // namespace

void ThicknessGrid::validate() const {
  if (!(start_nm > 0.0))
    throw validation_error("thickness grid: start must be positive");
  if (!(step_nm > 0.0))
    throw validation_error("thickness grid: step must be positive");
  if (count < 1)
    throw validation_error("thickness grid: count must be at least 1");
  const double last = thickness_nm(count - 1);
  if (last > kMaxThicknessNm + 1e-9)
    throw validation_error("thickness grid: last value " + format_double(last) +
                           " nm exceeds the working range of " +
                           format_double(kMaxThicknessNm) + " nm");
}

std::vector<double> ThicknessGrid::values_nm() const {
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = thickness_nm(i);
  return v;
}

int ThicknessGrid::index_of(double nm, double tol_nm) const {
  const long long i = std::llround((nm - start_nm) / step_nm);
  if (i < 0 || i >= count) return -1;
  if (std::abs(thickness_nm(static_cast<int>(i)) - nm) > tol_nm) return -1;
  return static_cast<int>(i);
}

ThicknessGrid ThicknessGrid::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ':')) parts.push_back(token);
  if (parts.size() != 3)
    throw validation_error("thickness grid '" + text + "': expected start:step:stop");
  auto start = try_parse_double(parts[0]);
  auto step = try_parse_double(parts[1]);
  auto stop = try_parse_double(parts[2]);
  if (!start || !step || !stop)
    throw validation_error("thickness grid '" + text + "': non-numeric field");
  if (!(*step > 0.0))
    throw validation_error("thickness grid '" + text + "': step must be positive");
  const long long count = std::llround((*stop - *start) / *step) + 1;
  ThicknessGrid grid{*start, *step, static_cast<int>(count)};
  if (count < 1 || std::abs(grid.thickness_nm(static_cast<int>(count) - 1) - *stop) > 1e-9)
    throw validation_error("thickness grid '" + text + "': stop is not start + k*step");
  grid.validate();
  return grid;
}

DownsampleMode parse_downsample_mode(const std::string& name) {
  if (name == "stride") return DownsampleMode::stride;
  if (name == "block") return DownsampleMode::block;
  if (name == "head") return DownsampleMode::head;
  throw validation_error("downsample mode '" + name + "': expected stride, block, or head");
}

std::string to_string(DownsampleMode mode) {
  switch (mode) {
    case DownsampleMode::stride: return "stride";
    case DownsampleMode::block: return "block";
    case DownsampleMode::head: return "head";
  }
  return "stride";
}

FeatureVector downsample(const LineProfile& profile, DownsampleMode mode) {
  if (profile.samples.size() != static_cast<std::size_t>(kProfilePixels))
    throw validation_error("downsample: expected " + std::to_string(kProfilePixels) +
                           " samples, got " + std::to_string(profile.samples.size()));
  FeatureVector features{};
  switch (mode) {
    case DownsampleMode::stride:
      for (int j = 0; j < kFeatureCount; ++j)
        features[static_cast<std::size_t>(j)] =
            profile.samples[static_cast<std::size_t>(j * kDownsampleStride)];
      break;
    case DownsampleMode::block:
      for (int j = 0; j < kFeatureCount; ++j) {
        double sum = 0.0;
        for (int k = 0; k < kDownsampleStride; ++k)
          sum += profile.samples[static_cast<std::size_t>(j * kDownsampleStride + k)];
        features[static_cast<std::size_t>(j)] = sum / kDownsampleStride;
      }
      break;
    case DownsampleMode::head:
      for (int j = 0; j < kFeatureCount; ++j)
        features[static_cast<std::size_t>(j)] = profile.samples[static_cast<std::size_t>(j)];
      break;
  }
  return features;
}

Dataset build_training_set(const OpticalSetup& setup, const ThicknessGrid& grid,
                           DownsampleMode mode) {
  setup.validate();
  grid.validate();
  Dataset ds;
  ds.kind = DatasetKind::train;
  ds.provenance = Provenance{};
  ds.records.reserve(static_cast<std::size_t>(grid.count));
  for (int i = 0; i < grid.count; ++i) {
    const FilmThickness t{grid.thickness_nm(i)};
    ds.records.push_back({t.nm, downsample(synthesize_profile(t, setup), mode)});
  }
  return ds;
}

Dataset build_test_set(const OpticalSetup& setup, const ThicknessGrid& grid,
                       const DetectorModel& detector, std::uint64_t seed,
                       DownsampleMode mode, int realizations, bool clamp) {
  setup.validate();
  grid.validate();
  if (realizations < 1)
    throw validation_error("build_test_set: realizations must be at least 1");
  Dataset ds;
  ds.kind = DatasetKind::test;
  ds.provenance = Provenance{true, detector.bit_depth, seed};
  ds.records.reserve(static_cast<std::size_t>(grid.count) *
                     static_cast<std::size_t>(realizations));
  const RngState master(seed);
  std::uint64_t record_index = 0;
  for (int i = 0; i < grid.count; ++i) {
    const FilmThickness t{grid.thickness_nm(i)};
    const LineProfile clean = synthesize_profile(t, setup);
    for (int r = 0; r < realizations; ++r, ++record_index) {
      RngState rng = master.substream(record_index);
      ds.records.push_back({t.nm, downsample(add_shot_noise(clean, detector, rng, clamp), mode)});
    }
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out << expected_header() << "\n";
  for (const DatasetRecord& rec : dataset.records) {
    out << format_double(rec.thickness_nm);
    for (double f : rec.features) out << "," << format_double(f);
    out << "\n";
  }
  if (!out) throw io_error("write failed for '" + path.string() + "'");
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

// 1-based character column of a field within its line.
std::size_t field_column(std::string_view line, std::string_view field) {
  return static_cast<std::size_t>(field.data() - line.data()) + 1;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, DatasetKind kind,
                     Provenance provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");

  Dataset ds;
  ds.kind = kind;
  ds.provenance = provenance;

  std::string line;
  if (!std::getline(in, line))
    throw parse_error("dataset '" + path.string() + "': missing header", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header())
    throw parse_error("dataset '" + path.string() + "': header mismatch, expected '" +
                          expected_header() + "'",
                      1, 1);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != static_cast<std::size_t>(kFeatureCount) + 1)
      throw parse_error("dataset '" + path.string() + "': expected " +
                            std::to_string(kFeatureCount + 1) + " fields, got " +
                            std::to_string(fields.size()),
                        line_no, 1);
    DatasetRecord rec;
    auto thickness = try_parse_double(fields[0]);
    if (!thickness)
      throw parse_error("dataset '" + path.string() + "': bad thickness value", line_no,
                        field_column(line, fields[0]));
    rec.thickness_nm = *thickness;
    for (int j = 0; j < kFeatureCount; ++j) {
      const auto value = try_parse_double(fields[static_cast<std::size_t>(j) + 1]);
      if (!value)
        throw parse_error("dataset '" + path.string() + "': bad feature value", line_no,
                          field_column(line, fields[static_cast<std::size_t>(j) + 1]));
      rec.features[static_cast<std::size_t>(j)] = *value;
    }
    ds.records.push_back(rec);
  }
  return ds;
}

}  // namespace fringe
