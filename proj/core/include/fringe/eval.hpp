#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "fringe/ann.hpp"
#include "fringe/dataset.hpp"
#include "fringe/detector.hpp"

namespace fringe {

// One test sample: ground truth plus both decoded estimates.
struct EvalRecord {
  double catalogue_nm = 0.0;
  double ann_argmax_nm = 0.0;
  double ann_expect_nm = 0.0;
};

struct EvalReport {
  std::vector<EvalRecord> records;
  // Present when the evaluated set carries detector provenance; drives the
  // noise annotation on scatter plots.
  std::optional<DetectorModel> detector;
  double rms_argmax = 0.0;
  double rms_expect = 0.0;
  // Argmax RMS over the subset of records whose catalogue value lies on the
  // decoding grid. Empty when no record does.
  std::optional<double> rms_ongrid_argmax;
};

double rms_error(const std::vector<std::pair<double, double>>& true_predicted_nm);

// Refreshes the three RMS fields from the records.
void recompute_rms(EvalReport& report, const ThicknessGrid& grid);

// Runs every record of test_set through the network and decodes with both
// readouts against grid.
EvalReport evaluate(const MlpNetwork& net, const Dataset& test_set,
                    const ThicknessGrid& grid);

void save_report_csv(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report_csv(const std::filesystem::path& path,
                           const ThicknessGrid& grid);

// Self-contained scatter SVG: one marker per record per decoder series, an
// identity reference line, and the detector noise figure when known.
void write_scatter_svg(const EvalReport& report, const std::filesystem::path& path);

// Writes <stem>.csv and <stem>.svg next to each other.
void emit_scatter(const EvalReport& report, const std::filesystem::path& stem);

}  // namespace fringe
