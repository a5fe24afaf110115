#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fringe/config.hpp"

namespace fringe {

// Error category of the first failed stage; drives the CLI exit code.
enum class ErrorKind { none, io, parse, validation };

struct DetectorRunSummary {
  int bit_depth = 0;
  double rms_argmax_nm = 0.0;
  double rms_expect_nm = 0.0;
  std::optional<double> rms_ongrid_argmax_nm;
};

struct PipelineResult {
  bool ok = false;
  ErrorKind error_kind = ErrorKind::none;
  std::string error;
  std::filesystem::path manifest_path;
  int epochs = 0;
  double final_mse = 0.0;
  bool converged = false;
  std::vector<DetectorRunSummary> detectors;
};

// Full experiment: training set, model, per-detector noisy test sets,
// evaluations, scatter plots, and a JSON manifest tying it together.
// Stage failures are flagged in the manifest and reported in the result
// rather than thrown; only a config invalid up front or an unusable output
// directory throws.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace fringe
