#include "fringe/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <utility>

#include <json.hpp>

#include "fringe/ann.hpp"
#include "fringe/dataset.hpp"
#include "fringe/detector.hpp"
#include "fringe/errors.hpp"
#include "fringe/eval.hpp"
#include "fringe/numio.hpp"

namespace fringe {

namespace {

using json = nlohmann::ordered_json;

std::string grid_spec(const ThicknessGrid& grid) {
  return format_double(grid.start_nm) + ":" + format_double(grid.step_nm) + ":" +
         format_double(grid.thickness_nm(grid.count - 1));
}

json config_echo(const RunConfig& cfg) {
  json j;
  j["optics.wavelength_nm"] = cfg.setup.wavelength_m * 1e9;
  j["optics.wavefront_radius_m"] = cfg.setup.wavefront_radius_m;
  j["optics.pixel_pitch_nm"] = cfg.setup.pixel_pitch_m * 1e9;
  j["optics.pixel_count"] = cfg.setup.pixel_count;
  j["grid.train"] = grid_spec(cfg.train_grid);
  j["grid.test"] = grid_spec(cfg.test_grid);
  j["run.detectors"] = cfg.detector_bits;
  j["noise.seed"] = cfg.noise_seed;
  j["noise.clamp"] = cfg.clamp;
  j["dataset.downsample"] = to_string(cfg.downsample);
  j["dataset.realizations"] = cfg.realizations;
  j["train.learning_rate"] = cfg.train.learning_rate;
  j["train.max_epochs"] = cfg.train.max_epochs;
  j["train.target_mse"] = cfg.train.target_mse;
  j["train.seed"] = cfg.train.seed;
  j["train.shuffle"] = cfg.train.shuffle;
  j["train.init_seed"] = cfg.init_seed;
  j["eval.reference_rms_nm"] = cfg.reference_rms_nm;
  j["out.dir"] = cfg.out_dir.generic_string();
  return j;
}

ErrorKind classify(const std::exception& e) {
  if (dynamic_cast<const io_error*>(&e)) return ErrorKind::io;
  if (dynamic_cast<const parse_error*>(&e)) return ErrorKind::parse;
  return ErrorKind::validation;
}

// Runs one stage unless an earlier one failed; records outcome in the
// manifest stage list and latches the first error into the result.
struct StageRunner {
  json& stages;
  PipelineResult& result;
  bool failed = false;

  bool run(const std::string& stage_name, const std::vector<std::string>& artifacts,
           const std::function<void()>& body) {
    json entry;
    entry["name"] = stage_name;
    if (failed) {
      entry["ok"] = false;
      entry["skipped"] = true;
      stages.push_back(std::move(entry));
      return false;
    }
    try {
      body();
      entry["ok"] = true;
      if (!artifacts.empty()) entry["artifacts"] = artifacts;
      stages.push_back(std::move(entry));
      return true;
    } catch (const std::exception& e) {
      failed = true;
      entry["ok"] = false;
      entry["error"] = e.what();
      stages.push_back(std::move(entry));
      result.error_kind = classify(e);
      result.error = stage_name + ": " + e.what();
      return false;
    }
  }
};

}  // namespace

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec)
    throw io_error("cannot create output directory '" + config.out_dir.string() +
                   "': " + ec.message());

  PipelineResult result;
  result.manifest_path = config.out_dir / "manifest.json";

  json stages = json::array();
  StageRunner runner{stages, result};

  Dataset train_set;
  runner.run("training-set", {"train.csv"}, [&] {
    train_set = build_training_set(config.setup, config.train_grid, config.downsample);
    save_dataset(train_set, config.out_dir / "train.csv");
  });

  json training = json::object();
  MlpNetwork net({kFeatureCount, 64, 64, config.train_grid.count});
  runner.run("train", {"model.txt"}, [&] {
    const std::vector<int> sizes = {kFeatureCount, 64, 64, config.train_grid.count};
    TrainResult trained = train(MlpNetwork::random_init(sizes, config.init_seed),
                                train_set, config.train);
    net = std::move(trained.net);
    result.epochs = static_cast<int>(trained.epoch_mse.size());
    result.final_mse = trained.epoch_mse.back();
    result.converged = result.final_mse <= config.train.target_mse;
    training["epochs"] = result.epochs;
    training["final_mse"] = result.final_mse;
    training["converged"] = result.converged;
    save_model(net, config.out_dir / "model.txt");
  });

  json detector_results = json::array();
  for (int bits : config.detector_bits) {
    const std::string tag = std::to_string(bits) + "bit";
    const DetectorModel detector = DetectorModel::from_bit_depth(bits);
    Dataset test_set;
    runner.run("test-set-" + tag, {"test_" + tag + ".csv"}, [&] {
      test_set = build_test_set(config.setup, config.test_grid, detector,
                                config.noise_seed, config.downsample,
                                config.realizations, config.clamp);
      save_dataset(test_set, config.out_dir / ("test_" + tag + ".csv"));
    });
    const bool evaluated =
        runner.run("eval-" + tag, {"eval_" + tag + ".csv", "eval_" + tag + ".svg"}, [&] {
          const EvalReport report = evaluate(net, test_set, config.train_grid);
          emit_scatter(report, config.out_dir / ("eval_" + tag));

          DetectorRunSummary summary;
          summary.bit_depth = bits;
          summary.rms_argmax_nm = report.rms_argmax;
          summary.rms_expect_nm = report.rms_expect;
          summary.rms_ongrid_argmax_nm = report.rms_ongrid_argmax;
          result.detectors.push_back(summary);

          json r;
          r["bit_depth"] = bits;
          r["g_max"] = detector.g_max;
          r["snr"] = snr(detector);
          r["rms_argmax_nm"] = report.rms_argmax;
          r["rms_expect_nm"] = report.rms_expect;
          if (report.rms_ongrid_argmax)
            r["rms_ongrid_argmax_nm"] = *report.rms_ongrid_argmax;
          else
            r["rms_ongrid_argmax_nm"] = nullptr;
          detector_results.push_back(std::move(r));
        });
    (void)evaluated;
  }

  result.ok = !runner.failed;

  json manifest;
  manifest["schema"] = "fringe-run/1";
  manifest["ok"] = result.ok;
  manifest["config"] = config_echo(config);
  manifest["seeds"] = {{"noise", config.noise_seed},
                       {"train_shuffle", config.train.seed},
                       {"train_init", config.init_seed}};
  manifest["stages"] = std::move(stages);
  manifest["training"] = std::move(training);

  json results;
  results["detectors"] = std::move(detector_results);
  if (result.detectors.size() == 2) {
    json diff;
    diff["argmax_nm"] = std::abs(result.detectors[0].rms_argmax_nm -
                                 result.detectors[1].rms_argmax_nm);
    diff["expect_nm"] = std::abs(result.detectors[0].rms_expect_nm -
                                 result.detectors[1].rms_expect_nm);
    results["rms_difference"] = std::move(diff);
  }
  results["reference_rms_nm"] = config.reference_rms_nm;
  manifest["results"] = std::move(results);

  std::ofstream out(result.manifest_path, std::ios::binary);
  if (!out)
    throw io_error("cannot open '" + result.manifest_path.string() + "' for writing");
  out << manifest.dump(2) << "\n";
  if (!out) throw io_error("write failed for '" + result.manifest_path.string() + "'");

  return result;
}

}  // namespace fringe
