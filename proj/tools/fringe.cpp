// Command-line front end: profile synthesis, dataset generation, training,
// evaluation, plotting, and the full pipeline.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fringe/ann.hpp"
#include "fringe/config.hpp"
#include "fringe/dataset.hpp"
#include "fringe/detector.hpp"
#include "fringe/errors.hpp"
#include "fringe/eval.hpp"
#include "fringe/numio.hpp"
#include "fringe/optics.hpp"
#include "fringe/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;

// Shared option state. Precedence, lowest to highest: built-in defaults,
// FRINGE_SEED, config file, specific flags, --seed.
struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Config file (key = value lines)")
      ->option_text("FILE");
  cmd->add_option("--seed", opts.seed, "Override every seed with one value")
      ->option_text("U64");
}

fringe::RunConfig assemble_config(const CommonOpts& opts) {
  fringe::RunConfig cfg;
  if (const auto env = fringe::seed_from_env()) fringe::override_all_seeds(cfg, *env);
  if (!opts.config_path.empty()) cfg = fringe::load_config(opts.config_path, cfg);
  return cfg;
}

void finish_config(fringe::RunConfig& cfg, const CommonOpts& opts) {
  if (opts.seed) fringe::override_all_seeds(cfg, *opts.seed);
}

void write_profile_csv(const fringe::LineProfile& profile,
                       const fringe::OpticalSetup& setup, std::ostream& out) {
  out << "pixel,x_m,intensity\n";
  for (std::size_t k = 0; k < profile.samples.size(); ++k)
    out << k << "," << fringe::format_double(setup.pixel_x_m(static_cast<int>(k)), 17)
        << "," << fringe::format_double(profile.samples[k], 17) << "\n";
}

struct SynthOpts {
  CommonOpts common;
  double thickness_nm = 0.0;
  std::string out_path;
};

int run_synth(const SynthOpts& opts) {
  fringe::RunConfig cfg = assemble_config(opts.common);
  finish_config(cfg, opts.common);
  const fringe::LineProfile profile = fringe::synthesize_profile(
      fringe::FilmThickness{opts.thickness_nm}, cfg.setup);
  if (opts.out_path.empty()) {
    write_profile_csv(profile, cfg.setup, std::cout);
  } else {
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out)
      throw fringe::io_error("cannot open '" + opts.out_path + "' for writing");
    write_profile_csv(profile, cfg.setup, out);
    if (!out) throw fringe::io_error("write failed for '" + opts.out_path + "'");
  }
  return kExitOk;
}

struct DatasetOpts {
  CommonOpts common;
  std::string kind;
  std::optional<int> bit_depth;
  std::optional<std::string> downsample;
  std::optional<int> realizations;
  bool clamp = false;
  std::string out_path;
};

int run_dataset(const DatasetOpts& opts) {
  fringe::RunConfig cfg = assemble_config(opts.common);
  if (opts.bit_depth) cfg.detector_bits = {*opts.bit_depth};
  if (opts.downsample) cfg.downsample = fringe::parse_downsample_mode(*opts.downsample);
  if (opts.realizations) cfg.realizations = *opts.realizations;
  if (opts.clamp) cfg.clamp = true;
  finish_config(cfg, opts.common);
  cfg.validate();

  fringe::Dataset ds;
  std::string out_path = opts.out_path;
  if (opts.kind == "train") {
    ds = fringe::build_training_set(cfg.setup, cfg.train_grid, cfg.downsample);
    if (out_path.empty()) out_path = "train.csv";
  } else {
    const fringe::DetectorModel detector =
        fringe::DetectorModel::from_bit_depth(cfg.detector_bits.front());
    ds = fringe::build_test_set(cfg.setup, cfg.test_grid, detector, cfg.noise_seed,
                                cfg.downsample, cfg.realizations, cfg.clamp);
    if (out_path.empty())
      out_path = "test_" + std::to_string(detector.bit_depth) + "bit.csv";
  }
  fringe::save_dataset(ds, out_path);
  std::cout << out_path << ": " << ds.records.size() << " records\n";
  return kExitOk;
}

struct TrainOpts {
  CommonOpts common;
  std::string data_path;
  std::string out_path = "model.txt";
  std::optional<double> learning_rate;
  std::optional<int> max_epochs;
  std::optional<double> target_mse;
};

int run_train(const TrainOpts& opts) {
  fringe::RunConfig cfg = assemble_config(opts.common);
  if (opts.learning_rate) cfg.train.learning_rate = *opts.learning_rate;
  if (opts.max_epochs) cfg.train.max_epochs = *opts.max_epochs;
  if (opts.target_mse) cfg.train.target_mse = *opts.target_mse;
  finish_config(cfg, opts.common);
  cfg.validate();

  const fringe::Dataset train_set = fringe::load_dataset(opts.data_path);
  const std::vector<int> sizes = {fringe::kFeatureCount, 64, 64, cfg.train_grid.count};
  fringe::TrainResult result = fringe::train(
      fringe::MlpNetwork::random_init(sizes, cfg.init_seed), train_set, cfg.train);
  fringe::save_model(result.net, opts.out_path);

  const double final_mse = result.epoch_mse.back();
  std::cout << opts.out_path << ": " << result.epoch_mse.size()
            << " epochs, final mse " << fringe::format_double(final_mse) << "\n";
  if (final_mse > cfg.train.target_mse)
    std::cerr << "warning: stopped at max_epochs before reaching target mse "
              << fringe::format_double(cfg.train.target_mse) << "\n";
  return kExitOk;
}

struct EvalOpts {
  CommonOpts common;
  std::string model_path;
  std::string data_path;
  std::string out_path = "eval.csv";
  std::optional<int> bit_depth;
};

int run_eval(const EvalOpts& opts) {
  fringe::RunConfig cfg = assemble_config(opts.common);
  finish_config(cfg, opts.common);
  cfg.validate();

  const std::vector<int> sizes = {fringe::kFeatureCount, 64, 64, cfg.train_grid.count};
  const fringe::MlpNetwork net = fringe::load_model(opts.model_path, sizes);
  fringe::Provenance provenance;
  if (opts.bit_depth) {
    provenance.noisy = true;
    provenance.bit_depth = *opts.bit_depth;
  }
  const fringe::Dataset test_set =
      fringe::load_dataset(opts.data_path, fringe::DatasetKind::test, provenance);
  const fringe::EvalReport report = fringe::evaluate(net, test_set, cfg.train_grid);
  fringe::save_report_csv(report, opts.out_path);

  std::cout << opts.out_path << ": " << report.records.size() << " records\n";
  std::cout << "rms_argmax_nm " << fringe::format_double(report.rms_argmax) << "\n";
  std::cout << "rms_expect_nm " << fringe::format_double(report.rms_expect) << "\n";
  if (report.rms_ongrid_argmax)
    std::cout << "rms_ongrid_argmax_nm "
              << fringe::format_double(*report.rms_ongrid_argmax) << "\n";
  return kExitOk;
}

struct PlotOpts {
  CommonOpts common;
  std::string report_path;
  std::string out_path;
  std::optional<int> bit_depth;
};

int run_plot(const PlotOpts& opts) {
  fringe::RunConfig cfg = assemble_config(opts.common);
  finish_config(cfg, opts.common);

  fringe::EvalReport report = fringe::load_report_csv(opts.report_path, cfg.train_grid);
  if (opts.bit_depth)
    report.detector = fringe::DetectorModel::from_bit_depth(*opts.bit_depth);
  std::filesystem::path out = opts.out_path;
  if (out.empty()) out = std::filesystem::path(opts.report_path).replace_extension(".svg");
  fringe::write_scatter_svg(report, out);
  std::cout << out.string() << "\n";
  return kExitOk;
}

struct RunOpts {
  CommonOpts common;
  std::string out_dir;
};

int run_run(const RunOpts& opts) {
  fringe::RunConfig cfg = assemble_config(opts.common);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  finish_config(cfg, opts.common);

  const fringe::PipelineResult result = fringe::run_pipeline(cfg);
  std::cout << "training: " << result.epochs << " epochs, final mse "
            << fringe::format_double(result.final_mse)
            << (result.converged ? "" : " (not converged)") << "\n";
  for (const fringe::DetectorRunSummary& d : result.detectors) {
    std::cout << d.bit_depth << "-bit: rms_argmax_nm "
              << fringe::format_double(d.rms_argmax_nm) << ", rms_expect_nm "
              << fringe::format_double(d.rms_expect_nm);
    if (d.rms_ongrid_argmax_nm)
      std::cout << ", rms_ongrid_argmax_nm "
                << fringe::format_double(*d.rms_ongrid_argmax_nm);
    std::cout << "\n";
  }
  std::cout << "manifest: " << result.manifest_path.string() << "\n";
  if (!result.ok) {
    std::cerr << "fringe: " << result.error << "\n";
    switch (result.error_kind) {
      case fringe::ErrorKind::io:
        return kExitIo;
      case fringe::ErrorKind::parse:
        return kExitIo;
      default:
        return kExitValidation;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin-film thickness from interference fringe profiles"};
  app.require_subcommand(1);

  SynthOpts synth_opts;
  CLI::App* synth = app.add_subcommand("synth", "Write one clean line profile as CSV");
  synth->add_option("--thickness-nm", synth_opts.thickness_nm, "Film thickness in nm")
      ->required();
  synth->add_option("--out", synth_opts.out_path, "Output CSV (default stdout)")
      ->option_text("FILE");
  add_common(synth, synth_opts.common);

  DatasetOpts dataset_opts;
  CLI::App* dataset = app.add_subcommand("dataset", "Generate a dataset CSV");
  dataset->add_option("--kind", dataset_opts.kind, "train (clean) or test (noisy)")
      ->required()
      ->check(CLI::IsMember({"train", "test"}));
  dataset->add_option("--bit-depth", dataset_opts.bit_depth, "Detector bit depth");
  dataset->add_option("--downsample", dataset_opts.downsample,
                      "stride, block, or head");
  dataset->add_option("--realizations", dataset_opts.realizations,
                      "Noisy copies per thickness");
  dataset->add_flag("--clamp", dataset_opts.clamp, "Clamp counts to full scale");
  dataset->add_option("--out", dataset_opts.out_path, "Output CSV")->option_text("FILE");
  add_common(dataset, dataset_opts.common);

  TrainOpts train_opts;
  CLI::App* train = app.add_subcommand("train", "Train the network on a dataset CSV");
  train->add_option("--data", train_opts.data_path, "Training dataset CSV")->required();
  train->add_option("--out", train_opts.out_path, "Model file")->option_text("FILE");
  train->add_option("--learning-rate", train_opts.learning_rate, "SGD step size");
  train->add_option("--max-epochs", train_opts.max_epochs, "Epoch cap");
  train->add_option("--target-mse", train_opts.target_mse, "Stop threshold");
  add_common(train, train_opts.common);

  EvalOpts eval_opts;
  CLI::App* eval = app.add_subcommand("eval", "Decode a dataset with a trained model");
  eval->add_option("--model", eval_opts.model_path, "Model file")->required();
  eval->add_option("--data", eval_opts.data_path, "Dataset CSV")->required();
  eval->add_option("--out", eval_opts.out_path, "Report CSV")->option_text("FILE");
  eval->add_option("--bit-depth", eval_opts.bit_depth,
                   "Detector bit depth of the data (annotation only)");
  add_common(eval, eval_opts.common);

  PlotOpts plot_opts;
  CLI::App* plot = app.add_subcommand("plot", "Render a report CSV as a scatter SVG");
  plot->add_option("--report", plot_opts.report_path, "Report CSV")->required();
  plot->add_option("--out", plot_opts.out_path, "Output SVG")->option_text("FILE");
  plot->add_option("--bit-depth", plot_opts.bit_depth,
                   "Detector bit depth for the noise annotation");
  add_common(plot, plot_opts.common);

  RunOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "Full pipeline: datasets, model, reports");
  run->add_option("--out-dir", run_opts.out_dir, "Output directory")->option_text("DIR");
  add_common(run, run_opts.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return run_synth(synth_opts);
    if (dataset->parsed()) return run_dataset(dataset_opts);
    if (train->parsed()) return run_train(train_opts);
    if (eval->parsed()) return run_eval(eval_opts);
    if (plot->parsed()) return run_plot(plot_opts);
    if (run->parsed()) return run_run(run_opts);
  } catch (const fringe::io_error& e) {
    std::cerr << "fringe: " << e.what() << "\n";
    return kExitIo;
  } catch (const fringe::parse_error& e) {
    std::cerr << "fringe: " << e.what() << "\n";
    return kExitIo;
  } catch (const fringe::validation_error& e) {
    std::cerr << "fringe: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "fringe: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
