#include "fringe/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fringe/detector.hpp"
#include "fringe/errors.hpp"
#include "fringe/numio.hpp"

namespace fringe {

void RunConfig::validate() const {
  setup.validate();
  train_grid.validate();
  test_grid.validate();
  if (detector_bits.empty())
    throw validation_error("config: at least one detector bit depth required");
  for (int bits : detector_bits) DetectorModel::from_bit_depth(bits);
  if (realizations < 1)
    throw validation_error("config: realizations must be at least 1");
  if (!(reference_rms_nm > 0.0))
    throw validation_error("config: reference RMS must be positive");
  if (!(train.learning_rate > 0.0))
    throw validation_error("config: learning rate must be positive");
  if (train.max_epochs < 1)
    throw validation_error("config: max_epochs must be at least 1");
  if (!(train.target_mse > 0.0))
    throw validation_error("config: target MSE must be positive");
  if (out_dir.empty())
    throw validation_error("config: output directory must not be empty");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(const std::string& name, const std::string& key,
                            std::string_view value, std::size_t line_no) {
  throw parse_error(name + ": bad value '" + std::string(value) + "' for key '" + key + "'",
                    line_no, 1);
}

double parse_positive(const std::string& name, const std::string& key,
                      std::string_view value, std::size_t line_no) {
  const auto v = try_parse_double(value);
  if (!v || !(*v > 0.0)) bad_value(name, key, value, line_no);
  return *v;
}

// Correctly-rounded nm -> m: shifting the decimal exponent and parsing once
// avoids the extra rounding step of multiplying two parsed doubles.
double parse_nm_to_m(const std::string& name, const std::string& key,
                     std::string_view value, std::size_t line_no) {
  parse_positive(name, key, value, line_no);
  std::string shifted;
  const std::size_t e = value.find_first_of("eE");
  if (e == std::string_view::npos) {
    shifted = std::string(value) + "e-9";
  } else {
    const auto exp = try_parse_int(value.substr(e + 1));
    if (!exp) bad_value(name, key, value, line_no);
    shifted = std::string(value.substr(0, e)) + "e" + std::to_string(*exp - 9);
  }
  const auto v = try_parse_double(shifted);
  if (!v || !(*v > 0.0)) bad_value(name, key, value, line_no);
  return *v;
}

long long parse_int_min(const std::string& name, const std::string& key,
                        std::string_view value, std::size_t line_no, long long min) {
  const auto v = try_parse_int(value);
  if (!v || *v < min) bad_value(name, key, value, line_no);
  return *v;
}

bool parse_bool(const std::string& name, const std::string& key, std::string_view value,
                std::size_t line_no) {
  if (value == "true") return true;
  if (value == "false") return false;
  bad_value(name, key, value, line_no);
}

std::vector<int> parse_bit_list(const std::string& name, const std::string& key,
                                std::string_view value, std::size_t line_no) {
  std::vector<int> bits;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t comma = value.find(',', start);
    if (comma == std::string_view::npos) comma = value.size();
    const auto token = trim(value.substr(start, comma - start));
    const auto v = try_parse_int(token);
    if (!v) bad_value(name, key, value, line_no);
    bits.push_back(static_cast<int>(*v));
    start = comma + 1;
    if (comma == value.size()) break;
  }
  if (bits.empty()) bad_value(name, key, value, line_no);
  return bits;
}

void apply_key(RunConfig& cfg, const std::string& key, std::string_view value,
               const std::string& name, std::size_t line_no) {
  if (key == "optics.wavelength_nm") {
    cfg.setup.wavelength_m = parse_nm_to_m(name, key, value, line_no);
  } else if (key == "optics.wavefront_radius_m") {
    cfg.setup.wavefront_radius_m = parse_positive(name, key, value, line_no);
  } else if (key == "optics.pixel_pitch_nm") {
    cfg.setup.pixel_pitch_m = parse_nm_to_m(name, key, value, line_no);
  } else if (key == "optics.pixel_count") {
    cfg.setup.pixel_count = static_cast<int>(parse_int_min(name, key, value, line_no, 1));
  } else if (key == "grid.train") {
    try {
      cfg.train_grid = ThicknessGrid::parse(std::string(value));
    } catch (const validation_error&) {
      bad_value(name, key, value, line_no);
    }
  } else if (key == "grid.test") {
    try {
      cfg.test_grid = ThicknessGrid::parse(std::string(value));
    } catch (const validation_error&) {
      bad_value(name, key, value, line_no);
    }
  } else if (key == "detector.bit_depth") {
    cfg.detector_bits = {static_cast<int>(parse_int_min(name, key, value, line_no, 1))};
  } else if (key == "run.detectors") {
    cfg.detector_bits = parse_bit_list(name, key, value, line_no);
  } else if (key == "noise.seed") {
    const auto v = try_parse_uint(value);
    if (!v) bad_value(name, key, value, line_no);
    cfg.noise_seed = *v;
  } else if (key == "noise.clamp") {
    cfg.clamp = parse_bool(name, key, value, line_no);
  } else if (key == "dataset.downsample") {
    try {
      cfg.downsample = parse_downsample_mode(std::string(value));
    } catch (const validation_error&) {
      bad_value(name, key, value, line_no);
    }
  } else if (key == "dataset.realizations") {
    cfg.realizations = static_cast<int>(parse_int_min(name, key, value, line_no, 1));
  } else if (key == "train.learning_rate") {
    cfg.train.learning_rate = parse_positive(name, key, value, line_no);
  } else if (key == "train.max_epochs") {
    cfg.train.max_epochs = static_cast<int>(parse_int_min(name, key, value, line_no, 1));
  } else if (key == "train.target_mse") {
    cfg.train.target_mse = parse_positive(name, key, value, line_no);
  } else if (key == "train.seed") {
    const auto v = try_parse_uint(value);
    if (!v) bad_value(name, key, value, line_no);
    cfg.train.seed = *v;
  } else if (key == "train.shuffle") {
    cfg.train.shuffle = parse_bool(name, key, value, line_no);
  } else if (key == "train.init_seed") {
    const auto v = try_parse_uint(value);
    if (!v) bad_value(name, key, value, line_no);
    cfg.init_seed = *v;
  } else if (key == "eval.reference_rms_nm") {
    cfg.reference_rms_nm = parse_positive(name, key, value, line_no);
  } else if (key == "out.dir") {
    if (value.empty()) bad_value(name, key, value, line_no);
    cfg.out_dir = std::string(value);
  } else {
    throw parse_error(name + ": unknown key '" + key + "'", line_no, 1);
  }
}

}  // namespace

RunConfig parse_config_text(std::string_view text, RunConfig base, const std::string& name) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = line;
    const std::size_t hash = body.find('#');
    if (hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos)
      throw parse_error(name + ": expected 'key = value'", line_no, 1);
    const std::string key{trim(body.substr(0, eq))};
    const std::string_view value = trim(body.substr(eq + 1));
    if (key.empty())
      throw parse_error(name + ": empty key", line_no, 1);
    apply_key(base, key, value, name, line_no);
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), std::move(base), path.string());
}

void override_all_seeds(RunConfig& config, std::uint64_t seed) {
  config.noise_seed = seed;
  config.train.seed = seed;
  config.init_seed = seed;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("FRINGE_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const auto v = try_parse_uint(raw);
  if (!v)
    throw validation_error("FRINGE_SEED is set to '" + std::string(raw) +
                           "', expected an unsigned integer");
  return *v;
}

}  // namespace fringe
