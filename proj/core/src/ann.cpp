#include "fringe/ann.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fringe/errors.hpp"
#include "fringe/numio.hpp"

namespace fringe {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

MlpNetwork::MlpNetwork(std::vector<int> layer_sizes)
    : layer_sizes_(std::move(layer_sizes)) {
  if (layer_sizes_.size() < 2)
    throw validation_error("network: need at least an input and an output layer");
  for (int s : layer_sizes_)
    if (s < 1) throw validation_error("network: layer sizes must be positive");
  weights_.resize(layer_sizes_.size() - 1);
  biases_.resize(layer_sizes_.size() - 1);
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    weights_[l].assign(static_cast<std::size_t>(layer_sizes_[l + 1]) *
                           static_cast<std::size_t>(layer_sizes_[l]),
                       0.0);
    biases_[l].assign(static_cast<std::size_t>(layer_sizes_[l + 1]), 0.0);
  }
}

MlpNetwork MlpNetwork::random_init(const std::vector<int>& layer_sizes,
                                   std::uint64_t seed) {
  MlpNetwork net(layer_sizes);
  RngState rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const double scale = std::sqrt(1.0 / layer_sizes[l]);
    for (double& w : net.weights_[l]) w = (2.0 * rng.uniform01() - 1.0) * scale;
  }
  return net;
}

namespace {

void affine_sigmoid(const std::vector<double>& weights, const std::vector<double>& biases,
                    const std::vector<double>& in, std::vector<double>& out) {
  const std::size_t n_out = biases.size();
  const std::size_t n_in = in.size();
  out.resize(n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    double z = biases[o];
    const double* row = weights.data() + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) z += row[i] * in[i];
    out[o] = sigmoid(z);
  }
}

// Activations for every layer; act[0] is the input copy.
void forward_trace(const MlpNetwork& net, std::span<const double> input,
                   std::vector<std::vector<double>>& act) {
  act.resize(net.layer_sizes().size());
  act[0].assign(input.begin(), input.end());
  for (int l = 0; l < net.layer_count(); ++l)
    affine_sigmoid(net.weights()[static_cast<std::size_t>(l)],
                   net.biases()[static_cast<std::size_t>(l)],
                   act[static_cast<std::size_t>(l)], act[static_cast<std::size_t>(l) + 1]);
}

// dLoss/dz for every layer, given the forward activations and the target.
void backward_deltas(const MlpNetwork& net, const std::vector<std::vector<double>>& act,
                     std::span<const double> target,
                     std::vector<std::vector<double>>& delta) {
  const int layers = net.layer_count();
  delta.resize(static_cast<std::size_t>(layers));
  const std::vector<double>& out = act.back();
  const double inv_n = 1.0 / static_cast<double>(out.size());
  delta[static_cast<std::size_t>(layers - 1)].resize(out.size());
  for (std::size_t o = 0; o < out.size(); ++o) {
    const double a = out[o];
    delta[static_cast<std::size_t>(layers - 1)][o] =
        2.0 * inv_n * (a - target[o]) * a * (1.0 - a);
  }
  for (int l = layers - 2; l >= 0; --l) {
    const std::vector<double>& w_next = net.weights()[static_cast<std::size_t>(l) + 1];
    const std::vector<double>& d_next = delta[static_cast<std::size_t>(l) + 1];
    const std::vector<double>& a_here = act[static_cast<std::size_t>(l) + 1];
    std::vector<double>& d_here = delta[static_cast<std::size_t>(l)];
    const std::size_t n_here = a_here.size();
    d_here.assign(n_here, 0.0);
    for (std::size_t o = 0; o < d_next.size(); ++o) {
      const double d = d_next[o];
      const double* row = w_next.data() + o * n_here;
      for (std::size_t i = 0; i < n_here; ++i) d_here[i] += row[i] * d;
    }
    for (std::size_t i = 0; i < n_here; ++i) d_here[i] *= a_here[i] * (1.0 - a_here[i]);
  }
}

void check_input_arity(const MlpNetwork& net, std::size_t got) {
  if (got != static_cast<std::size_t>(net.input_size()))
    throw validation_error("network: input has " + std::to_string(got) +
                           " entries, expected " + std::to_string(net.input_size()));
}

}  // namespace

std::vector<double> MlpNetwork::forward(std::span<const double> input) const {
  check_input_arity(*this, input.size());
  std::vector<double> current(input.begin(), input.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    affine_sigmoid(weights_[l], biases_[l], current, next);
    current.swap(next);
  }
  return current;
}

ClassCode ClassCode::for_class(const ThicknessGrid& grid, int class_index) {
  if (class_index < 0 || class_index >= grid.count)
    throw validation_error("class code: index " + std::to_string(class_index) +
                           " outside grid of " + std::to_string(grid.count) + " classes");
  ClassCode code;
  code.class_index = class_index;
  code.thickness_nm = grid.thickness_nm(class_index);
  code.one_hot.assign(static_cast<std::size_t>(grid.count), 0.0);
  code.one_hot[static_cast<std::size_t>(class_index)] = 1.0;
  return code;
}

double mse_loss(std::span<const double> outputs, std::span<const double> target) {
  if (outputs.size() != target.size() || outputs.empty())
    throw validation_error("mse_loss: arity mismatch (" + std::to_string(outputs.size()) +
                           " vs " + std::to_string(target.size()) + ")");
  double sum = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double d = outputs[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(outputs.size());
}

ParamGradients gradient(const MlpNetwork& net, std::span<const double> input,
                        const ClassCode& target) {
  check_input_arity(net, input.size());
  if (target.one_hot.size() != static_cast<std::size_t>(net.output_size()))
    throw validation_error("gradient: target has " + std::to_string(target.one_hot.size()) +
                           " classes, network outputs " + std::to_string(net.output_size()));

  std::vector<std::vector<double>> act, delta;
  forward_trace(net, input, act);
  backward_deltas(net, act, target.one_hot, delta);

  ParamGradients grads;
  grads.weights.resize(delta.size());
  grads.biases.resize(delta.size());
  for (std::size_t l = 0; l < delta.size(); ++l) {
    const std::vector<double>& a_in = act[l];
    const std::vector<double>& d = delta[l];
    grads.biases[l] = d;
    grads.weights[l].resize(d.size() * a_in.size());
    for (std::size_t o = 0; o < d.size(); ++o)
      for (std::size_t i = 0; i < a_in.size(); ++i)
        grads.weights[l][o * a_in.size() + i] = d[o] * a_in[i];
  }
  return grads;
}

namespace {

struct LabeledSample {
  const DatasetRecord* record;
  std::vector<double> target;
};

// Classes are the sorted distinct thicknesses of the set.
std::vector<double> distinct_thicknesses(const Dataset& set) {
  std::vector<double> v;
  v.reserve(set.records.size());
  for (const DatasetRecord& r : set.records) v.push_back(r.thickness_nm);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(),
                      [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
          v.end());
  return v;
}

}  // namespace

TrainResult train(MlpNetwork net, const Dataset& train_set, const TrainConfig& config) {
  if (train_set.kind != DatasetKind::train)
    throw validation_error("train: dataset kind must be train");
  if (train_set.provenance.noisy && !config.allow_noisy)
    throw validation_error("train: refusing noisy training data (set allow_noisy to override)");
  if (train_set.records.empty())
    throw validation_error("train: empty training set");
  if (!(config.learning_rate > 0.0))
    throw validation_error("train: learning rate must be positive");
  if (!(config.target_mse > 0.0))
    throw validation_error("train: target MSE must be positive");
  if (config.max_epochs < 1)
    throw validation_error("train: max_epochs must be at least 1");

  const std::vector<double> classes = distinct_thicknesses(train_set);
  if (classes.size() != static_cast<std::size_t>(net.output_size()))
    throw validation_error("train: set has " + std::to_string(classes.size()) +
                           " classes, network outputs " + std::to_string(net.output_size()));

  std::vector<LabeledSample> samples;
  samples.reserve(train_set.records.size());
  for (const DatasetRecord& rec : train_set.records) {
    check_input_arity(net, rec.features.size());
    const auto it = std::lower_bound(classes.begin(), classes.end(), rec.thickness_nm - 1e-9);
    const std::size_t cls = static_cast<std::size_t>(it - classes.begin());
    std::vector<double> target(classes.size(), 0.0);
    target[cls] = 1.0;
    samples.push_back({&rec, std::move(target)});
  }

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RngState shuffle_rng(config.seed);

  std::vector<std::vector<double>> act, delta;
  TrainResult result{std::move(net), {}};
  result.epoch_mse.reserve(64);

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    if (config.shuffle) {
      // Fisher-Yates with our own bounded draw keeps the order seed-exact.
      for (std::size_t i = order.size() - 1; i > 0; --i) {
        const std::size_t j = shuffle_rng.bounded(i + 1);
        std::swap(order[i], order[j]);
      }
    }

    for (std::size_t idx : order) {
      const LabeledSample& s = samples[idx];
      forward_trace(result.net, s.record->features, act);
      backward_deltas(result.net, act, s.target, delta);
      for (std::size_t l = 0; l < delta.size(); ++l) {
        const std::vector<double>& a_in = act[l];
        const std::vector<double>& d = delta[l];
        std::vector<double>& w = result.net.weights()[l];
        std::vector<double>& b = result.net.biases()[l];
        for (std::size_t o = 0; o < d.size(); ++o) {
          const double step = config.learning_rate * d[o];
          double* row = w.data() + o * a_in.size();
          for (std::size_t i = 0; i < a_in.size(); ++i) row[i] -= step * a_in[i];
          b[o] -= step;
        }
      }
    }

    double epoch_loss = 0.0;
    for (const LabeledSample& s : samples) {
      const std::vector<double> out = result.net.forward(s.record->features);
      epoch_loss += mse_loss(out, s.target);
    }
    epoch_loss /= static_cast<double>(samples.size());
    result.epoch_mse.push_back(epoch_loss);
    if (epoch_loss <= config.target_mse) break;
  }
  return result;
}

double decode_argmax(std::span<const double> outputs, const ThicknessGrid& grid) {
  if (outputs.size() != static_cast<std::size_t>(grid.count))
    throw validation_error("decode_argmax: " + std::to_string(outputs.size()) +
                           " outputs vs grid of " + std::to_string(grid.count));
  std::size_t best = 0;
  for (std::size_t j = 1; j < outputs.size(); ++j)
    if (outputs[j] > outputs[best]) best = j;
  return grid.thickness_nm(static_cast<int>(best));
}

double decode_expectation(std::span<const double> outputs, const ThicknessGrid& grid) {
  if (outputs.size() != static_cast<std::size_t>(grid.count))
    throw validation_error("decode_expectation: " + std::to_string(outputs.size()) +
                           " outputs vs grid of " + std::to_string(grid.count));
  double mass = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < outputs.size(); ++j) {
    mass += outputs[j];
    weighted += outputs[j] * grid.thickness_nm(static_cast<int>(j));
  }
  if (!(mass > 0.0))
    throw validation_error("decode_expectation: degenerate all-nonpositive outputs");
  return weighted / mass;
}

void save_model(const MlpNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out << "MLPFRINGE 1\n";
  const std::vector<int>& sizes = net.layer_sizes();
  for (std::size_t i = 0; i < sizes.size(); ++i)
    out << (i ? " " : "") << sizes[i];
  out << "\n";
  for (int l = 0; l < net.layer_count(); ++l) {
    const std::vector<double>& b = net.biases()[static_cast<std::size_t>(l)];
    const std::vector<double>& w = net.weights()[static_cast<std::size_t>(l)];
    const std::size_t n_in = static_cast<std::size_t>(sizes[static_cast<std::size_t>(l)]);
    for (std::size_t o = 0; o < b.size(); ++o)
      out << (o ? " " : "") << format_double(b[o], 17);
    out << "\n";
    for (std::size_t o = 0; o < b.size(); ++o) {
      for (std::size_t i = 0; i < n_in; ++i)
        out << (i ? " " : "") << format_double(w[o * n_in + i], 17);
      out << "\n";
    }
  }
  if (!out) throw io_error("write failed for '" + path.string() + "'");
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size()) break;
    std::size_t end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

class ModelReader {
 public:
  ModelReader(std::ifstream& in, std::string name) : in_(in), name_(std::move(name)) {}

  std::string next_line() {
    std::string line;
    if (!std::getline(in_, line))
      throw parse_error("model '" + name_ + "': unexpected end of file", line_no_ + 1, 1);
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  // Exactly n doubles separated by single spaces.
  void read_doubles(std::size_t n, double* dst) {
    const std::string line = next_line();
    const auto tokens = split_spaces(line);
    if (tokens.size() != n)
      throw parse_error("model '" + name_ + "': expected " + std::to_string(n) +
                            " values, got " + std::to_string(tokens.size()),
                        line_no_, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = try_parse_double(tokens[i]);
      if (!v)
        throw parse_error("model '" + name_ + "': bad value '" + std::string(tokens[i]) + "'",
                          line_no_, static_cast<std::size_t>(tokens[i].data() - line.data()) + 1);
      dst[i] = *v;
    }
  }

  std::size_t line_no() const { return line_no_; }
  bool at_clean_end() {
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return false;
    }
    return true;
  }

 private:
  std::ifstream& in_;
  std::string name_;
  std::size_t line_no_ = 0;
};

}  // namespace

MlpNetwork load_model(const std::filesystem::path& path,
                      std::span<const int> expected_layer_sizes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  ModelReader reader(in, path.string());

  if (reader.next_line() != "MLPFRINGE 1")
    throw parse_error("model '" + path.string() + "': bad magic, expected 'MLPFRINGE 1'", 1, 1);

  const std::string sizes_line = reader.next_line();
  std::vector<int> sizes;
  for (const auto token : split_spaces(sizes_line)) {
    const auto v = try_parse_int(token);
    if (!v || *v < 1)
      throw parse_error("model '" + path.string() + "': bad layer size '" +
                            std::string(token) + "'",
                        reader.line_no(), 1);
    sizes.push_back(static_cast<int>(*v));
  }
  if (sizes.size() < 2)
    throw parse_error("model '" + path.string() + "': need at least two layer sizes",
                      reader.line_no(), 1);

  if (!expected_layer_sizes.empty() &&
      !std::equal(sizes.begin(), sizes.end(), expected_layer_sizes.begin(),
                  expected_layer_sizes.end())) {
    auto join = [](auto first, auto last) {
      std::string s;
      for (auto it = first; it != last; ++it) s += (it == first ? "" : " ") + std::to_string(*it);
      return s;
    };
    throw validation_error("model '" + path.string() + "': layer sizes [" +
                           join(sizes.begin(), sizes.end()) + "] do not match expected [" +
                           join(expected_layer_sizes.begin(), expected_layer_sizes.end()) + "]");
  }

  MlpNetwork net(sizes);
  for (int l = 0; l < net.layer_count(); ++l) {
    std::vector<double>& b = net.biases()[static_cast<std::size_t>(l)];
    std::vector<double>& w = net.weights()[static_cast<std::size_t>(l)];
    const std::size_t n_in = static_cast<std::size_t>(sizes[static_cast<std::size_t>(l)]);
    reader.read_doubles(b.size(), b.data());
    for (std::size_t o = 0; o < b.size(); ++o)
      reader.read_doubles(n_in, w.data() + o * n_in);
  }
  if (!reader.at_clean_end())
    throw parse_error("model '" + path.string() + "': trailing content after parameters",
                      reader.line_no() + 1, 1);
  return net;
}

}  // namespace fringe
