#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fringe/dataset.hpp"

namespace fringe {

// Canonical architecture: 40 profile samples in, two 64-node hidden layers,
// one sigmoid output node per training thickness class.
inline const std::vector<int> kCanonicalLayerSizes = {40, 64, 64, 20};

double sigmoid(double z);

// Fully connected feedforward network, sigmoid at every layer including the
// output. Weights are stored per layer as row-major out x in matrices.
class MlpNetwork {
 public:
  // Zero-initialized parameters.
  explicit MlpNetwork(std::vector<int> layer_sizes);

  // Weights uniform in +-sqrt(1/fan_in) drawn from the seed, biases zero.
  static MlpNetwork random_init(const std::vector<int>& layer_sizes, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int layer_count() const { return static_cast<int>(layer_sizes_.size()) - 1; }
  int input_size() const { return layer_sizes_.front(); }
  int output_size() const { return layer_sizes_.back(); }

  std::vector<double> forward(std::span<const double> input) const;

  std::vector<std::vector<double>>& weights() { return weights_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  std::vector<std::vector<double>>& biases() { return biases_; }
  const std::vector<std::vector<double>>& biases() const { return biases_; }

 private:
  std::vector<int> layer_sizes_;
  std::vector<std::vector<double>> weights_;  // [layer][out*in + in_index]
  std::vector<std::vector<double>> biases_;   // [layer][out]
};

// One-hot output code for a training class.
struct ClassCode {
  int class_index = 0;
  double thickness_nm = 0.0;
  std::vector<double> one_hot;

  static ClassCode for_class(const ThicknessGrid& grid, int class_index);
};

// Mean squared error between outputs and the one-hot target.
double mse_loss(std::span<const double> outputs, std::span<const double> target);

// Parameter-shaped gradients of mse_loss, same layout as MlpNetwork storage.
struct ParamGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

ParamGradients gradient(const MlpNetwork& net, std::span<const double> input,
                        const ClassCode& target);

struct TrainConfig {
  double learning_rate = 0.1;
  int max_epochs = 50000;
  double target_mse = 1e-3;
  std::uint64_t seed = 0;  // shuffle order
  bool shuffle = true;
  bool allow_noisy = false;
};

struct TrainResult {
  MlpNetwork net;
  std::vector<double> epoch_mse;  // mean set loss after each epoch
};

// Per-sample stochastic gradient descent with optional per-epoch shuffling.
// Classes are the sorted distinct thicknesses of the training set and must
// match the network's output size. Stops at mean epoch MSE <= target_mse or
// at max_epochs; non-convergence is reported through the history, not as an
// error.
TrainResult train(MlpNetwork net, const Dataset& train_set, const TrainConfig& config);

// Thickness of the strongest output node; ties break toward the lower index.
double decode_argmax(std::span<const double> outputs, const ThicknessGrid& grid);

// Output-weighted mean of class thicknesses; interpolates between classes.
double decode_expectation(std::span<const double> outputs, const ThicknessGrid& grid);

// Text format: magic line "MLPFRINGE 1", layer sizes, then per layer one bias
// line and one weights line per output node, 17 significant digits.
void save_model(const MlpNetwork& net, const std::filesystem::path& path);
MlpNetwork load_model(const std::filesystem::path& path,
                      std::span<const int> expected_layer_sizes = {});

}  // namespace fringe
