#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emonet/matrix.hpp"

namespace emonet {

/// Logistic activation 1 / (1 + exp(-sigma * x)). Saturates to 0/1 for large
/// |x| without overflowing. sigma must be positive.
double sigmoid(double x, double sigma);

/// Derivative of the logistic expressed through its output value y:
/// sigma * y * (1 - y). Zero at the saturated ends.
double sigmoid_derivative(double y, double sigma);

/// Fully connected feed-forward network. The bias is modelled as a constant
/// extra input of 1 per layer; its weights live in the last row of each
/// weight matrix, so every matrix is (fan_in + 1) x fan_out.
///
/// Emotion networks use 1 or 2 hidden layers; an empty hidden_sizes is also
/// accepted so a single perceptron (input wired straight to output) can be
/// expressed for tests and experiments.
struct Network {
  std::size_t input_size = 0;
  std::vector<std::size_t> hidden_sizes;  // 0, 1 or 2 entries
  std::size_t output_size = 0;
  std::vector<Matrix> weights;  // one matrix per layer boundary
  double sigma = 1.0;           // shared activation steepness

  /// Builds a network of the given shape with all weights zero.
  static Network create(std::size_t input, std::vector<std::size_t> hidden,
                        std::size_t output, double sigma);

  /// Sizes of every layer: input, hidden..., output.
  std::vector<std::size_t> layer_sizes() const;

  /// Total number of weights over all matrices, bias rows included.
  std::size_t weight_count() const;

  /// Throws std::invalid_argument if shapes or sigma are inconsistent.
  void validate() const;
};

/// Runs one forward pass. Returns the activation vector of every non-input
/// layer, so result.back() is the network output. Throws on an input whose
/// length differs from input_size.
std::vector<std::vector<double>> forward(const Network& net,
                                         std::span<const double> input);

/// Fills every weight with a uniform draw from [lo, hi], redrawing any value
/// whose magnitude exceeds threshold. Deterministic for a given seed.
/// Rejects ranges whose intersection with [-threshold, threshold] is empty.
void init_weights(Network& net, double lo, double hi, double threshold,
                  std::uint64_t seed);

/// Plain-text model file, value-exact round trip (17 significant digits).
void save_model(const Network& net, const std::string& path);
Network load_model(const std::string& path);

}  // namespace emonet
