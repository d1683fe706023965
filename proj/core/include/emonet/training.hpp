#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "emonet/dataset.hpp"
#include "emonet/network.hpp"

namespace emonet {

/// Knobs of one training run. alpha is the learning rate, lambda the momentum
/// fraction carried over from the previous weight change, sigma the shared
/// activation steepness.
struct HyperParams {
  double alpha = 0.5;
  double lambda = 0.0;
  double sigma = 1.0;
  std::vector<std::size_t> hidden_sizes{10};  // 1 or 2 layers
  std::size_t max_epochs = 1000;
  std::size_t patience = 20;  // epochs without accuracy improvement before stopping
  std::optional<double> weight_clip;  // cap |w| during training; off by default
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// Thrown when training blows up (non-finite loss or a per-pattern error
/// beyond any plausible value). Carries the epoch it happened in.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Mutable state threaded through per-pattern updates. previous_deltas hold
/// the last weight change of every matrix for the momentum term.
struct TrainingState {
  Network net;
  std::vector<Matrix> previous_deltas;
  std::size_t epoch = 0;
  double best_accuracy = 0.0;
  std::size_t epochs_since_improvement = 0;

  static TrainingState from(Network net);
};

/// Sum-of-squares error E = 1/2 * sum((t_k - y_k)^2).
double error(std::span<const double> targets, std::span<const double> outputs);

/// Analytic dE/dw for a single pattern, one matrix per layer boundary,
/// shaped like net.weights. Pure; does not touch the network.
std::vector<Matrix> error_gradient(const Network& net,
                                   std::span<const double> input,
                                   std::span<const double> target);

/// One stochastic update: delta_w = -alpha * dE/dw + lambda * previous delta,
/// applied immediately. The target must be one-hot.
void backprop_step(TrainingState& state, std::span<const double> input,
                   std::span<const double> target, const HyperParams& hp);

/// Fraction of patterns whose argmax output matches the argmax target.
double dataset_accuracy(const Network& net,
                        const std::vector<TrainingPair>& data);

struct TrainResult {
  Network net;                         // weights of the best-accuracy epoch
  std::vector<double> accuracy_trace;  // training accuracy after each epoch
  double best_accuracy = 0.0;
  std::size_t epochs_run = 0;
  std::size_t pattern_updates = 0;  // total per-pattern updates performed
};

/// Runs epochs of per-pattern momentum backprop in dataset order. Stops at
/// max_epochs or after `patience` epochs without strict accuracy improvement
/// and returns the best-epoch snapshot. When `start` is given its weights are
/// the starting point (shape must match the data and hp); otherwise a fresh
/// network is initialized with uniform weights in [-0.5, 0.5] from hp.seed.
TrainResult train(const std::vector<TrainingPair>& data, const HyperParams& hp,
                  std::optional<Network> start = std::nullopt);

}  // namespace emonet
