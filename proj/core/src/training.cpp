#include "emonet/training.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace emonet {

namespace {

constexpr double kDivergenceCap = 1e6;

std::size_t argmax_of(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

void check_one_hot(std::span<const double> target) {
  std::size_t ones = 0;
  for (double t : target) {
    if (t == 1.0) {
      ++ones;
    } else if (t != 0.0) {
      throw std::invalid_argument("target must be one-hot (entries 0 or 1)");
    }
  }
  if (ones != 1) {
    throw std::invalid_argument("target must have exactly one 1, got " +
                                std::to_string(ones));
  }
}

}  // namespace

void HyperParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("lambda must be in [0, 1)");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (hidden_sizes.empty() || hidden_sizes.size() > 2) {
    throw std::invalid_argument("hidden_sizes must have 1 or 2 entries");
  }
  for (std::size_t h : hidden_sizes) {
    if (h == 0) throw std::invalid_argument("hidden layer size must be >= 1");
  }
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience == 0) throw std::invalid_argument("patience must be >= 1");
  if (weight_clip && !(*weight_clip > 0.0)) {
    throw std::invalid_argument("weight_clip must be positive");
  }
}

TrainingState TrainingState::from(Network net) {
  net.validate();
  TrainingState state;
  state.previous_deltas.reserve(net.weights.size());
  for (const Matrix& w : net.weights) {
    state.previous_deltas.emplace_back(w.rows(), w.cols());
  }
  state.net = std::move(net);
  return state;
}

double error(std::span<const double> targets, std::span<const double> outputs) {
  if (targets.size() != outputs.size()) {
    throw std::invalid_argument("error(): target length " +
                                std::to_string(targets.size()) +
                                " != output length " +
                                std::to_string(outputs.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double r = targets[k] - outputs[k];
    sum += r * r;
  }
  return 0.5 * sum;
}

std::vector<Matrix> error_gradient(const Network& net,
                                   std::span<const double> input,
                                   std::span<const double> target) {
  if (target.size() != net.output_size) {
    throw std::invalid_argument("target length " + std::to_string(target.size()) +
                                " does not match network output size " +
                                std::to_string(net.output_size));
  }
  const auto activations = forward(net, input);
  const std::size_t layers = net.weights.size();

  std::vector<Matrix> grads;
  grads.reserve(layers);
  for (const Matrix& w : net.weights) grads.emplace_back(w.rows(), w.cols());

  // deltas[l][k] = dE/d(net input of node k in layer l), output layer first.
  const auto& output = activations.back();
  std::vector<double> delta(net.output_size);
  for (std::size_t k = 0; k < net.output_size; ++k) {
    delta[k] = -(target[k] - output[k]) *
               sigmoid_derivative(output[k], net.sigma);
  }

  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = net.weights[l];
    Matrix& g = grads[l];
    const std::vector<double>* below =
        l == 0 ? nullptr : &activations[l - 1];
    for (std::size_t k = 0; k < w.cols(); ++k) {
      for (std::size_t i = 0; i + 1 < w.rows(); ++i) {
        const double a = below ? (*below)[i] : input[i];
        g(i, k) = delta[k] * a;
      }
      g(w.rows() - 1, k) = delta[k];  // bias input is 1
    }
    if (l > 0) {
      const auto& act = activations[l - 1];
      std::vector<double> next(act.size());
      for (std::size_t j = 0; j < act.size(); ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < w.cols(); ++k) sum += delta[k] * w(j, k);
        next[j] = sigmoid_derivative(act[j], net.sigma) * sum;
      }
      delta = std::move(next);
    }
  }
  return grads;
}

void backprop_step(TrainingState& state, std::span<const double> input,
                   std::span<const double> target, const HyperParams& hp) {
  check_one_hot(target);
  if (state.previous_deltas.size() != state.net.weights.size()) {
    throw std::invalid_argument("previous_deltas do not match weight shapes");
  }
  for (std::size_t l = 0; l < state.net.weights.size(); ++l) {
    if (!state.previous_deltas[l].same_shape(state.net.weights[l])) {
      throw std::invalid_argument("previous_deltas do not match weight shapes");
    }
  }

  const auto grads = error_gradient(state.net, input, target);
  for (std::size_t l = 0; l < grads.size(); ++l) {
    Matrix& w = state.net.weights[l];
    Matrix& prev = state.previous_deltas[l];
    const Matrix& g = grads[l];
    for (std::size_t i = 0; i < w.data().size(); ++i) {
      const double dw = -hp.alpha * g.data()[i] + hp.lambda * prev.data()[i];
      w.data()[i] += dw;
      prev.data()[i] = dw;
    }
    if (hp.weight_clip) {
      const double cap = *hp.weight_clip;
      for (double& v : w.data()) v = std::clamp(v, -cap, cap);
    }
  }
}

double dataset_accuracy(const Network& net,
                        const std::vector<TrainingPair>& data) {
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  std::size_t hits = 0;
  for (const auto& [x, t] : data) {
    const auto activations = forward(net, x);
    if (argmax_of(activations.back()) == argmax_of(t)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainResult train(const std::vector<TrainingPair>& data, const HyperParams& hp,
                  std::optional<Network> start) {
  hp.validate();
  if (data.empty()) throw std::invalid_argument("training dataset is empty");
  const std::size_t n_in = data.front().first.size();
  const std::size_t n_out = data.front().second.size();

  Network net;
  if (start) {
    net = std::move(*start);
    net.validate();
    if (net.input_size != n_in || net.output_size != n_out) {
      throw std::invalid_argument("starting network shape does not match data");
    }
  } else {
    net = Network::create(n_in, hp.hidden_sizes, n_out, hp.sigma);
    init_weights(net, -0.5, 0.5, 1e6, hp.seed);
  }

  TrainingState state = TrainingState::from(std::move(net));
  TrainResult result;
  result.net = state.net;  // in case accuracy never improves past 0

  bool have_snapshot = false;
  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    state.epoch = epoch;
    for (const auto& [x, t] : data) {
      backprop_step(state, x, t, hp);
      ++result.pattern_updates;
    }

    // Epoch bookkeeping: accuracy plus the divergence guard.
    std::size_t hits = 0;
    for (const auto& [x, t] : data) {
      const auto activations = forward(state.net, x);
      const auto& y = activations.back();
      const double e = error(t, y);
      if (!std::isfinite(e) || e > kDivergenceCap) {
        throw DivergenceError(epoch, "training diverged at epoch " +
                                         std::to_string(epoch) +
                                         " (pattern error " +
                                         std::to_string(e) + ")");
      }
      if (argmax_of(y) == argmax_of(t)) ++hits;
    }
    const double accuracy =
        static_cast<double>(hits) / static_cast<double>(data.size());
    result.accuracy_trace.push_back(accuracy);
    result.epochs_run = epoch;

    if (!have_snapshot || accuracy > state.best_accuracy) {
      state.best_accuracy = accuracy;
      state.epochs_since_improvement = 0;
      result.net = state.net;
      result.best_accuracy = accuracy;
      have_snapshot = true;
    } else {
      ++state.epochs_since_improvement;
      if (state.epochs_since_improvement >= hp.patience) break;
    }
  }
  return result;
}

}  // namespace emonet
