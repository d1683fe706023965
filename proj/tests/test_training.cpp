#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "emonet/training.hpp"

using namespace emonet;

namespace {

std::vector<TrainingPair> xor_patterns() {
  return {
      {{0.0, 0.0}, {1.0, 0.0}},
      {{0.0, 1.0}, {0.0, 1.0}},
      {{1.0, 0.0}, {0.0, 1.0}},
      {{1.0, 1.0}, {1.0, 0.0}},
  };
}

Network random_net(std::size_t in, std::vector<std::size_t> hidden,
                   std::size_t out, double sigma, std::uint64_t seed) {
  Network net = Network::create(in, std::move(hidden), out, sigma);
  init_weights(net, -0.5, 0.5, 10.0, seed);
  return net;
}

double pattern_error(const Network& net, const TrainingPair& p) {
  return error(p.second, forward(net, p.first).back());
}

/// Central finite difference of the per-pattern error wrt one weight.
double fd_gradient(Network net, const TrainingPair& p, std::size_t layer,
                   std::size_t r, std::size_t c, double h = 1e-6) {
  const double saved = net.weights[layer](r, c);
  net.weights[layer](r, c) = saved + h;
  const double plus = pattern_error(net, p);
  net.weights[layer](r, c) = saved - h;
  const double minus = pattern_error(net, p);
  return (plus - minus) / (2.0 * h);
}

}  // namespace

TEST_CASE("error is zero iff outputs equal targets") {
  std::vector<double> t{0.3, 0.7, 0.1};
  CHECK(error(t, t) == 0.0);
  std::vector<double> y{0.3, 0.7, 0.11};
  CHECK(error(t, y) > 0.0);
}

TEST_CASE("error matches the worked half-sum") {
  std::vector<double> t{1.0, 0.0};
  std::vector<double> y{0.5, 0.5};
  CHECK(error(t, y) == doctest::Approx(0.25));
}

TEST_CASE("error agrees with a naive summation oracle on random vectors") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> t(7), y(7);
    for (double& v : t) v = dist(rng);
    for (double& v : y) v = dist(rng);
    double expected = 0.0;
    for (std::size_t k = 0; k < 7; ++k) {
      expected += (t[k] - y[k]) * (t[k] - y[k]);
    }
    expected *= 0.5;
    CHECK(std::abs(error(t, y) - expected) < 1e-12);
  }
}

TEST_CASE("error is symmetric in the sign of residuals") {
  std::vector<double> t{0.5, 0.5};
  std::vector<double> above{0.7, 0.9};
  std::vector<double> below{0.3, 0.1};
  CHECK(error(t, above) == doctest::Approx(error(t, below)));
}

TEST_CASE("error rejects mismatched lengths") {
  std::vector<double> t{1.0, 0.0};
  std::vector<double> y{1.0};
  CHECK_THROWS_AS(error(t, y), std::invalid_argument);
}

TEST_CASE("backprop_step reproduces the hand-computed perceptron update") {
  // Single perceptron, w = 0, bias = 0, input (1), target (1), sigma = 1,
  // alpha = 1, no momentum: y = 0.5, delta = (1 - 0.5) * 0.25 = 0.125,
  // so the new input weight is 0.125 (and so is the bias weight).
  Network net = Network::create(1, {}, 1, 1.0);
  TrainingState state = TrainingState::from(net);
  HyperParams hp;
  hp.alpha = 1.0;
  hp.lambda = 0.0;
  hp.sigma = 1.0;
  backprop_step(state, std::vector<double>{1.0}, std::vector<double>{1.0}, hp);
  CHECK(state.net.weights[0](0, 0) == doctest::Approx(0.125));
  CHECK(state.net.weights[0](1, 0) == doctest::Approx(0.125));
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  int checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const bool deep = trial % 2 == 1;
    Network net = random_net(4, deep ? std::vector<std::size_t>{5, 3}
                                     : std::vector<std::size_t>{5},
                             3, 1.2, 100 + trial);
    TrainingPair p;
    p.first.resize(4);
    for (double& v : p.first) v = dist(rng);
    p.second.assign(3, 0.0);
    p.second[trial % 3] = 1.0;

    const auto grads = error_gradient(net, p.first, p.second);
    for (std::size_t l = 0; l < grads.size(); ++l) {
      for (std::size_t r = 0; r < grads[l].rows(); ++r) {
        for (std::size_t c = 0; c < grads[l].cols(); ++c) {
          const double analytic = grads[l](r, c);
          const double fd = fd_gradient(net, p, l, r, c);
          const double denom = std::max(std::abs(fd), 1e-4);
          CHECK(std::abs(analytic - fd) / denom < 1e-4);
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("momentum doubles down when the gradient repeats") {
  // Frozen-weight probe: apply one step, restore the weights but keep the
  // momentum buffer; the second delta must be (1 + lambda) times the first.
  Network net = random_net(3, {4}, 2, 1.0, 9);
  HyperParams hp;
  hp.alpha = 0.3;
  hp.lambda = 0.5;
  hp.sigma = 1.0;
  const std::vector<double> x{0.5, -0.4, 1.0};
  const std::vector<double> t{1.0, 0.0};

  TrainingState state = TrainingState::from(net);
  const auto w0 = state.net.weights;
  backprop_step(state, x, t, hp);
  const auto first_deltas = state.previous_deltas;

  state.net.weights = w0;  // same gradient next step
  backprop_step(state, x, t, hp);
  for (std::size_t l = 0; l < first_deltas.size(); ++l) {
    for (std::size_t i = 0; i < first_deltas[l].data().size(); ++i) {
      CHECK(state.previous_deltas[l].data()[i] ==
            doctest::Approx((1.0 + hp.lambda) * first_deltas[l].data()[i]));
    }
  }
}

TEST_CASE("a small plain-gradient step never increases the pattern error") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  HyperParams hp;
  hp.alpha = 1e-3;
  hp.lambda = 0.0;
  hp.sigma = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    Network net = random_net(4, trial % 2 ? std::vector<std::size_t>{4, 3}
                                          : std::vector<std::size_t>{6},
                             3, 1.0, 200 + trial);
    TrainingPair p;
    p.first.resize(4);
    for (double& v : p.first) v = dist(rng);
    p.second.assign(3, 0.0);
    p.second[trial % 3] = 1.0;

    const double before = pattern_error(net, p);
    TrainingState state = TrainingState::from(net);
    backprop_step(state, p.first, p.second, hp);
    CHECK(pattern_error(state.net, p) <= before);
  }
}

TEST_CASE("backprop_step rejects bad targets and shapes") {
  Network net = Network::create(2, {3}, 2, 1.0);
  TrainingState state = TrainingState::from(net);
  HyperParams hp;
  const std::vector<double> x{0.1, 0.2};
  CHECK_THROWS_AS(
      backprop_step(state, x, std::vector<double>{0.4, 0.6}, hp),
      std::invalid_argument);  // not one-hot
  CHECK_THROWS_AS(
      backprop_step(state, x, std::vector<double>{0.0, 0.0}, hp),
      std::invalid_argument);  // all-zero
  CHECK_THROWS_AS(
      backprop_step(state, std::vector<double>{0.1}, std::vector<double>{1.0, 0.0}, hp),
      std::invalid_argument);  // input shape
}

TEST_CASE("train overfits a single pattern") {
  std::vector<TrainingPair> data{{{0.4, -0.2, 0.9}, {0.0, 1.0}}};
  HyperParams hp;
  hp.alpha = 0.5;
  hp.hidden_sizes = {3};
  hp.max_epochs = 200;
  hp.patience = 200;
  const auto result = train(data, hp);
  CHECK(result.best_accuracy == 1.0);
}

TEST_CASE("train solves XOR with momentum") {
  HyperParams hp;
  hp.alpha = 0.5;
  hp.lambda = 0.5;
  hp.sigma = 1.0;
  hp.hidden_sizes = {4};
  hp.max_epochs = 10000;
  hp.patience = 10000;
  hp.seed = 1;
  const auto result = train(xor_patterns(), hp);
  CHECK(result.best_accuracy == 1.0);
}

TEST_CASE("train is deterministic given seed and data") {
  HyperParams hp;
  hp.alpha = 0.4;
  hp.lambda = 0.3;
  hp.hidden_sizes = {5};
  hp.max_epochs = 50;
  hp.patience = 50;
  hp.seed = 123;
  const auto a = train(xor_patterns(), hp);
  const auto b = train(xor_patterns(), hp);
  CHECK(a.accuracy_trace == b.accuracy_trace);
  CHECK(a.net.weights == b.net.weights);
}

TEST_CASE("train returns the best-epoch snapshot") {
  HyperParams hp;
  hp.alpha = 0.9;
  hp.lambda = 0.6;
  hp.hidden_sizes = {3};
  hp.max_epochs = 300;
  hp.patience = 300;
  hp.seed = 7;
  const auto result = train(xor_patterns(), hp);
  REQUIRE(!result.accuracy_trace.empty());
  CHECK(result.best_accuracy ==
        *std::max_element(result.accuracy_trace.begin(),
                          result.accuracy_trace.end()));
  CHECK(dataset_accuracy(result.net, xor_patterns()) ==
        doctest::Approx(result.best_accuracy));
  CHECK(result.best_accuracy >= result.accuracy_trace.back());
}

TEST_CASE("train stops after patience epochs without improvement") {
  HyperParams hp;
  hp.alpha = 1e-9;  // effectively frozen: accuracy cannot improve
  hp.hidden_sizes = {3};
  hp.max_epochs = 500;
  hp.patience = 5;
  hp.seed = 3;
  const auto result = train(xor_patterns(), hp);
  CHECK(result.epochs_run <= 1 + hp.patience);
}

TEST_CASE("train rejects an empty dataset") {
  HyperParams hp;
  CHECK_THROWS_AS(train({}, hp), std::invalid_argument);
}

TEST_CASE("train raises a divergence error naming the epoch") {
  Network net = Network::create(2, {3}, 2, 1.0);
  init_weights(net, -0.5, 0.5, 10.0, 4);
  net.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  HyperParams hp;
  hp.hidden_sizes = {3};
  hp.max_epochs = 10;
  try {
    train(xor_patterns(), hp, net);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() == 1);
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}

TEST_CASE("train accepts a warm-start network") {
  HyperParams hp;
  hp.alpha = 0.5;
  hp.lambda = 0.5;
  hp.hidden_sizes = {4};
  hp.max_epochs = 3000;
  hp.patience = 3000;
  hp.seed = 2;
  const auto first = train(xor_patterns(), hp);
  const auto resumed = train(xor_patterns(), hp, first.net);
  CHECK(resumed.best_accuracy >= first.best_accuracy);
}
