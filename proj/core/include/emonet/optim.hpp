#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "emonet/network.hpp"
#include "emonet/training.hpp"

namespace emonet {

/// A deterministic scalar function of a fixed-dimension real vector.
struct Objective {
  std::size_t dimension = 0;
  std::function<double(std::span<const double>)> evaluate;
};

struct LineMinResult {
  double step = 0.0;   // t* along the direction; 0 when bracketing failed
  double value = 0.0;  // f(point + t* * direction), never above f(point)
  std::size_t evaluations = 0;
};

/// Minimizes t -> f(point + t * direction) by golden-section bracketing and
/// refinement. On bracketing failure (flat or unbounded descent budget spent)
/// returns step 0 with the original value.
LineMinResult line_minimize(const Objective& f, std::span<const double> point,
                            std::span<const double> direction,
                            double tol = 1e-8);

struct MinimizeResult {
  std::vector<double> minimizer;
  double value = 0.0;
  std::size_t iterations = 0;   // direction cycles (Powell) / steps (simplex)
  std::size_t evaluations = 0;  // objective evaluation count
  std::vector<std::pair<std::size_t, double>> trace;  // (evaluations, best)
};

struct PowellOptions {
  double ftol = 1e-8;
  std::size_t max_iters = 200;  // full cycles through the direction set
  double line_tol = 1e-8;
  /// Initial direction set; empty means the basis vectors. Must contain
  /// exactly N nonzero vectors of dimension N when given.
  std::vector<std::vector<double>> init_directions;
  /// Checked after each cycle with the current point/value/evaluations;
  /// returning true stops the minimization early.
  std::function<bool(std::span<const double>, double, std::size_t)> stop_early;
};

/// Powell's direction-set method: line-minimize along each direction, shift
/// the set, replace the last direction with the cycle's net displacement and
/// minimize along it; repeat until the fractional decrease of f over a cycle
/// drops below ftol. A zero replacement direction keeps the prior set.
MinimizeResult powell_minimize(const Objective& f, std::span<const double> start,
                               const PowellOptions& opts = {});

struct SimplexOptions {
  double edge = 1.0;    // offset of the N extra starting vertices
  double ftol = 1e-12;  // fractional spread of f over the simplex
  double xtol = 1e-9;   // simplex diameter cutoff
  std::size_t max_iters = 20000;
};

/// Downhill simplex (Nelder-Mead) with the standard reflection/expansion/
/// contraction/shrink coefficients 1, 2, 0.5, 0.5. Works for any dimension.
MinimizeResult simplex_minimize(const Objective& f,
                                std::span<const double> start,
                                const SimplexOptions& opts = {});

/// Weight vector layout: matrices in layer order, each row-major, so the
/// bias row of every matrix comes last within its block.
std::vector<double> flatten_weights(const Network& net);
std::vector<std::pair<std::size_t, std::size_t>> weight_shapes(const Network& net);
std::vector<Matrix> unflatten_weights(
    std::span<const double> values,
    const std::vector<std::pair<std::size_t, std::size_t>>& shapes);

struct PowellTrainOptions {
  bool random_directions = false;  // small random vectors instead of the basis
  double direction_scale = 0.01;
  double ftol = 1e-8;
  std::size_t max_cycles = 200;
  double line_tol = 1e-8;
  std::optional<double> accuracy_target;  // stop once reached (per cycle)
  std::optional<Network> start;           // warm start, e.g. backprop weights
};

struct PowellTrainResult {
  Network net;
  double objective = 0.0;  // total error over the dataset at the final point
  double accuracy = 0.0;   // training accuracy of the final network
  std::size_t evaluations = 0;
  std::size_t cycles = 0;
  std::vector<std::pair<std::size_t, double>> trace;  // (evaluations, best)
};

/// Trains a network by minimizing its total dataset error with Powell's
/// method over the flattened weight vector.
PowellTrainResult powell_train(const std::vector<TrainingPair>& data,
                               const HyperParams& hp,
                               const PowellTrainOptions& opts = {});

}  // namespace emonet
