#include "emonet/optim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace emonet {

namespace {

constexpr double kGoldenRatio = 1.6180339887498949;
constexpr double kGoldenSection = 0.38196601125010515;  // 2 - golden ratio
constexpr double kTiny = 1e-12;

void check_objective(const Objective& f, std::span<const double> point) {
  if (f.dimension == 0) throw std::invalid_argument("objective dimension must be >= 1");
  if (!f.evaluate) throw std::invalid_argument("objective has no evaluate function");
  if (point.size() != f.dimension) {
    throw std::invalid_argument("point dimension " + std::to_string(point.size()) +
                                " does not match objective dimension " +
                                std::to_string(f.dimension));
  }
}

bool is_zero_vector(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

LineMinResult line_minimize(const Objective& f, std::span<const double> point,
                            std::span<const double> direction, double tol) {
  check_objective(f, point);
  if (direction.size() != f.dimension) {
    throw std::invalid_argument("direction dimension does not match objective");
  }
  if (is_zero_vector(direction)) {
    throw std::invalid_argument("line direction must be nonzero");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("line tolerance must be positive");

  LineMinResult result;
  std::vector<double> probe(point.begin(), point.end());
  const auto g = [&](double t) {
    for (std::size_t i = 0; i < probe.size(); ++i) {
      probe[i] = point[i] + t * direction[i];
    }
    ++result.evaluations;
    return f.evaluate(probe);
  };

  const double f_origin = g(0.0);

  // Bracket a minimum by walking downhill with golden-ratio expansion.
  double a = 0.0, fa = f_origin;
  double b = 1.0, fb = g(b);
  if (fb > fa) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = b + kGoldenRatio * (b - a);
  double fc = g(c);
  bool bracketed = fc >= fb;
  for (int expansion = 0; !bracketed && expansion < 64; ++expansion) {
    a = b;
    fa = fb;
    b = c;
    fb = fc;
    c = b + kGoldenRatio * (b - a);
    if (!std::isfinite(c) || std::abs(c) > 1e15) break;
    fc = g(c);
    bracketed = fc >= fb;
  }
  if (!bracketed || !(fb <= fa && fb <= fc)) {
    result.step = 0.0;
    result.value = f_origin;
    return result;
  }

  // Golden-section refinement on [a, c] (b is interior with fb <= fa, fc).
  double lo = std::min(a, c), hi = std::max(a, c);
  double x1 = hi - (hi - lo) * (1.0 - kGoldenSection);
  double x2 = lo + (hi - lo) * (1.0 - kGoldenSection);
  // Reorder so that x1 < x2.
  if (x1 > x2) std::swap(x1, x2);
  double f1 = g(x1), f2 = g(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - (hi - lo) * (1.0 - kGoldenSection);
      f1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + (hi - lo) * (1.0 - kGoldenSection);
      f2 = g(x2);
    }
  }
  double best_t = f1 < f2 ? x1 : x2;
  double best_f = std::min(f1, f2);
  if (fb < best_f) {  // keep the bracket interior point if refinement lost it
    best_t = b;
    best_f = fb;
  }
  if (!(best_f < f_origin)) {  // no strict improvement (flat or at a minimum)
    result.step = 0.0;
    result.value = f_origin;
    return result;
  }
  result.step = best_t;
  result.value = best_f;
  return result;
}

MinimizeResult powell_minimize(const Objective& f, std::span<const double> start,
                               const PowellOptions& opts) {
  check_objective(f, start);
  if (!(opts.ftol > 0.0)) throw std::invalid_argument("ftol must be positive");
  const std::size_t n = f.dimension;

  std::vector<std::vector<double>> dirs;
  if (opts.init_directions.empty()) {
    dirs.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) dirs[i][i] = 1.0;
  } else {
    if (opts.init_directions.size() != n) {
      throw std::invalid_argument("need exactly " + std::to_string(n) +
                                  " initial directions");
    }
    for (const auto& d : opts.init_directions) {
      if (d.size() != n) throw std::invalid_argument("direction dimension mismatch");
      if (is_zero_vector(d)) throw std::invalid_argument("zero initial direction");
    }
    dirs = opts.init_directions;
  }

  MinimizeResult result;
  result.minimizer.assign(start.begin(), start.end());
  result.value = f.evaluate(result.minimizer);
  result.evaluations = 1;
  if (!std::isfinite(result.value)) {
    throw std::invalid_argument("objective is not finite at the start point");
  }
  result.trace.emplace_back(result.evaluations, result.value);

  for (std::size_t cycle = 1; cycle <= opts.max_iters; ++cycle) {
    const std::vector<double> cycle_start = result.minimizer;
    const double f_start = result.value;

    for (std::size_t i = 0; i < n; ++i) {
      const auto lm = line_minimize(f, result.minimizer, dirs[i], opts.line_tol);
      result.evaluations += lm.evaluations;
      if (lm.step != 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
          result.minimizer[k] += lm.step * dirs[i][k];
        }
        result.value = lm.value;
      }
    }

    std::vector<double> displacement(n);
    for (std::size_t k = 0; k < n; ++k) {
      displacement[k] = result.minimizer[k] - cycle_start[k];
    }
    if (!is_zero_vector(displacement)) {
      for (std::size_t i = 0; i + 1 < n; ++i) dirs[i] = dirs[i + 1];
      dirs[n - 1] = displacement;
      const auto lm =
          line_minimize(f, result.minimizer, displacement, opts.line_tol);
      result.evaluations += lm.evaluations;
      if (lm.step != 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
          result.minimizer[k] += lm.step * displacement[k];
        }
        result.value = lm.value;
      }
    }

    result.iterations = cycle;
    result.trace.emplace_back(result.evaluations, result.value);

    if (opts.stop_early &&
        opts.stop_early(result.minimizer, result.value, result.evaluations)) {
      break;
    }
    if (2.0 * std::abs(f_start - result.value) <=
        opts.ftol * (std::abs(f_start) + std::abs(result.value) + kTiny)) {
      break;
    }
  }
  return result;
}

MinimizeResult simplex_minimize(const Objective& f,
                                std::span<const double> start,
                                const SimplexOptions& opts) {
  check_objective(f, start);
  if (!(opts.edge != 0.0)) throw std::invalid_argument("simplex edge must be nonzero");
  const std::size_t n = f.dimension;

  MinimizeResult result;
  std::vector<std::vector<double>> verts(n + 1,
                                         std::vector<double>(start.begin(), start.end()));
  for (std::size_t i = 0; i < n; ++i) verts[i + 1][i] += opts.edge;

  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    fv[i] = f.evaluate(verts[i]);
    ++result.evaluations;
    if (!std::isfinite(fv[i])) {
      throw std::invalid_argument("objective is not finite at a starting vertex");
    }
  }

  const auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    return f.evaluate(x);
  };

  for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
    // Identify best, worst and second-worst vertices.
    std::size_t lo = 0, hi = 0, nh = 0;
    for (std::size_t i = 1; i <= n; ++i) {
      if (fv[i] < fv[lo]) lo = i;
      if (fv[i] > fv[hi]) hi = i;
    }
    nh = lo;
    for (std::size_t i = 0; i <= n; ++i) {
      if (i != hi && fv[i] > fv[nh]) nh = i;
    }

    result.iterations = iter;
    result.trace.emplace_back(result.evaluations, fv[lo]);

    const double rtol =
        2.0 * std::abs(fv[hi] - fv[lo]) / (std::abs(fv[hi]) + std::abs(fv[lo]) + kTiny);
    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter, std::abs(verts[i][k] - verts[lo][k]));
      }
    }
    if (rtol < opts.ftol || diameter < opts.xtol) break;

    // Centroid of all vertices but the worst.
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += verts[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    const auto blend = [&](double coeff) {
      std::vector<double> x(n);
      for (std::size_t k = 0; k < n; ++k) {
        x[k] = centroid[k] + coeff * (centroid[k] - verts[hi][k]);
      }
      return x;
    };

    const auto reflected = blend(1.0);
    const double fr = eval(reflected);
    if (fr < fv[lo]) {
      const auto expanded = blend(2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        verts[hi] = expanded;
        fv[hi] = fe;
      } else {
        verts[hi] = reflected;
        fv[hi] = fr;
      }
    } else if (fr < fv[nh]) {
      verts[hi] = reflected;
      fv[hi] = fr;
    } else {
      const auto contracted = blend(-0.5);  // toward the worst vertex
      const double fc = eval(contracted);
      if (fc < fv[hi]) {
        verts[hi] = contracted;
        fv[hi] = fc;
      } else {
        // Shrink everything toward the best vertex.
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == lo) continue;
          for (std::size_t k = 0; k < n; ++k) {
            verts[i][k] = verts[lo][k] + 0.5 * (verts[i][k] - verts[lo][k]);
          }
          fv[i] = eval(verts[i]);
        }
      }
    }
  }

  std::size_t lo = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (fv[i] < fv[lo]) lo = i;
  }
  result.minimizer = verts[lo];
  result.value = fv[lo];
  result.trace.emplace_back(result.evaluations, result.value);
  return result;
}

std::vector<double> flatten_weights(const Network& net) {
  std::vector<double> out;
  out.reserve(net.weight_count());
  for (const Matrix& w : net.weights) {
    out.insert(out.end(), w.data().begin(), w.data().end());
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> weight_shapes(const Network& net) {
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  shapes.reserve(net.weights.size());
  for (const Matrix& w : net.weights) shapes.emplace_back(w.rows(), w.cols());
  return shapes;
}

std::vector<Matrix> unflatten_weights(
    std::span<const double> values,
    const std::vector<std::pair<std::size_t, std::size_t>>& shapes) {
  std::size_t total = 0;
  for (const auto& [r, c] : shapes) total += r * c;
  if (values.size() != total) {
    throw std::invalid_argument("flat weight vector has length " +
                                std::to_string(values.size()) + ", expected " +
                                std::to_string(total));
  }
  std::vector<Matrix> out;
  out.reserve(shapes.size());
  std::size_t offset = 0;
  for (const auto& [r, c] : shapes) {
    Matrix w(r, c);
    std::copy(values.begin() + offset, values.begin() + offset + r * c,
              w.data().begin());
    offset += r * c;
    out.push_back(std::move(w));
  }
  return out;
}

PowellTrainResult powell_train(const std::vector<TrainingPair>& data,
                               const HyperParams& hp,
                               const PowellTrainOptions& opts) {
  hp.validate();
  if (data.empty()) throw std::invalid_argument("training dataset is empty");
  const std::size_t n_in = data.front().first.size();
  const std::size_t n_out = data.front().second.size();

  Network net;
  if (opts.start) {
    net = *opts.start;
    net.validate();
    if (net.input_size != n_in || net.output_size != n_out) {
      throw std::invalid_argument("starting network shape does not match data");
    }
  } else {
    net = Network::create(n_in, hp.hidden_sizes, n_out, hp.sigma);
    init_weights(net, -0.5, 0.5, 1e6, hp.seed);
  }

  const auto shapes = weight_shapes(net);
  Network scratch = net;
  Objective objective;
  objective.dimension = net.weight_count();
  objective.evaluate = [&](std::span<const double> w) {
    scratch.weights = unflatten_weights(w, shapes);
    double total = 0.0;
    for (const auto& [x, t] : data) {
      total += error(t, forward(scratch, x).back());
    }
    return total;
  };

  PowellOptions popts;
  popts.ftol = opts.ftol;
  popts.max_iters = opts.max_cycles;
  popts.line_tol = opts.line_tol;
  if (opts.random_directions) {
    std::mt19937_64 rng(hp.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> dist(-opts.direction_scale,
                                                opts.direction_scale);
    popts.init_directions.assign(objective.dimension,
                                 std::vector<double>(objective.dimension));
    for (auto& d : popts.init_directions) {
      do {
        for (double& v : d) v = dist(rng);
      } while (is_zero_vector(d));
    }
  }
  if (opts.accuracy_target) {
    const double target = *opts.accuracy_target;
    popts.stop_early = [&, target](std::span<const double> w, double, std::size_t) {
      scratch.weights = unflatten_weights(w, shapes);
      return dataset_accuracy(scratch, data) >= target;
    };
  }

  const auto start_vec = flatten_weights(net);
  const auto mr = powell_minimize(objective, start_vec, popts);

  PowellTrainResult result;
  net.weights = unflatten_weights(mr.minimizer, shapes);
  result.objective = mr.value;
  result.evaluations = mr.evaluations;
  result.cycles = mr.iterations;
  result.trace = mr.trace;
  result.accuracy = dataset_accuracy(net, data);
  result.net = std::move(net);
  return result;
}

}  // namespace emonet
