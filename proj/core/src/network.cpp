#include "emonet/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace emonet {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive, got " +
                                std::to_string(sigma));
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double sigmoid(double x, double sigma) {
  check_sigma(sigma);
  // exp overflow yields +inf and the quotient saturates to 0; underflow
  // saturates to 1. Both are the intended clamped outputs.
  return 1.0 / (1.0 + std::exp(-sigma * x));
}

double sigmoid_derivative(double y, double sigma) {
  check_sigma(sigma);
  return sigma * y * (1.0 - y);
}

Network Network::create(std::size_t input, std::vector<std::size_t> hidden,
                        std::size_t output, double sigma) {
  Network net;
  net.input_size = input;
  net.hidden_sizes = std::move(hidden);
  net.output_size = output;
  net.sigma = sigma;
  const auto sizes = net.layer_sizes();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    net.weights.emplace_back(sizes[l] + 1, sizes[l + 1]);
  }
  net.validate();
  return net;
}

std::vector<std::size_t> Network::layer_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(hidden_sizes.size() + 2);
  sizes.push_back(input_size);
  sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  sizes.push_back(output_size);
  return sizes;
}

std::size_t Network::weight_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.rows() * w.cols();
  return n;
}

void Network::validate() const {
  check_sigma(sigma);
  if (input_size == 0) throw std::invalid_argument("input_size must be >= 1");
  if (output_size == 0) throw std::invalid_argument("output_size must be >= 1");
  if (hidden_sizes.size() > 2) {
    throw std::invalid_argument("at most 2 hidden layers are supported");
  }
  for (std::size_t h : hidden_sizes) {
    if (h == 0) throw std::invalid_argument("hidden layer size must be >= 1");
  }
  const auto sizes = layer_sizes();
  if (weights.size() != sizes.size() - 1) {
    throw std::invalid_argument("expected " + std::to_string(sizes.size() - 1) +
                                " weight matrices, got " +
                                std::to_string(weights.size()));
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (weights[l].rows() != sizes[l] + 1 || weights[l].cols() != sizes[l + 1]) {
      throw std::invalid_argument(
          "weight matrix " + std::to_string(l) + " has shape " +
          std::to_string(weights[l].rows()) + "x" +
          std::to_string(weights[l].cols()) + ", expected " +
          std::to_string(sizes[l] + 1) + "x" + std::to_string(sizes[l + 1]));
    }
  }
}

std::vector<std::vector<double>> forward(const Network& net,
                                         std::span<const double> input) {
  if (input.size() != net.input_size) {
    throw std::invalid_argument("input length " + std::to_string(input.size()) +
                                " does not match network input size " +
                                std::to_string(net.input_size));
  }
  std::vector<std::vector<double>> activations;
  activations.reserve(net.weights.size());
  std::vector<double> current(input.begin(), input.end());
  for (const Matrix& w : net.weights) {
    std::vector<double> next(w.cols());
    for (std::size_t k = 0; k < w.cols(); ++k) {
      double sum = w(w.rows() - 1, k);  // bias input fixed at 1
      for (std::size_t i = 0; i + 1 < w.rows(); ++i) {
        sum += current[i] * w(i, k);
      }
      next[k] = sigmoid(sum, net.sigma);
    }
    activations.push_back(next);
    current = std::move(next);
  }
  return activations;
}

void init_weights(Network& net, double lo, double hi, double threshold,
                  std::uint64_t seed) {
  if (!(lo < hi)) throw std::invalid_argument("weight range requires lo < hi");
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("weight threshold must be positive");
  }
  if (std::min(hi, threshold) - std::max(lo, -threshold) <= 0.0) {
    throw std::invalid_argument(
        "no weight in [" + format_double(lo) + ", " + format_double(hi) +
        "] can satisfy |w| <= " + format_double(threshold));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (Matrix& w : net.weights) {
    for (double& v : w.data()) {
      do {
        v = dist(rng);
      } while (std::abs(v) > threshold);
    }
  }
}

void save_model(const Network& net, const std::string& path) {
  net.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << "emonet-model v1\n";
  out << "sigma " << format_double(net.sigma) << "\n";
  const auto sizes = net.layer_sizes();
  out << "layers";
  for (std::size_t s : sizes) out << ' ' << s;
  out << "\n";
  for (const Matrix& w : net.weights) {
    out << "matrix " << w.rows() << ' ' << w.cols() << "\n";
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        if (c) out << ' ';
        out << format_double(w(r, c));
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

Network load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);

  std::string header;
  std::getline(in, header);
  if (header != "emonet-model v1") {
    throw std::runtime_error(path + ": unrecognized model header '" + header + "'");
  }

  std::string tag;
  double sigma = 0.0;
  in >> tag >> sigma;
  if (!in || tag != "sigma") throw std::runtime_error(path + ": expected 'sigma <value>'");

  in >> tag;
  if (!in || tag != "layers") throw std::runtime_error(path + ": expected 'layers <sizes>'");
  std::string rest;
  std::getline(in, rest);
  std::istringstream layer_stream(rest);
  std::vector<std::size_t> sizes;
  std::size_t s = 0;
  while (layer_stream >> s) sizes.push_back(s);
  if (sizes.size() < 2 || sizes.size() > 4) {
    throw std::runtime_error(path + ": layer count must be between 2 and 4");
  }

  Network net;
  net.input_size = sizes.front();
  net.output_size = sizes.back();
  net.hidden_sizes.assign(sizes.begin() + 1, sizes.end() - 1);
  net.sigma = sigma;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    std::size_t rows = 0, cols = 0;
    in >> tag >> rows >> cols;
    if (!in || tag != "matrix") throw std::runtime_error(path + ": expected 'matrix <rows> <cols>'");
    if (rows != sizes[l] + 1 || cols != sizes[l + 1]) {
      throw std::runtime_error(path + ": matrix " + std::to_string(l) +
                               " shape does not match the layer sizes");
    }
    Matrix w(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (!(in >> w(r, c))) {
          throw std::runtime_error(path + ": truncated weight matrix " + std::to_string(l));
        }
      }
    }
    net.weights.push_back(std::move(w));
  }
  net.validate();
  return net;
}

}  // namespace emonet
