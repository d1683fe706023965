#include "emonet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace emonet {

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::vector<double> normalize_output(std::span<const double> raw) {
  std::vector<double> out(raw.size(), 0.0);
  out[argmax(raw)] = 1.0;
  return out;
}

std::vector<int> median_filter(const std::vector<int>& labels,
                               std::size_t window) {
  if (window < 3 || window % 2 == 0) {
    throw std::invalid_argument("median window must be odd and >= 3, got " +
                                std::to_string(window));
  }
  const std::size_t n = labels.size();
  if (n == 0) return {};

  std::vector<int> out(n);
  std::vector<int> buf;
  buf.reserve(window);
  const std::size_t half = window / 2;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo, hi;  // inclusive window bounds, anchored at the edges
    if (n <= window) {
      lo = 0;
      hi = n - 1;
    } else if (i < half) {
      lo = 0;
      hi = window - 1;
    } else if (i + half >= n) {
      hi = n - 1;
      lo = n - window;
    } else {
      lo = i - half;
      hi = i + half;
    }
    buf.assign(labels.begin() + lo, labels.begin() + hi + 1);
    std::sort(buf.begin(), buf.end());
    out[i] = buf[(buf.size() - 1) / 2];  // lower median when even-sized
  }
  return out;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) {
    for (std::size_t c : row) sum += c;
  }
  return sum;
}

std::size_t ConfusionMatrix::row_total(std::size_t i) const {
  std::size_t sum = 0;
  for (std::size_t c : counts[i]) sum += c;
  return sum;
}

double ConfusionMatrix::rate(std::size_t i, std::size_t j) const {
  const std::size_t rt = row_total(i);
  return rt == 0 ? 0.0
                 : static_cast<double>(counts[i][j]) / static_cast<double>(rt);
}

double ConfusionMatrix::overall_accuracy() const {
  const std::size_t all = total();
  if (all == 0) return 0.0;
  std::size_t diag = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) diag += counts[i][i];
  return static_cast<double>(diag) / static_cast<double>(all);
}

ConfusionMatrix confusion(std::span<const std::size_t> true_idx,
                          std::span<const std::size_t> predicted_idx,
                          std::vector<std::string> categories) {
  if (true_idx.size() != predicted_idx.size()) {
    throw std::invalid_argument("true/predicted label lists differ in length");
  }
  if (categories.empty()) throw std::invalid_argument("no categories given");
  const std::size_t k = categories.size();
  ConfusionMatrix cm;
  cm.categories = std::move(categories);
  cm.counts.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < true_idx.size(); ++i) {
    if (true_idx[i] >= k || predicted_idx[i] >= k) {
      throw std::invalid_argument("label index outside the category set");
    }
    ++cm.counts[true_idx[i]][predicted_idx[i]];
  }
  return cm;
}

double average_rate(const ConfusionMatrix& cm) {
  if (cm.counts.empty()) throw std::invalid_argument("empty confusion matrix");
  double sum = 0.0;
  for (std::size_t i = 0; i < cm.counts.size(); ++i) {
    if (cm.row_total(i) == 0) {
      throw std::invalid_argument("class '" + cm.categories[i] +
                                  "' never occurs in the truth");
    }
    sum += cm.rate(i, i);
  }
  return sum / static_cast<double>(cm.counts.size());
}

EvalResult evaluate(const Network& net, const Dataset& test,
                    const EvalOptions& options) {
  if (test.frame_count() == 0) throw std::invalid_argument("test set is empty");
  if (net.output_size != options.scheme.size()) {
    throw std::invalid_argument(
        "network has " + std::to_string(net.output_size) +
        " outputs but the category scheme has " +
        std::to_string(options.scheme.size()));
  }

  std::vector<std::size_t> truth, predicted;
  truth.reserve(test.frame_count());
  predicted.reserve(test.frame_count());

  for (const auto& seq : test.sequences) {
    std::vector<int> seq_pred;
    seq_pred.reserve(seq.frames.size());
    for (const auto& f : seq.frames) {
      const int node = options.scheme.node_for(f.label);
      if (node < 0) {
        throw std::invalid_argument(std::string("label '") +
                                    emotion_name(f.label) +
                                    "' is outside the category scheme");
      }
      truth.push_back(static_cast<std::size_t>(node));
      auto raw = forward(net, f.features).back();
      if (options.normalize) raw = normalize_output(raw);
      seq_pred.push_back(static_cast<int>(argmax(raw)));
    }
    if (options.median_window) {
      seq_pred = median_filter(seq_pred, *options.median_window);
    }
    for (int p : seq_pred) predicted.push_back(static_cast<std::size_t>(p));
  }

  EvalResult result;
  result.matrix = confusion(truth, predicted, options.scheme.names);
  result.average_rate = average_rate(result.matrix);
  result.overall_accuracy = result.matrix.overall_accuracy();
  return result;
}

std::string format_confusion_table(const ConfusionMatrix& cm) {
  std::size_t name_width = 0;
  for (const auto& name : cm.categories) {
    name_width = std::max(name_width, name.size());
  }
  const std::size_t cell = std::max<std::size_t>(name_width + 2, 9);

  std::ostringstream out;
  out << std::string(name_width, ' ');
  for (const auto& name : cm.categories) {
    out << std::string(cell - name.size(), ' ') << name;
  }
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < cm.counts.size(); ++i) {
    out << cm.categories[i]
        << std::string(name_width - cm.categories[i].size(), ' ');
    for (std::size_t j = 0; j < cm.counts.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * cm.rate(i, j));
      const std::size_t len = std::char_traits<char>::length(buf);
      out << std::string(cell > len ? cell - len : 1, ' ') << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string format_confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true_label";
  for (const auto& name : cm.categories) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < cm.counts.size(); ++i) {
    out << cm.categories[i];
    for (std::size_t j = 0; j < cm.counts.size(); ++j) {
      out << ',' << cm.counts[i][j];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace emonet
