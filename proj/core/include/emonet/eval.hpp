#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emonet/dataset.hpp"
#include "emonet/network.hpp"

namespace emonet {

/// Index of the largest entry; ties break toward the lowest index.
std::size_t argmax(std::span<const double> v);

/// One-hot vector with a single 1 at the argmax.
std::vector<double> normalize_output(std::span<const double> raw);

/// Median filter over integer label codes of one sequence. The window keeps
/// its nominal odd size near the boundaries by anchoring at the edge; only
/// sequences shorter than the window yield a smaller window, where the lower
/// median is taken. Never call it across sequence boundaries.
std::vector<int> median_filter(const std::vector<int>& labels,
                               std::size_t window);

/// Counts of predicted vs. true labels; rows are the true class.
struct ConfusionMatrix {
  std::vector<std::string> categories;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  std::size_t row_total(std::size_t i) const;
  double rate(std::size_t i, std::size_t j) const;  // row-normalized
  double overall_accuracy() const;                  // diagonal / total
};

ConfusionMatrix confusion(std::span<const std::size_t> true_idx,
                          std::span<const std::size_t> predicted_idx,
                          std::vector<std::string> categories);

/// Unweighted mean of the diagonal row rates (per-class recall).
/// Throws when a class never occurs in the truth, naming it.
double average_rate(const ConfusionMatrix& cm);

struct EvalOptions {
  CategoryScheme scheme = CategoryScheme::all();
  std::optional<std::size_t> median_window;  // filter predictions per sequence
  bool normalize = true;  // one-hot the raw outputs before deciding
};

struct EvalResult {
  ConfusionMatrix matrix;
  double average_rate = 0.0;
  double overall_accuracy = 0.0;
};

/// Classifies every frame with the argmax rule, optionally median-filters the
/// per-sequence predictions, and scores against the true labels.
EvalResult evaluate(const Network& net, const Dataset& test,
                    const EvalOptions& options = {});

/// Aligned percentage table in the row-is-true layout.
std::string format_confusion_table(const ConfusionMatrix& cm);
/// Machine-readable counts: header row, then `true_label,<counts...>` rows.
std::string format_confusion_csv(const ConfusionMatrix& cm);

}  // namespace emonet
