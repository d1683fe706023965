#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "emonet/dataset.hpp"
#include "emonet/training.hpp"

namespace emonet {

/// Stepped grid lo, lo+step, ..., up to and including hi (with a small
/// tolerance for accumulated rounding).
struct GridRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;

  void validate() const;
  std::size_t points() const;
  double value(std::size_t k) const { return lo + static_cast<double>(k) * step; }
};

/// Sentinel for "never stop early": evaluate the whole grid.
inline constexpr std::size_t kNoEarlyStop = std::numeric_limits<std::size_t>::max();

struct SearchSpace {
  GridRange sigma;
  GridRange alpha;
  GridRange lambda;
  std::vector<std::vector<std::size_t>> hidden_size_candidates;  // 1- or 2-element
  /// Consecutive non-improving combos tolerated before stopping the sweep.
  std::size_t patience_turns = kNoEarlyStop;
  /// Per-combo training budget; bounds the sweep cost.
  std::size_t epochs_per_combo = 500;
  /// Patience inside each combo's training run.
  std::size_t train_patience = 20;

  void validate() const;
};

/// Cartesian product of the stepped grids and size candidates in a fixed,
/// documented order: hidden sizes outermost, then sigma, then alpha, with
/// lambda innermost.
std::vector<HyperParams> enumerate(const SearchSpace& space);

struct SearchRecord {
  HyperParams hp;
  double train_rate = 0.0;  // best training accuracy of the combo's run
  double test_rate = 0.0;   // validation macro average rate
  std::int64_t timestamp = 0;
  std::uint64_t seed = 0;  // the combo's derived seed
};

struct SearchResult {
  SearchRecord best;
  std::vector<SearchRecord> log;  // appended whenever the best strictly improves
  std::size_t combos_evaluated = 0;
  std::size_t combos_skipped = 0;  // diverged runs
};

/// Trains one network per combo, scores it on the validation set, and records
/// every strict improvement of the best validation rate. Stops early after
/// patience_turns consecutive non-improving combos. Ties keep the earlier
/// combo. Each combo's RNG seed is derived from the combo's content and the
/// base seed, so removing one combo never changes another's result. Diverging
/// runs are skipped, never abort the sweep. With threads > 1, combos are
/// evaluated concurrently in blocks; results are identical to the sequential
/// sweep.
SearchResult search(const SearchSpace& space, const Dataset& train_set,
                    const Dataset& validation_set, std::uint64_t seed,
                    std::size_t threads = 1);

/// Append-only text log, one record per line:
/// `sigma,alpha,lambda,hidden_sizes,train_rate,test_rate,seed`
/// with hidden sizes rendered as `10` or `29x28`. Values round-trip exactly.
void save_records(const std::vector<SearchRecord>& log, const std::string& path);
std::vector<SearchRecord> load_records(const std::string& path);

/// Hyperparameters of the last (best) record in the file.
HyperParams load_best(const std::string& path);

}  // namespace emonet
