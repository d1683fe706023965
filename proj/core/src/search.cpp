#include "emonet/search.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "emonet/eval.hpp"

namespace emonet {

namespace {

constexpr double kGridEps = 1e-9;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_sizes(const std::vector<std::size_t>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(sizes[i]);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find('x', pos);
    if (next == std::string::npos) next = text.size();
    sizes.push_back(std::stoull(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  return sizes;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t bits_of(double v) {
  std::uint64_t out;
  static_assert(sizeof(out) == sizeof(v));
  std::memcpy(&out, &v, sizeof(out));
  return out;
}

/// Seed derived from the combo's content, not its grid position.
std::uint64_t combo_seed(std::uint64_t base, const HyperParams& hp) {
  std::uint64_t h = base;
  h = mix(h, bits_of(hp.sigma));
  h = mix(h, bits_of(hp.alpha));
  h = mix(h, bits_of(hp.lambda));
  for (std::size_t s : hp.hidden_sizes) h = mix(h, s);
  return h;
}

CategoryScheme scheme_for(const Dataset& train_set, const Dataset& validation_set) {
  std::set<Emotion> labels;
  for (const auto* ds : {&train_set, &validation_set}) {
    for (const auto& seq : ds->sequences) {
      for (const auto& f : seq.frames) labels.insert(f.label);
    }
  }
  return CategoryScheme::subset({labels.begin(), labels.end()});
}

struct ComboOutcome {
  bool diverged = false;
  SearchRecord record;
};

ComboOutcome run_combo(const HyperParams& hp,
                       const std::vector<TrainingPair>& train_pairs,
                       const Dataset& validation_set,
                       const CategoryScheme& scheme) {
  ComboOutcome outcome;
  outcome.record.hp = hp;
  outcome.record.seed = hp.seed;
  try {
    const TrainResult tr = train(train_pairs, hp);
    outcome.record.train_rate = tr.best_accuracy;
    EvalOptions eopts;
    eopts.scheme = scheme;
    outcome.record.test_rate = evaluate(tr.net, validation_set, eopts).average_rate;
  } catch (const DivergenceError&) {
    outcome.diverged = true;
  }
  return outcome;
}

}  // namespace

void GridRange::validate() const {
  if (!(lo <= hi)) throw std::invalid_argument("grid range requires lo <= hi");
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
}

std::size_t GridRange::points() const {
  validate();
  return static_cast<std::size_t>(std::floor((hi - lo) / step + kGridEps)) + 1;
}

void SearchSpace::validate() const {
  sigma.validate();
  alpha.validate();
  lambda.validate();
  if (hidden_size_candidates.empty()) {
    throw std::invalid_argument("no hidden size candidates");
  }
  for (const auto& sizes : hidden_size_candidates) {
    if (sizes.empty() || sizes.size() > 2) {
      throw std::invalid_argument("hidden size candidates must have 1 or 2 layers");
    }
    for (std::size_t s : sizes) {
      if (s == 0) throw std::invalid_argument("hidden layer size must be >= 1");
    }
  }
  if (epochs_per_combo == 0) {
    throw std::invalid_argument("epochs_per_combo must be >= 1");
  }
  if (train_patience == 0) {
    throw std::invalid_argument("train_patience must be >= 1");
  }
}

std::vector<HyperParams> enumerate(const SearchSpace& space) {
  space.validate();
  std::vector<HyperParams> combos;
  combos.reserve(space.hidden_size_candidates.size() * space.sigma.points() *
                 space.alpha.points() * space.lambda.points());
  for (const auto& sizes : space.hidden_size_candidates) {
    for (std::size_t si = 0; si < space.sigma.points(); ++si) {
      for (std::size_t ai = 0; ai < space.alpha.points(); ++ai) {
        for (std::size_t li = 0; li < space.lambda.points(); ++li) {
          HyperParams hp;
          hp.sigma = space.sigma.value(si);
          hp.alpha = space.alpha.value(ai);
          hp.lambda = space.lambda.value(li);
          hp.hidden_sizes = sizes;
          hp.max_epochs = space.epochs_per_combo;
          hp.patience = space.train_patience;
          combos.push_back(std::move(hp));
        }
      }
    }
  }
  if (combos.empty()) throw std::invalid_argument("empty parameter grid");
  return combos;
}

SearchResult search(const SearchSpace& space, const Dataset& train_set,
                    const Dataset& validation_set, std::uint64_t seed,
                    std::size_t threads) {
  if (train_set.frame_count() == 0 || validation_set.frame_count() == 0) {
    throw std::invalid_argument("search needs nonempty train and validation sets");
  }
  auto combos = enumerate(space);
  for (auto& hp : combos) hp.seed = combo_seed(seed, hp);

  const CategoryScheme scheme = scheme_for(train_set, validation_set);
  const auto train_pairs = to_training_pairs(train_set, scheme);

  std::vector<ComboOutcome> outcomes(combos.size());
  if (threads <= 1) {
    // Sequential, with true early stopping.
    SearchResult result;
    bool have_best = false;
    std::size_t stale = 0;
    for (std::size_t i = 0; i < combos.size(); ++i) {
      outcomes[i] = run_combo(combos[i], train_pairs, validation_set, scheme);
      ++result.combos_evaluated;
      if (outcomes[i].diverged) {
        ++result.combos_skipped;
        ++stale;
      } else if (!have_best || outcomes[i].record.test_rate > result.best.test_rate) {
        outcomes[i].record.timestamp =
            std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count();
        result.best = outcomes[i].record;
        result.log.push_back(outcomes[i].record);
        have_best = true;
        stale = 0;
      } else {
        ++stale;
      }
      if (space.patience_turns != kNoEarlyStop && stale >= space.patience_turns) {
        break;
      }
    }
    if (!have_best) {
      throw std::runtime_error("every parameter combination diverged");
    }
    return result;
  }

  // Parallel: evaluate in blocks, then replay the sequential decision rule
  // over the merged outcomes so the result matches a sequential sweep.
  SearchResult result;
  bool have_best = false;
  std::size_t stale = 0;
  std::size_t next = 0;
  bool stopped = false;
  while (next < combos.size() && !stopped) {
    const std::size_t block_end = std::min(combos.size(), next + threads);
    std::vector<std::thread> workers;
    for (std::size_t i = next; i < block_end; ++i) {
      workers.emplace_back([&, i] {
        outcomes[i] = run_combo(combos[i], train_pairs, validation_set, scheme);
      });
    }
    for (auto& w : workers) w.join();
    for (std::size_t i = next; i < block_end; ++i) {
      ++result.combos_evaluated;
      if (outcomes[i].diverged) {
        ++result.combos_skipped;
        ++stale;
      } else if (!have_best || outcomes[i].record.test_rate > result.best.test_rate) {
        outcomes[i].record.timestamp =
            std::chrono::duration_cast<std::chrono::seconds>(
                std::chrono::system_clock::now().time_since_epoch())
                .count();
        result.best = outcomes[i].record;
        result.log.push_back(outcomes[i].record);
        have_best = true;
        stale = 0;
      } else {
        ++stale;
      }
      if (space.patience_turns != kNoEarlyStop && stale >= space.patience_turns) {
        stopped = true;
        break;
      }
    }
    next = block_end;
  }
  if (!have_best) {
    throw std::runtime_error("every parameter combination diverged");
  }
  return result;
}

void save_records(const std::vector<SearchRecord>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open records file for writing: " + path);
  out << "# sigma,alpha,lambda,hidden_sizes,train_rate,test_rate,seed\n";
  for (const auto& rec : log) {
    out << format_double(rec.hp.sigma) << ',' << format_double(rec.hp.alpha)
        << ',' << format_double(rec.hp.lambda) << ','
        << format_sizes(rec.hp.hidden_sizes) << ','
        << format_double(rec.train_rate) << ',' << format_double(rec.test_rate)
        << ',' << rec.seed << '\n';
  }
  if (!out) throw std::runtime_error("failed writing records file: " + path);
}

std::vector<SearchRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records file: " + path);
  std::vector<SearchRecord> log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 7) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 7 fields, got " +
                               std::to_string(fields.size()));
    }
    SearchRecord rec;
    try {
      rec.hp.sigma = std::stod(fields[0]);
      rec.hp.alpha = std::stod(fields[1]);
      rec.hp.lambda = std::stod(fields[2]);
      rec.hp.hidden_sizes = parse_sizes(fields[3]);
      rec.train_rate = std::stod(fields[4]);
      rec.test_rate = std::stod(fields[5]);
      rec.seed = std::stoull(fields[6]);
      rec.hp.seed = rec.seed;
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed record");
    }
    log.push_back(std::move(rec));
  }
  return log;
}

HyperParams load_best(const std::string& path) {
  const auto log = load_records(path);
  if (log.empty()) {
    throw std::runtime_error(path + ": no records in file");
  }
  return log.back().hp;
}

}  // namespace emonet
