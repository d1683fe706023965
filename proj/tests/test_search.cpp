#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "emonet/search.hpp"

#include "emonet/eval.hpp"
#include "emonet/network.hpp"

using namespace emonet;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

/// Separable two-class dataset: the two classes sit on opposite corners of
/// the feature space.
Dataset separable_dataset(std::size_t per_class, double spread) {
  Dataset ds;
  LabeledSequence seq;
  seq.id = "synthetic";
  std::int64_t index = 0;
  for (std::size_t i = 0; i < per_class; ++i) {
    const double wiggle = spread * static_cast<double>(i % 5) / 5.0;
    Frame a;
    a.index = index++;
    a.label = Emotion::Neutral;
    a.features.assign(kMotionUnitCount, -1.0 + wiggle);
    seq.frames.push_back(std::move(a));
    Frame b;
    b.index = index++;
    b.label = Emotion::Joy;
    b.features.assign(kMotionUnitCount, 1.0 - wiggle);
    seq.frames.push_back(std::move(b));
  }
  ds.sequences.push_back(std::move(seq));
  return ds;
}

SearchSpace small_space() {
  SearchSpace space;
  space.sigma = {1.0, 1.0, 1.0};
  space.alpha = {0.5, 0.5, 1.0};
  space.lambda = {0.0, 0.0, 1.0};
  space.hidden_size_candidates = {{4}};
  space.epochs_per_combo = 40;
  return space;
}

}  // namespace

TEST_CASE("grid enumeration reproduces the 12-combo sweep") {
  SearchSpace space;
  space.sigma = {2.0, 2.5, 0.5};
  space.alpha = {0.2, 1.0, 0.3};
  space.lambda = {0.5, 1.0, 0.3};
  space.hidden_size_candidates = {{29, 28}};
  const auto combos = enumerate(space);
  CHECK(combos.size() == 12);  // 2 sigma * 3 alpha * 2 lambda * 1 size
}

TEST_CASE("grid enumeration handles single-point ranges") {
  SearchSpace space;
  space.sigma = {0.9, 0.9, 0.1};
  space.alpha = {0.3, 0.3, 0.1};
  space.lambda = {0.6, 0.6, 0.1};
  space.hidden_size_candidates = {{4}};
  const auto combos = enumerate(space);
  REQUIRE(combos.size() == 1);
  CHECK(combos[0].sigma == doctest::Approx(0.9));
  CHECK(combos[0].alpha == doctest::Approx(0.3));
  CHECK(combos[0].lambda == doctest::Approx(0.6));
  CHECK(combos[0].hidden_sizes == std::vector<std::size_t>{4});
}

TEST_CASE("grid size equals the product of per-axis counts") {
  SearchSpace space;
  space.sigma = {0.5, 1.5, 0.25};
  space.alpha = {0.1, 0.9, 0.2};
  space.lambda = {0.0, 0.8, 0.4};
  space.hidden_size_candidates = {{4}, {10}, {8, 8}};

  // Independent counting oracle.
  const auto count_points = [](double lo, double hi, double step) {
    std::size_t n = 0;
    for (std::size_t k = 0;; ++k) {
      if (lo + static_cast<double>(k) * step > hi + 1e-9) break;
      ++n;
    }
    return n;
  };
  const std::size_t expected = count_points(0.5, 1.5, 0.25) *
                               count_points(0.1, 0.9, 0.2) *
                               count_points(0.0, 0.8, 0.4) * 3;
  CHECK(enumerate(space).size() == expected);
}

TEST_CASE("enumeration order is sizes, then sigma, alpha, lambda innermost") {
  SearchSpace space;
  space.sigma = {1.0, 2.0, 1.0};
  space.alpha = {0.1, 0.2, 0.1};
  space.lambda = {0.0, 0.5, 0.5};
  space.hidden_size_candidates = {{3}, {5}};
  const auto combos = enumerate(space);
  REQUIRE(combos.size() == 16);
  CHECK(combos[0].hidden_sizes == std::vector<std::size_t>{3});
  CHECK(combos[0].sigma == 1.0);
  CHECK(combos[0].alpha == doctest::Approx(0.1));
  CHECK(combos[0].lambda == 0.0);
  CHECK(combos[1].lambda == doctest::Approx(0.5));  // lambda moves first
  CHECK(combos[2].alpha == doctest::Approx(0.2));   // then alpha
  CHECK(combos[4].sigma == 2.0);                    // then sigma
  CHECK(combos[8].hidden_sizes == std::vector<std::size_t>{5});
}

TEST_CASE("enumeration rejects invalid spaces") {
  SearchSpace space = small_space();
  space.hidden_size_candidates.clear();
  CHECK_THROWS_AS(enumerate(space), std::invalid_argument);

  space = small_space();
  space.sigma = {2.0, 1.0, 0.5};  // lo > hi
  CHECK_THROWS_AS(enumerate(space), std::invalid_argument);

  space = small_space();
  space.alpha = {0.1, 0.5, 0.0};  // zero step
  CHECK_THROWS_AS(enumerate(space), std::invalid_argument);
}

TEST_CASE("search prefers the trainable sigma over a saturating one") {
  // sigma = 1 can fit the separable set; sigma = 200 saturates every neuron
  // (weights in [-0.5, 0.5] against inputs of magnitude ~1 put the net into
  // the flat tails, so gradients vanish).
  const Dataset train_set = separable_dataset(10, 0.4);
  const Dataset validation_set = separable_dataset(6, 0.2);

  SearchSpace space = small_space();
  space.sigma = {1.0, 201.0, 200.0};  // {1, 201}
  space.epochs_per_combo = 60;

  const auto result = search(space, train_set, validation_set, 99);
  CHECK(result.best.hp.sigma == doctest::Approx(1.0));
  CHECK(result.best.test_rate > 0.9);
}

TEST_CASE("exhaustive search logs only strict improvements") {
  const Dataset train_set = separable_dataset(8, 0.4);
  const Dataset validation_set = separable_dataset(4, 0.2);
  SearchSpace space = small_space();
  space.alpha = {0.2, 0.8, 0.3};  // 3 combos
  space.patience_turns = kNoEarlyStop;

  const auto result = search(space, train_set, validation_set, 7);
  CHECK(result.combos_evaluated == 3);
  REQUIRE(!result.log.empty());
  for (std::size_t i = 1; i < result.log.size(); ++i) {
    CHECK(result.log[i].test_rate > result.log[i - 1].test_rate);
  }
  CHECK(result.best.test_rate == result.log.back().test_rate);
  for (const auto& rec : result.log) {
    CHECK(result.best.test_rate >= rec.test_rate);
  }
}

TEST_CASE("search is reproducible for a fixed seed") {
  const Dataset train_set = separable_dataset(8, 0.4);
  const Dataset validation_set = separable_dataset(4, 0.2);
  SearchSpace space = small_space();
  space.alpha = {0.3, 0.9, 0.3};

  const auto a = search(space, train_set, validation_set, 5);
  const auto b = search(space, train_set, validation_set, 5);
  CHECK(a.best.hp == b.best.hp);
  CHECK(a.best.test_rate == b.best.test_rate);
  CHECK(a.log.size() == b.log.size());
}

TEST_CASE("removing one combo does not change another's record") {
  const Dataset train_set = separable_dataset(8, 0.4);
  const Dataset validation_set = separable_dataset(4, 0.2);

  SearchSpace wide = small_space();
  wide.alpha = {0.2, 0.8, 0.3};  // alpha in {0.2, 0.5, 0.8}
  SearchSpace narrow = small_space();
  narrow.alpha = {0.5, 0.5, 0.3};  // only alpha = 0.5

  const auto wide_result = search(wide, train_set, validation_set, 11);
  const auto narrow_result = search(narrow, train_set, validation_set, 11);

  // Per-combo seeds derive from the combo content, so the alpha = 0.5 run
  // must produce identical rates in both sweeps.
  const HyperParams& hp = narrow_result.best.hp;
  CHECK(hp.alpha == doctest::Approx(0.5));
  bool found = false;
  for (const auto& rec : wide_result.log) {
    if (rec.hp.alpha == hp.alpha) {
      CHECK(rec.seed == narrow_result.best.seed);
      found = true;
    }
  }
  // The 0.5 combo may not appear in the wide log if it did not improve on
  // 0.2; the seed equality is the essential isolation property.
  (void)found;
  CHECK(hp.seed == narrow_result.best.seed);
}

TEST_CASE("parallel search matches the sequential sweep") {
  const Dataset train_set = separable_dataset(8, 0.4);
  const Dataset validation_set = separable_dataset(4, 0.2);
  SearchSpace space = small_space();
  space.alpha = {0.2, 0.8, 0.2};  // 4 combos

  const auto seq = search(space, train_set, validation_set, 3, 1);
  const auto par = search(space, train_set, validation_set, 3, 4);
  CHECK(seq.best.hp == par.best.hp);
  CHECK(seq.best.test_rate == par.best.test_rate);
  REQUIRE(seq.log.size() == par.log.size());
  for (std::size_t i = 0; i < seq.log.size(); ++i) {
    CHECK(seq.log[i].hp == par.log[i].hp);
    CHECK(seq.log[i].test_rate == par.log[i].test_rate);
  }
}

TEST_CASE("search records and best round-trip through the file") {
  const Dataset train_set = separable_dataset(8, 0.4);
  const Dataset validation_set = separable_dataset(4, 0.2);
  SearchSpace space = small_space();
  space.sigma = {0.7, 1.2, 0.5};

  const auto result = search(space, train_set, validation_set, 13);
  const auto path = temp_file("emonet_records.txt");
  save_records(result.log, path.string());

  const auto reloaded = load_records(path.string());
  REQUIRE(reloaded.size() == result.log.size());
  for (std::size_t i = 0; i < reloaded.size(); ++i) {
    CHECK(reloaded[i].hp.sigma == result.log[i].hp.sigma);
    CHECK(reloaded[i].hp.alpha == result.log[i].hp.alpha);
    CHECK(reloaded[i].hp.lambda == result.log[i].hp.lambda);
    CHECK(reloaded[i].hp.hidden_sizes == result.log[i].hp.hidden_sizes);
    CHECK(reloaded[i].train_rate == result.log[i].train_rate);
    CHECK(reloaded[i].test_rate == result.log[i].test_rate);
    CHECK(reloaded[i].seed == result.log[i].seed);
  }

  const HyperParams best = load_best(path.string());
  CHECK(best.sigma == result.best.hp.sigma);
  CHECK(best.alpha == result.best.hp.alpha);
  CHECK(best.lambda == result.best.hp.lambda);
  CHECK(best.hidden_sizes == result.best.hp.hidden_sizes);
  CHECK(best.seed == result.best.seed);
  std::filesystem::remove(path);
}

TEST_CASE("load_best rejects an empty records file") {
  const auto path = temp_file("emonet_records_empty.txt");
  {
    std::ofstream out(path);
    out << "# sigma,alpha,lambda,hidden_sizes,train_rate,test_rate,seed\n";
  }
  CHECK_THROWS_AS(load_best(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("load_records names the malformed line") {
  const auto path = temp_file("emonet_records_bad.txt");
  {
    std::ofstream out(path);
    out << "0.9,0.3,0.6,4,0.98,0.76,42\n";
    out << "not,a,record\n";
  }
  try {
    load_records(path.string());
    FAIL("expected a rejection");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("a network rebuilt from loaded params and weights is bit-exact") {
  const Dataset train_set = separable_dataset(8, 0.4);
  const Dataset validation_set = separable_dataset(4, 0.2);
  const auto result = search(small_space(), train_set, validation_set, 21);

  // Persist both the winning params and the retrained winner's weights.
  const auto records_path = temp_file("emonet_records_rt.txt");
  const auto model_path = temp_file("emonet_model_rt.txt");
  save_records(result.log, records_path.string());

  HyperParams best = load_best(records_path.string());
  best.max_epochs = 40;
  const auto scheme =
      CategoryScheme::subset({Emotion::Neutral, Emotion::Joy});
  const auto pairs = to_training_pairs(train_set, scheme);
  const auto trained = train(pairs, best);
  save_model(trained.net, model_path.string());

  const Network reloaded = load_model(model_path.string());
  for (const auto& [x, t] : to_training_pairs(validation_set, scheme)) {
    CHECK(forward(reloaded, x) == forward(trained.net, x));
  }
  std::filesystem::remove(records_path);
  std::filesystem::remove(model_path);
}

TEST_CASE("search throws when every combo diverges") {
  // A non-finite feature value drives the first epoch's loss to NaN.
  Dataset poisoned = separable_dataset(4, 0.4);
  poisoned.sequences[0].frames[0].features[0] =
      std::numeric_limits<double>::infinity();
  const Dataset validation_set = separable_dataset(2, 0.2);
  SearchSpace space = small_space();
  CHECK_THROWS_AS(search(space, poisoned, validation_set, 1),
                  std::runtime_error);
}
