#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace emonet {

/// The seven emotion categories, coded 1-7.
enum class Emotion : int {
  Neutral = 1,
  Joy = 2,
  Surprise = 3,
  Angry = 4,
  Disgust = 5,
  Fear = 6,
  Sad = 7,
};

inline constexpr int kEmotionCount = 7;
inline constexpr std::size_t kMotionUnitCount = 12;

const char* emotion_name(Emotion e);
Emotion emotion_from_code(int code);  // throws on codes outside [1, 7]
std::optional<Emotion> emotion_from_name(std::string_view name);

/// One video frame: 12 motion-unit magnitudes plus its emotion label.
struct Frame {
  std::int64_t index = 0;
  std::vector<double> features;
  Emotion label = Emotion::Neutral;
};

/// One emotion episode: ordered frames sharing a sequence identity.
struct LabeledSequence {
  std::string id;
  std::vector<Frame> frames;
};

struct Dataset {
  std::vector<LabeledSequence> sequences;

  std::size_t frame_count() const;
  /// Frames in sequence order, as (features, label) pairs.
  std::vector<std::pair<std::vector<double>, Emotion>> flattened() const;
  std::map<Emotion, std::size_t> class_counts() const;
  /// Throws std::invalid_argument on structural violations (empty sequence,
  /// non-monotone frame indices, wrong feature count, non-finite values).
  void validate() const;
};

/// Text format: `sequence_id,frame_index,mu1,...,mu12,label` rows with `#`
/// comment lines. load groups rows by sequence id and rejects malformed rows
/// with their line number; save emits the canonical form (17 significant
/// digits), so save(load(f)) is byte-stable.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

/// Keeps the first neutral_count frames of each sequence's neutral prefix
/// plus peak_count frames centered on the middle of its non-neutral span
/// (center = span_start + span_len / 2, window clipped to the span).
/// Rejects sequences whose neutral frames reappear after the span starts.
Dataset take_peak_frames(const Dataset& ds, std::size_t neutral_count = 3,
                         std::size_t peak_count = 3);

/// Drops every neutral frame; sequences left empty are removed.
Dataset exclude_neutral(const Dataset& ds);

/// Truncates every class to the smallest per-class frame count and regroups
/// the surviving frames by class in label-code order. Selection keeps the
/// first m frames of each class in dataset order; with sample=true it keeps
/// a seeded random subset instead.
Dataset sort_and_balance(const Dataset& ds, std::uint64_t seed = 0,
                         bool sample = false);

enum class SplitMode { Sequence, Frame };

/// Deterministic partition into (train, test). Sequence mode holds out whole
/// sequences; frame mode splits the flattened view. Rejects splits that
/// leave either side empty.
std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction,
                                  SplitMode by, std::uint64_t seed);

/// Mapping from emotion labels to output nodes. Covers plain subsets
/// (one node per label, ordered by code) and merged categories such as
/// positive/negative or X-vs-not-X schemes.
struct CategoryScheme {
  std::vector<std::string> names;       // node names, in output order
  std::array<int, kEmotionCount + 1> node_by_code{};  // code -> node, -1 unmapped

  CategoryScheme() { node_by_code.fill(-1); }

  std::size_t size() const { return names.size(); }
  int node_for(Emotion e) const { return node_by_code[static_cast<int>(e)]; }

  static CategoryScheme all();
  static CategoryScheme subset(std::vector<Emotion> labels);
  static CategoryScheme merged(
      const std::vector<std::pair<std::string, std::vector<Emotion>>>& groups);
};

/// (feature vector, one-hot target) pair as consumed by the trainers.
using TrainingPair = std::pair<std::vector<double>, std::vector<double>>;

/// One-hot encodes every frame under the scheme, in flattened order.
/// Throws if a frame's label has no node in the scheme.
std::vector<TrainingPair> to_training_pairs(const Dataset& ds,
                                            const CategoryScheme& scheme);

}  // namespace emonet
