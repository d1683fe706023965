#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emonet/dataset.hpp"

namespace emonet {

/// Bernstein basis polynomial B_i^n(u) = C(n,i) u^i (1-u)^(n-i).
/// Requires 0 <= i <= n and u in [0, 1].
double bernstein(std::size_t i, std::size_t n, double u);

/// Bezier curve value x(u) = sum_i b_i B_i^n(u) for n = #points - 1.
/// Needs at least 2 control points and u in [0, 1].
double bezier_eval(std::span<const double> control_points, double u);

/// Per-emotion synthesis recipe: the apex motion-unit magnitudes plus one
/// cubic Bezier control row per motion unit shaping onset -> apex -> offset.
struct EmotionTemplate {
  Emotion label = Emotion::Neutral;
  std::array<double, kMotionUnitCount> apex{};
  std::array<std::array<double, 4>, kMotionUnitCount> control_points{};

  /// Cubic controls (0, 4a/3, 4a/3, 0) per motion unit, so the curve peaks
  /// at the apex value at u = 0.5 and interpolates 0 at both ends.
  static EmotionTemplate from_apex(Emotion label,
                                   const std::array<double, kMotionUnitCount>& apex);
};

struct SynthConfig {
  std::size_t frames_per_sequence = 20;
  std::size_t neutral_prefix = 5;
  double noise_std = 0.0;
  std::size_t sequences_per_emotion = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Seven templates with pairwise-distinct apex vectors (pairwise distance
/// >= 0.5, magnitudes within the tracker's usual range), neutral all zero.
std::vector<EmotionTemplate> default_templates();

/// Template file: `label,apex1,...,apex12` rows (label by name or code),
/// `#` comments. Errors carry the line number.
std::vector<EmotionTemplate> load_templates(const std::string& path);

/// Per sequence: neutral_prefix frames near zero, then every motion unit
/// traced along its Bezier curve with u sampled uniformly over the emotional
/// span, plus Gaussian noise of std noise_std. Deterministic for a seed.
Dataset generate(const std::vector<EmotionTemplate>& templates,
                 const SynthConfig& cfg);

}  // namespace emonet
