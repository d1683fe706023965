#include "emonet/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace emonet {

namespace {

double binomial(std::size_t n, std::size_t i) {
  // Multiplicative form; exact in double for the small degrees used here.
  if (i > n - i) i = n - i;
  double result = 1.0;
  for (std::size_t k = 1; k <= i; ++k) {
    result = result * static_cast<double>(n - i + k) / static_cast<double>(k);
  }
  return result;
}

}  // namespace

double bernstein(std::size_t i, std::size_t n, double u) {
  if (i > n) {
    throw std::invalid_argument("bernstein index " + std::to_string(i) +
                                " exceeds degree " + std::to_string(n));
  }
  if (!(u >= 0.0 && u <= 1.0)) {
    throw std::invalid_argument("bernstein parameter u must be in [0, 1]");
  }
  return binomial(n, i) * std::pow(u, static_cast<double>(i)) *
         std::pow(1.0 - u, static_cast<double>(n - i));
}

double bezier_eval(std::span<const double> control_points, double u) {
  if (control_points.size() < 2) {
    throw std::invalid_argument("bezier curve needs at least 2 control points");
  }
  const std::size_t n = control_points.size() - 1;
  double x = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    x += control_points[i] * bernstein(i, n, u);
  }
  return x;
}

EmotionTemplate EmotionTemplate::from_apex(
    Emotion label, const std::array<double, kMotionUnitCount>& apex) {
  EmotionTemplate t;
  t.label = label;
  t.apex = apex;
  for (std::size_t mu = 0; mu < kMotionUnitCount; ++mu) {
    const double c = apex[mu] * 4.0 / 3.0;
    t.control_points[mu] = {0.0, c, c, 0.0};
  }
  return t;
}

void SynthConfig::validate() const {
  if (frames_per_sequence == 0) {
    throw std::invalid_argument("frames_per_sequence must be >= 1");
  }
  if (neutral_prefix >= frames_per_sequence) {
    throw std::invalid_argument("neutral_prefix must be < frames_per_sequence");
  }
  if (!(noise_std >= 0.0)) {
    throw std::invalid_argument("noise_std must be >= 0");
  }
  if (sequences_per_emotion == 0) {
    throw std::invalid_argument("sequences_per_emotion must be >= 1");
  }
}

std::vector<EmotionTemplate> default_templates() {
  // Apex magnitudes follow the motion-unit semantics qualitatively
  // (mu1..mu12: upper/lower lip, left/right mouth corner horizontal and
  // vertical, right/left brow, right/left cheek, right/left blink), with
  // positive meaning upward/outward. The numbers themselves are synthetic
  // fixtures chosen for mutual separation.
  std::vector<EmotionTemplate> templates;
  templates.push_back(EmotionTemplate::from_apex(
      Emotion::Neutral, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}));
  templates.push_back(EmotionTemplate::from_apex(
      Emotion::Joy,
      {0.3, -0.2, 0.6, 0.8, 0.6, 0.8, 0.0, 0.0, 1.0, 1.0, 0.1, 0.1}));
  templates.push_back(EmotionTemplate::from_apex(
      Emotion::Surprise,
      {0.5, -0.9, -0.2, -0.1, -0.2, -0.1, 1.2, 1.2, 0.1, 0.1, -0.6, -0.6}));
  templates.push_back(EmotionTemplate::from_apex(
      Emotion::Angry,
      {-0.4, 0.4, -0.3, -0.3, -0.3, -0.3, -1.0, -1.0, 0.2, 0.2, 0.3, 0.3}));
  templates.push_back(EmotionTemplate::from_apex(
      Emotion::Disgust,
      {0.9, 0.2, -0.1, -0.4, -0.1, -0.4, -0.5, -0.5, 0.7, 0.7, 0.4, 0.4}));
  templates.push_back(EmotionTemplate::from_apex(
      Emotion::Fear,
      {0.3, -0.5, 0.4, -0.5, 0.4, -0.5, 0.8, 0.8, 0.0, 0.0, -0.5, -0.5}));
  templates.push_back(EmotionTemplate::from_apex(
      Emotion::Sad,
      {-0.1, 0.3, -0.2, -0.8, -0.2, -0.8, 0.4, 0.4, -0.3, -0.3, 0.5, 0.5}));
  return templates;
}

std::vector<EmotionTemplate> load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open template file: " + path);
  std::vector<EmotionTemplate> templates;
  std::array<bool, kEmotionCount + 1> seen{};
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
    if (fields.size() != 1 + kMotionUnitCount) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 13 fields, got " +
                               std::to_string(fields.size()));
    }
    Emotion label;
    if (auto byname = emotion_from_name(fields[0])) {
      label = *byname;
    } else {
      try {
        label = emotion_from_code(std::stoi(fields[0]));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": unknown emotion '" + fields[0] + "'");
      }
    }
    if (seen[static_cast<int>(label)]) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": duplicate template for '" +
                               emotion_name(label) + "'");
    }
    seen[static_cast<int>(label)] = true;
    std::array<double, kMotionUnitCount> apex{};
    for (std::size_t i = 0; i < kMotionUnitCount; ++i) {
      try {
        apex[i] = std::stod(fields[1 + i]);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": bad apex value '" + fields[1 + i] + "'");
      }
      if (!std::isfinite(apex[i])) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": apex value is not finite");
      }
    }
    templates.push_back(EmotionTemplate::from_apex(label, apex));
  }
  if (templates.empty()) {
    throw std::runtime_error(path + ": no templates in file");
  }
  return templates;
}

Dataset generate(const std::vector<EmotionTemplate>& templates,
                 const SynthConfig& cfg) {
  cfg.validate();
  if (templates.empty()) throw std::invalid_argument("no emotion templates given");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_std > 0.0 ? cfg.noise_std : 1.0);
  const auto perturb = [&](double v) {
    return cfg.noise_std > 0.0 ? v + noise(rng) : v;
  };

  Dataset ds;
  for (const auto& tmpl : templates) {
    for (std::size_t s = 0; s < cfg.sequences_per_emotion; ++s) {
      LabeledSequence seq;
      seq.id = std::string(emotion_name(tmpl.label)) + "_" + std::to_string(s + 1);
      const std::size_t span = cfg.frames_per_sequence - cfg.neutral_prefix;
      for (std::size_t t = 0; t < cfg.frames_per_sequence; ++t) {
        Frame frame;
        frame.index = static_cast<std::int64_t>(t);
        frame.features.resize(kMotionUnitCount);
        if (t < cfg.neutral_prefix) {
          frame.label = Emotion::Neutral;
          for (double& v : frame.features) v = perturb(0.0);
        } else {
          frame.label = tmpl.label;
          const std::size_t k = t - cfg.neutral_prefix;
          const double u =
              span == 1 ? 0.5
                        : static_cast<double>(k) / static_cast<double>(span - 1);
          for (std::size_t mu = 0; mu < kMotionUnitCount; ++mu) {
            frame.features[mu] = perturb(bezier_eval(tmpl.control_points[mu], u));
          }
        }
        seq.frames.push_back(std::move(frame));
      }
      ds.sequences.push_back(std::move(seq));
    }
  }
  return ds;
}

}  // namespace emonet
