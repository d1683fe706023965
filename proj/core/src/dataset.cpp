#include "emonet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace emonet {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

[[noreturn]] void line_error(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

const char* emotion_name(Emotion e) {
  switch (e) {
    case Emotion::Neutral: return "neutral";
    case Emotion::Joy: return "joy";
    case Emotion::Surprise: return "surprise";
    case Emotion::Angry: return "angry";
    case Emotion::Disgust: return "disgust";
    case Emotion::Fear: return "fear";
    case Emotion::Sad: return "sad";
  }
  return "unknown";
}

Emotion emotion_from_code(int code) {
  if (code < 1 || code > kEmotionCount) {
    throw std::invalid_argument("emotion code " + std::to_string(code) +
                                " outside [1, 7]");
  }
  return static_cast<Emotion>(code);
}

std::optional<Emotion> emotion_from_name(std::string_view name) {
  const std::string n = lower(name);
  for (int code = 1; code <= kEmotionCount; ++code) {
    const auto e = static_cast<Emotion>(code);
    if (n == emotion_name(e)) return e;
  }
  if (n == "anger") return Emotion::Angry;  // common alias
  return std::nullopt;
}

std::size_t Dataset::frame_count() const {
  std::size_t n = 0;
  for (const auto& seq : sequences) n += seq.frames.size();
  return n;
}

std::vector<std::pair<std::vector<double>, Emotion>> Dataset::flattened() const {
  std::vector<std::pair<std::vector<double>, Emotion>> out;
  out.reserve(frame_count());
  for (const auto& seq : sequences) {
    for (const auto& f : seq.frames) out.emplace_back(f.features, f.label);
  }
  return out;
}

std::map<Emotion, std::size_t> Dataset::class_counts() const {
  std::map<Emotion, std::size_t> counts;
  for (const auto& seq : sequences) {
    for (const auto& f : seq.frames) ++counts[f.label];
  }
  return counts;
}

void Dataset::validate() const {
  for (const auto& seq : sequences) {
    if (seq.frames.empty()) {
      throw std::invalid_argument("sequence '" + seq.id + "' has no frames");
    }
    std::int64_t prev = 0;
    bool first = true;
    for (const auto& f : seq.frames) {
      if (!first && f.index <= prev) {
        throw std::invalid_argument("sequence '" + seq.id +
                                    "': frame indices must strictly increase");
      }
      prev = f.index;
      first = false;
      if (f.features.size() != kMotionUnitCount) {
        throw std::invalid_argument("sequence '" + seq.id + "': frame " +
                                    std::to_string(f.index) + " has " +
                                    std::to_string(f.features.size()) +
                                    " features, expected 12");
      }
      for (double v : f.features) {
        if (!std::isfinite(v)) {
          throw std::invalid_argument("sequence '" + seq.id + "': frame " +
                                      std::to_string(f.index) +
                                      " has a non-finite feature");
        }
      }
    }
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  Dataset ds;
  std::map<std::string, std::size_t> index_of;  // sequence id -> position
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    const auto fields = split_fields(line);
    if (fields.size() != 2 + kMotionUnitCount + 1) {
      line_error(path, lineno,
                 "expected 15 comma-separated fields, got " +
                     std::to_string(fields.size()));
    }

    Frame frame;
    const std::string& id = fields[0];
    if (id.empty()) line_error(path, lineno, "empty sequence id");
    try {
      frame.index = std::stoll(fields[1]);
    } catch (const std::exception&) {
      line_error(path, lineno, "bad frame index '" + fields[1] + "'");
    }
    frame.features.resize(kMotionUnitCount);
    for (std::size_t i = 0; i < kMotionUnitCount; ++i) {
      try {
        std::size_t pos = 0;
        frame.features[i] = std::stod(fields[2 + i], &pos);
        if (pos != fields[2 + i].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        line_error(path, lineno, "bad mu" + std::to_string(i + 1) + " value '" +
                                     fields[2 + i] + "'");
      }
      if (!std::isfinite(frame.features[i])) {
        line_error(path, lineno, "mu" + std::to_string(i + 1) + " is not finite");
      }
    }
    int code = 0;
    try {
      code = std::stoi(fields.back());
    } catch (const std::exception&) {
      line_error(path, lineno, "bad label '" + fields.back() + "'");
    }
    if (code < 1 || code > kEmotionCount) {
      line_error(path, lineno,
                 "label " + std::to_string(code) + " outside [1, 7]");
    }
    frame.label = static_cast<Emotion>(code);

    auto [it, inserted] = index_of.try_emplace(id, ds.sequences.size());
    if (inserted) {
      ds.sequences.push_back(LabeledSequence{id, {}});
    }
    auto& seq = ds.sequences[it->second];
    if (!seq.frames.empty() && frame.index <= seq.frames.back().index) {
      line_error(path, lineno, "frame index " + std::to_string(frame.index) +
                                   " not increasing within sequence '" + id + "'");
    }
    seq.frames.push_back(std::move(frame));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path);
  out << "# sequence_id,frame_index,mu1..mu12,label\n";
  for (const auto& seq : ds.sequences) {
    if (seq.id.find(',') != std::string::npos) {
      throw std::invalid_argument("sequence id '" + seq.id + "' contains a comma");
    }
    for (const auto& f : seq.frames) {
      out << seq.id << ',' << f.index;
      for (double v : f.features) out << ',' << format_double(v);
      out << ',' << static_cast<int>(f.label) << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing dataset file: " + path);
}

Dataset take_peak_frames(const Dataset& ds, std::size_t neutral_count,
                         std::size_t peak_count) {
  Dataset out;
  for (const auto& seq : ds.sequences) {
    // Locate the neutral prefix and the single non-neutral span.
    std::size_t span_begin = 0;
    while (span_begin < seq.frames.size() &&
           seq.frames[span_begin].label == Emotion::Neutral) {
      ++span_begin;
    }
    for (std::size_t i = span_begin; i < seq.frames.size(); ++i) {
      if (seq.frames[i].label == Emotion::Neutral) {
        throw std::invalid_argument(
            "sequence '" + seq.id +
            "': neutral frames reappear after the emotion span starts");
      }
    }

    LabeledSequence kept{seq.id, {}};
    const std::size_t neutral_keep = std::min(neutral_count, span_begin);
    for (std::size_t i = 0; i < neutral_keep; ++i) {
      kept.frames.push_back(seq.frames[i]);
    }

    const std::size_t span_len = seq.frames.size() - span_begin;
    if (span_len > 0 && peak_count > 0) {
      const std::size_t center = span_begin + span_len / 2;
      std::size_t lo = center - std::min(center - span_begin, (peak_count - 1) / 2);
      std::size_t hi = std::min(seq.frames.size() - 1, center + peak_count / 2);
      for (std::size_t i = lo; i <= hi; ++i) {
        kept.frames.push_back(seq.frames[i]);
      }
    }
    if (!kept.frames.empty()) out.sequences.push_back(std::move(kept));
  }
  return out;
}

Dataset exclude_neutral(const Dataset& ds) {
  Dataset out;
  for (const auto& seq : ds.sequences) {
    LabeledSequence kept{seq.id, {}};
    for (const auto& f : seq.frames) {
      if (f.label != Emotion::Neutral) kept.frames.push_back(f);
    }
    if (!kept.frames.empty()) out.sequences.push_back(std::move(kept));
  }
  return out;
}

Dataset sort_and_balance(const Dataset& ds, std::uint64_t seed, bool sample) {
  // Gather frames per class in dataset order.
  std::map<Emotion, std::vector<const Frame*>> by_class;
  for (const auto& seq : ds.sequences) {
    for (const auto& f : seq.frames) by_class[f.label].push_back(&f);
  }
  if (by_class.empty()) return {};

  std::size_t m = SIZE_MAX;
  for (const auto& [label, frames] : by_class) m = std::min(m, frames.size());

  std::mt19937_64 rng(seed);
  Dataset out;
  for (auto& [label, frames] : by_class) {  // std::map iterates in code order
    std::vector<const Frame*> chosen;
    if (sample) {
      std::vector<std::size_t> idx(frames.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(m);
      std::sort(idx.begin(), idx.end());  // keep dataset order among selected
      for (std::size_t i : idx) chosen.push_back(frames[i]);
    } else {
      chosen.assign(frames.begin(), frames.begin() + m);
    }
    LabeledSequence group{std::string("balanced_") + emotion_name(label), {}};
    std::int64_t next_index = 0;
    for (const Frame* f : chosen) {
      group.frames.push_back(Frame{next_index++, f->features, f->label});
    }
    out.sequences.push_back(std::move(group));
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction,
                                  SplitMode by, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must be in (0, 1)");
  }
  std::mt19937_64 rng(seed);

  if (by == SplitMode::Sequence) {
    const std::size_t n = ds.sequences.size();
    const auto n_train =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n) {
      throw std::invalid_argument("split would leave one side empty (" +
                                  std::to_string(n_train) + " of " +
                                  std::to_string(n) + " sequences)");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;

    Dataset train, test;
    for (std::size_t i = 0; i < n; ++i) {
      (in_train[i] ? train : test).sequences.push_back(ds.sequences[i]);
    }
    return {std::move(train), std::move(test)};
  }

  // Frame mode: split the flattened view, preserving order on both sides.
  const std::size_t n = ds.frame_count();
  const auto n_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) {
    throw std::invalid_argument("split would leave one side empty (" +
                                std::to_string(n_train) + " of " +
                                std::to_string(n) + " frames)");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = true;

  Dataset train, test;
  std::size_t flat = 0;
  for (const auto& seq : ds.sequences) {
    LabeledSequence tr{seq.id, {}}, te{seq.id, {}};
    for (const auto& f : seq.frames) {
      (in_train[flat++] ? tr : te).frames.push_back(f);
    }
    if (!tr.frames.empty()) train.sequences.push_back(std::move(tr));
    if (!te.frames.empty()) test.sequences.push_back(std::move(te));
  }
  return {std::move(train), std::move(test)};
}

CategoryScheme CategoryScheme::all() {
  std::vector<Emotion> labels;
  for (int code = 1; code <= kEmotionCount; ++code) {
    labels.push_back(static_cast<Emotion>(code));
  }
  return subset(std::move(labels));
}

CategoryScheme CategoryScheme::subset(std::vector<Emotion> labels) {
  if (labels.empty()) throw std::invalid_argument("category subset is empty");
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  CategoryScheme scheme;
  for (Emotion e : labels) {
    scheme.node_by_code[static_cast<int>(e)] =
        static_cast<int>(scheme.names.size());
    scheme.names.emplace_back(emotion_name(e));
  }
  return scheme;
}

CategoryScheme CategoryScheme::merged(
    const std::vector<std::pair<std::string, std::vector<Emotion>>>& groups) {
  if (groups.empty()) throw std::invalid_argument("category groups are empty");
  CategoryScheme scheme;
  for (const auto& [name, members] : groups) {
    if (name.empty()) throw std::invalid_argument("category name is empty");
    if (members.empty()) {
      throw std::invalid_argument("category '" + name + "' has no members");
    }
    const int node = static_cast<int>(scheme.names.size());
    for (Emotion e : members) {
      if (scheme.node_by_code[static_cast<int>(e)] != -1) {
        throw std::invalid_argument(std::string("emotion '") + emotion_name(e) +
                                    "' appears in two categories");
      }
      scheme.node_by_code[static_cast<int>(e)] = node;
    }
    scheme.names.push_back(name);
  }
  return scheme;
}

std::vector<TrainingPair> to_training_pairs(const Dataset& ds,
                                            const CategoryScheme& scheme) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(ds.frame_count());
  for (const auto& seq : ds.sequences) {
    for (const auto& f : seq.frames) {
      const int node = scheme.node_for(f.label);
      if (node < 0) {
        throw std::invalid_argument(std::string("label '") +
                                    emotion_name(f.label) +
                                    "' is outside the category scheme");
      }
      std::vector<double> target(scheme.size(), 0.0);
      target[static_cast<std::size_t>(node)] = 1.0;
      pairs.emplace_back(f.features, std::move(target));
    }
  }
  return pairs;
}

}  // namespace emonet
