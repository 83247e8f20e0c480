#pragma once

// Seeded synthetic memory streams. Each sample is a short, time-ordered run of
// memories whose content drifts by a Gaussian random walk, so consecutive
// memories stay close in the memory metric.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfid/continuum.hpp"
#include "selfid/random.hpp"
#include "selfid/spaces.hpp"
#include "selfid/trainer.hpp"

namespace selfid {

struct GeneratorConfig {
  std::size_t n_samples = 500;
  std::size_t memories_per_sample = 10;
  std::size_t k_c = 16;
  double step_sigma = 0.1;
  double time_stride = 1.0;
  double emotion_min = 0.0;
  double emotion_max = 10.0;
  std::uint64_t seed = 0;

  std::vector<std::string> violations() const {
    std::vector<std::string> bad;
    if (n_samples == 0) bad.push_back("n_samples must be positive");
    if (memories_per_sample == 0) bad.push_back("memories_per_sample must be positive");
    if (k_c == 0) bad.push_back("k_c must be positive");
    if (!(step_sigma > 0.0)) bad.push_back("step_sigma must be positive");
    if (!(time_stride > 0.0)) bad.push_back("time_stride must be positive");
    if (!(emotion_min <= emotion_max)) bad.push_back("emotion_range must satisfy min <= max");
    return bad;
  }

  void validate() const {
    const auto bad = violations();
    if (bad.empty()) return;
    std::string msg = "invalid generator config:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw std::invalid_argument(msg);
  }
};

struct Sample {
  std::vector<Memory> memories;
};

struct DatasetManifest {
  GeneratorConfig config;
  MemoryMetricConfig metric;  // metric under which guaranteed_epsilon holds
  double guaranteed_epsilon = 0.0;
  std::vector<std::string> files;
};

struct GeneratedDataset {
  std::vector<Sample> samples;
  DatasetManifest manifest;

  std::vector<Memory> all_memories() const {
    std::vector<Memory> out;
    for (const auto& s : samples) out.insert(out.end(), s.memories.begin(), s.memories.end());
    return out;
  }
};

inline std::string memory_id(std::size_t sample, std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "s%04zu_m%02zu", sample, index);
  return buf;
}

// Largest distance between consecutive memories of any sample.
inline double max_consecutive_gap(std::span<const Sample> samples, const MemoryMetricConfig& metric) {
  double gap = 0.0;
  for (const auto& s : samples)
    for (std::size_t i = 1; i < s.memories.size(); ++i)
      gap = std::max(gap, memory_distance(s.memories[i - 1], s.memories[i], metric));
  return gap;
}

inline GeneratedDataset generate(const GeneratorConfig& cfg, const MemoryMetricConfig& metric = {}) {
  cfg.validate();
  metric.validate();
  GeneratedDataset ds;
  ds.samples.resize(cfg.n_samples);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> emotion(cfg.emotion_min, cfg.emotion_max);

  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    auto& mems = ds.samples[s].memories;
    Vector content(cfg.k_c);
    for (double& c : content) c = unit(rng);
    for (std::size_t i = 0; i < cfg.memories_per_sample; ++i) {
      if (i > 0)
        for (double& c : content) c += cfg.step_sigma * unit(rng);
      const double e = cfg.emotion_min == cfg.emotion_max ? cfg.emotion_min : emotion(rng);
      mems.push_back({memory_id(s, i), static_cast<double>(i) * cfg.time_stride, content, e});
    }
  }

  ds.manifest.config = cfg;
  ds.manifest.metric = metric;
  ds.manifest.guaranteed_epsilon =
      std::max(max_consecutive_gap(ds.samples, metric), std::numeric_limits<double>::min());
  for (const auto& s : ds.samples)
    if (!check_condition_1(s.memories, metric, ds.manifest.guaranteed_epsilon).is_single_continuum)
      throw std::logic_error("generated sample is not a continuum at its guaranteed epsilon");
  return ds;
}

// Targets are s* plus independent Gaussian noise per coordinate.
inline std::vector<LabeledMemory> label_with_target(std::span<const Sample> samples,
                                                    const SelfIdentity& s_star, double noise_sigma,
                                                    std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be nonnegative");
  std::vector<LabeledMemory> out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (const auto& s : samples)
    for (const auto& m : s.memories) {
      SelfIdentity target = s_star;
      if (noise_sigma > 0.0)
        for (double& v : target.attributes) v += noise_sigma * unit(rng);
      out.push_back({m, std::move(target)});
    }
  return out;
}

// Seeded visiting order over samples; memories inside a sample keep their order.
inline std::vector<std::size_t> shuffle_combinations(std::span<const Sample> samples,
                                                     std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("no samples to shuffle");
  return seeded_permutation(samples.size(), seed);
}

}  // namespace selfid
