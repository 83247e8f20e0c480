#pragma once

// Experiment configuration: one JSON document, every field optional, unknown
// fields rejected. A single top-level seed derives all sub-seeds.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "selfid/io.hpp"
#include "selfid/random.hpp"

namespace selfid {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// How the base map W0 and bias of a fresh recognizer are drawn.
struct RecognizerConfig {
  std::size_t n = 8;
  std::size_t rank = 8;
  double alpha = 8.0;
  double time_scale = 1.0;
  double emotion_scale = 1.0;
  std::size_t base_rank = 1;  // W0 is a sum of base_rank random unit outer products
  double base_scale = 1.0;
  std::string bias = "target";  // "target" (bias = s*) or "zero"
  double adapter_init_std = 0.02;
};

struct LabelConfig {
  std::optional<Vector> s_star;  // defaults to all ones of dimension n
  double noise_sigma = 0.0;
};

struct EpsilonPolicy {
  std::string policy = "mst-auto";  // or "explicit"
  double value = 0.0;
};

// Named sub-seed streams.
enum class SeedStream : std::uint64_t { Generator, Labels, Adapter, Base, Training, Diagnostics };

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  GeneratorConfig generator;
  MemoryMetricConfig memory_metric;
  SelfMetricConfig self_metric;
  RecognizerConfig recognizer;
  LabelConfig labels;
  TrainConfig train;
  std::optional<std::string> measure;  // path; default is {s*, decoy}
  double decoy_distance = 1.0;
  double tau = 0.1;
  double threshold = 0.8;
  double delta_s = 0.05;
  EpsilonPolicy epsilon;

  std::uint64_t sub_seed(SeedStream s) const { return mix_seed(seed, static_cast<std::uint64_t>(s)); }

  Vector s_star() const { return labels.s_star.value_or(Vector(recognizer.n, 1.0)); }

  std::vector<std::string> violations() const {
    std::vector<std::string> bad = generator.violations();
    auto check = [&](bool ok, const char* msg) {
      if (!ok) bad.emplace_back(msg);
    };
    try { memory_metric.validate(); } catch (const std::exception& e) { bad.emplace_back(e.what()); }
    try { self_metric.validate(); } catch (const std::exception& e) { bad.emplace_back(e.what()); }
    try { train.validate(); } catch (const std::exception& e) { bad.emplace_back(e.what()); }
    const std::size_t k = generator.k_c + 2;
    check(recognizer.n > 0, "recognizer.n must be positive");
    check(recognizer.rank > 0 && recognizer.rank <= std::min(recognizer.n, k),
          "recognizer.rank must be in 1..min(n, k_c + 2)");
    check(recognizer.alpha > 0.0, "recognizer.alpha must be positive");
    check(recognizer.base_rank <= std::min(recognizer.n, k), "recognizer.base_rank must be <= min(n, k_c + 2)");
    check(recognizer.bias == "target" || recognizer.bias == "zero", "recognizer.bias must be 'target' or 'zero'");
    check(recognizer.adapter_init_std >= 0.0, "recognizer.adapter_init_std must be nonnegative");
    check(s_star().size() == recognizer.n, "labels.s_star must have dimension recognizer.n");
    check(labels.noise_sigma >= 0.0, "labels.noise_sigma must be nonnegative");
    check(decoy_distance > 0.0, "decoy_distance must be positive");
    check(tau > 0.0, "tau must be positive");
    check(threshold > 0.0 && threshold <= 1.0, "threshold must be in (0, 1]");
    check(delta_s >= 0.0, "delta_s must be nonnegative");
    check(epsilon.policy == "mst-auto" || epsilon.policy == "explicit",
          "epsilon.policy must be 'mst-auto' or 'explicit'");
    check(epsilon.policy != "explicit" || epsilon.value > 0.0, "explicit epsilon.value must be positive");
    return bad;
  }
};

namespace detail {

// Reads fields from one JSON object and remembers which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const io::json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) errors_.push_back(path_ + " must be a JSON object");
  }

  ~ObjectReader() {
    if (!j_.is_object()) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) errors_.push_back("unknown field '" + qualified(key) + "'");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const io::json::exception&) {
      errors_.push_back("field '" + qualified(key) + "' has the wrong type");
    }
  }

  const io::json* child(const char* key) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const io::json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline ExperimentConfig parse_config(const io::json& j) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  {
    detail::ObjectReader top(j, "", errors);
    top.read("seed", cfg.seed);
    top.read("output_dir", cfg.output_dir);
    top.read("decoy_distance", cfg.decoy_distance);
    top.read("tau", cfg.tau);
    top.read("threshold", cfg.threshold);
    top.read("delta_s", cfg.delta_s);
    if (const auto* m = top.child("measure"); m && !m->is_null()) {
      if (m->is_string()) cfg.measure = m->get<std::string>();
      else errors.push_back("field 'measure' must be a path string or null");
    }
    if (const auto* g = top.child("generator")) {
      detail::ObjectReader r(*g, "generator", errors);
      auto& c = cfg.generator;
      r.read("n_samples", c.n_samples);
      r.read("memories_per_sample", c.memories_per_sample);
      r.read("k_c", c.k_c);
      r.read("step_sigma", c.step_sigma);
      r.read("time_stride", c.time_stride);
      std::vector<double> range{c.emotion_min, c.emotion_max};
      r.read("emotion_range", range);
      if (range.size() == 2) {
        c.emotion_min = range[0];
        c.emotion_max = range[1];
      } else {
        errors.push_back("generator.emotion_range must be [min, max]");
      }
    }
    if (const auto* m = top.child("memory_metric")) {
      detail::ObjectReader r(*m, "memory_metric", errors);
      auto& c = cfg.memory_metric;
      r.read("w_t", c.w_t);
      r.read("w_c", c.w_c);
      r.read("w_e", c.w_e);
      std::string kind = "euclidean";
      r.read("content_metric", kind);
      if (kind == "euclidean") c.content_metric = ContentMetric::Euclidean;
      else if (kind == "cosine") c.content_metric = ContentMetric::CosineDistance;
      else errors.push_back("memory_metric.content_metric must be 'euclidean' or 'cosine'");
    }
    if (const auto* s = top.child("self_metric")) {
      detail::ObjectReader r(*s, "self_metric", errors);
      r.read("p", cfg.self_metric.p);
    }
    if (const auto* rc = top.child("recognizer")) {
      detail::ObjectReader r(*rc, "recognizer", errors);
      auto& c = cfg.recognizer;
      r.read("n", c.n);
      r.read("rank", c.rank);
      r.read("alpha", c.alpha);
      r.read("time_scale", c.time_scale);
      r.read("emotion_scale", c.emotion_scale);
      r.read("base_rank", c.base_rank);
      r.read("base_scale", c.base_scale);
      r.read("bias", c.bias);
      r.read("adapter_init_std", c.adapter_init_std);
    }
    if (const auto* l = top.child("labels")) {
      detail::ObjectReader r(*l, "labels", errors);
      Vector s;
      r.read("s_star", s);
      if (!s.empty()) cfg.labels.s_star = s;
      r.read("noise_sigma", cfg.labels.noise_sigma);
    }
    if (const auto* t = top.child("train")) {
      detail::ObjectReader r(*t, "train", errors);
      auto& c = cfg.train;
      r.read("learning_rate", c.learning_rate);
      r.read("epochs", c.epochs);
      r.read("batch_size", c.batch_size);
      r.read("grad_accum_steps", c.grad_accum_steps);
      r.read("clip_max_norm", c.clip_max_norm);
      r.read("weight_decay", c.weight_decay);
      std::string opt = "adamw";
      r.read("optimizer", opt);
      if (opt == "adamw") c.optimizer = OptimizerKind::AdamW;
      else if (opt == "plain_gd") c.optimizer = OptimizerKind::PlainGD;
      else errors.push_back("train.optimizer must be 'adamw' or 'plain_gd'");
      r.read("adam_beta1", c.adam_beta1);
      r.read("adam_beta2", c.adam_beta2);
      r.read("adam_eps", c.adam_eps);
      r.read("eval_every_epochs", c.eval_every_epochs);
    }
    if (const auto* e = top.child("epsilon")) {
      detail::ObjectReader r(*e, "epsilon", errors);
      r.read("policy", cfg.epsilon.policy);
      r.read("value", cfg.epsilon.value);
    }
  }
  if (errors.empty()) errors = cfg.violations();
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  cfg.generator.seed = cfg.sub_seed(SeedStream::Generator);
  cfg.train.seed = cfg.sub_seed(SeedStream::Training);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(io::load_json(path));
  } catch (const io::FormatError& e) {
    throw ConfigError(e.what());
  }
}

// Fully resolved echo; parsing it back yields the same configuration.
inline io::json config_to_json(const ExperimentConfig& c) {
  const auto& g = c.generator;
  const auto& t = c.train;
  const auto& r = c.recognizer;
  return {
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"generator",
       {{"n_samples", g.n_samples},
        {"memories_per_sample", g.memories_per_sample},
        {"k_c", g.k_c},
        {"step_sigma", g.step_sigma},
        {"time_stride", g.time_stride},
        {"emotion_range", {g.emotion_min, g.emotion_max}}}},
      {"memory_metric", io::to_json(c.memory_metric)},
      {"self_metric", {{"p", c.self_metric.p}}},
      {"recognizer",
       {{"n", r.n},
        {"rank", r.rank},
        {"alpha", r.alpha},
        {"time_scale", r.time_scale},
        {"emotion_scale", r.emotion_scale},
        {"base_rank", r.base_rank},
        {"base_scale", r.base_scale},
        {"bias", r.bias},
        {"adapter_init_std", r.adapter_init_std}}},
      {"labels", {{"s_star", c.s_star()}, {"noise_sigma", c.labels.noise_sigma}}},
      {"train",
       {{"learning_rate", t.learning_rate},
        {"epochs", t.epochs},
        {"batch_size", t.batch_size},
        {"grad_accum_steps", t.grad_accum_steps},
        {"clip_max_norm", t.clip_max_norm},
        {"weight_decay", t.weight_decay},
        {"optimizer", t.optimizer == OptimizerKind::AdamW ? "adamw" : "plain_gd"},
        {"adam_beta1", t.adam_beta1},
        {"adam_beta2", t.adam_beta2},
        {"adam_eps", t.adam_eps},
        {"eval_every_epochs", t.eval_every_epochs}}},
      {"measure", c.measure ? io::json(*c.measure) : io::json(nullptr)},
      {"decoy_distance", c.decoy_distance},
      {"tau", c.tau},
      {"threshold", c.threshold},
      {"delta_s", c.delta_s},
      {"epsilon", {{"policy", c.epsilon.policy}, {"value", c.epsilon.value}}}};
}

}  // namespace selfid
