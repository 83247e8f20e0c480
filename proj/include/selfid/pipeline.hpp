#pragma once

// Experiment commands behind the CLI: generate, train, verify, textmetrics and
// report. Each reads and writes files under the configured output directory.

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "selfid/config.hpp"
#include "selfid/io.hpp"
#include "selfid/synthdata.hpp"
#include "selfid/textmetrics.hpp"
#include "selfid/trainer.hpp"

namespace selfid {

namespace fs = std::filesystem;

namespace files {
inline constexpr const char* kDataset = "dataset.json";
inline constexpr const char* kLabels = "labels.json";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kConfigEcho = "config.resolved.json";
inline constexpr const char* kInitialCheckpoint = "checkpoint_initial.json";
inline constexpr const char* kFinalCheckpoint = "checkpoint_final.json";
inline constexpr const char* kCheckpointDir = "checkpoints";
inline constexpr const char* kTrace = "trace.csv";
inline constexpr const char* kEpochLoss = "epoch_loss.csv";
inline constexpr const char* kTrainSummary = "train_summary.json";
inline constexpr const char* kTextReport = "textmetrics_report.json";
inline constexpr const char* kFrequency = "frequency_comparison.csv";
inline constexpr const char* kPromptScores = "prompt_scores.csv";
inline constexpr const char* kReport = "report.json";
}  // namespace files

// W0 as a sum of base_rank scaled outer products of random unit vectors.
inline Matrix random_base_weights(std::size_t n, std::size_t k, std::size_t base_rank, double scale,
                                  std::uint64_t seed) {
  Matrix w(n, k);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t q = 0; q < base_rank; ++q) {
    Vector u(n), v(k);
    for (double& x : u) x = unit(rng);
    for (double& x : v) x = unit(rng);
    const double nu = norm2(u), nv = norm2(v);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) w(i, j) += scale * (u[i] / nu) * (v[j] / nv);
  }
  return w;
}

inline AdaptedRecognizer initial_recognizer(const ExperimentConfig& cfg) {
  const auto& r = cfg.recognizer;
  const std::size_t k = cfg.generator.k_c + 2;
  Vector bias = r.bias == "target" ? cfg.s_star() : Vector(r.n, 0.0);
  return make_recognizer(random_base_weights(r.n, k, r.base_rank, r.base_scale, cfg.sub_seed(SeedStream::Base)),
                         std::move(bias), r.rank, r.alpha, {r.time_scale, r.emotion_scale},
                         cfg.sub_seed(SeedStream::Adapter), r.adapter_init_std);
}

// Two atoms: s* and a decoy offset along the first axis.
inline IdentityMeasure default_measure(const ExperimentConfig& cfg) {
  SelfIdentity s_star{cfg.s_star()};
  SelfIdentity decoy = s_star;
  decoy.attributes[0] += cfg.decoy_distance;
  return {{s_star, decoy}, {1.0, 1.0}};
}

inline IdentityMeasure resolve_measure(const ExperimentConfig& cfg) {
  if (!cfg.measure) return default_measure(cfg);
  return io::measure_from_json(io::load_json(*cfg.measure));
}

inline double resolve_epsilon(const ExperimentConfig& cfg, std::span<const Memory> memories) {
  if (cfg.epsilon.policy == "explicit") return cfg.epsilon.value;
  const double e = minimal_connecting_epsilon(pairwise_distance_matrix(memories, cfg.memory_metric));
  return std::max(e, std::numeric_limits<double>::min());
}

inline fs::path out_dir(const ExperimentConfig& cfg, const std::optional<fs::path>& override_dir) {
  return override_dir ? *override_dir : fs::path(cfg.output_dir);
}

struct GenerateOutputs {
  GeneratedDataset dataset;
  std::vector<LabeledMemory> labels;
};

inline GenerateOutputs cmd_generate(const ExperimentConfig& cfg, const fs::path& out) {
  GenerateOutputs result{generate(cfg.generator, cfg.memory_metric), {}};
  result.labels = label_with_target(result.dataset.samples, {cfg.s_star()}, cfg.labels.noise_sigma,
                                    cfg.sub_seed(SeedStream::Labels));
  auto& manifest = result.dataset.manifest;
  manifest.files = {files::kDataset, files::kLabels, files::kConfigEcho};

  fs::create_directories(out);
  io::write_file(out / files::kDataset,
                 io::dump(io::to_json(MemorySet{cfg.generator.k_c, result.dataset.all_memories()})));
  io::write_file(out / files::kLabels, io::dump(io::labels_to_json(result.labels)));
  io::write_file(out / files::kManifest, io::dump(io::to_json(manifest, result.dataset.samples)));
  io::write_file(out / files::kConfigEcho, io::dump(config_to_json(cfg)));
  return result;
}

inline MemorySet load_dataset(const fs::path& out) {
  const auto path = out / files::kDataset;
  if (!fs::exists(path)) throw io::FormatError("dataset not found at '" + path.string() + "'; run generate first");
  return io::memory_set_from_json(io::load_json(path));
}

inline std::string checkpoint_name(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%03zu.json", epoch);
  return buf;
}

inline TrainResult cmd_train(const ExperimentConfig& cfg, const fs::path& out) {
  const auto set = load_dataset(out);
  const auto labels = io::labels_from_json(io::load_json(out / files::kLabels), set.memories);
  if (set.k_c != cfg.generator.k_c)
    throw ConfigError("dataset k_c does not match generator.k_c in the config");
  const auto initial = initial_recognizer(cfg);
  auto result = train(initial, labels, cfg.train);

  io::write_file(out / files::kInitialCheckpoint, io::dump(io::to_json(initial)));
  for (const auto& cp : result.trace.checkpoints)
    io::write_file(out / files::kCheckpointDir / checkpoint_name(cp.epoch), io::dump(io::to_json(cp.recognizer)));
  io::write_file(out / files::kFinalCheckpoint, io::dump(io::to_json(result.recognizer)));
  io::write_file(out / files::kTrace, io::trace_csv(result.trace));
  io::write_file(out / files::kEpochLoss, io::epoch_loss_csv(result.trace));
  io::write_file(out / files::kTrainSummary, io::dump(io::trace_summary(result.trace)));
  return result;
}

inline fs::path verdict_path(const fs::path& out, const fs::path& checkpoint) {
  return out / ("verdict_" + checkpoint.stem().string() + ".json");
}

inline SelfVerdict cmd_verify(const ExperimentConfig& cfg, const fs::path& checkpoint, const fs::path& out) {
  const auto set = load_dataset(out);
  if (!fs::exists(checkpoint)) throw io::FormatError("checkpoint not found at '" + checkpoint.string() + "'");
  const auto rec = io::recognizer_from_json(io::load_json(checkpoint));
  const auto mu = resolve_measure(cfg);
  const double epsilon = resolve_epsilon(cfg, set.memories);
  auto verdict = verify_self_possession(rec, set.memories, cfg.memory_metric, epsilon, mu, cfg.tau,
                                        BeliefThreshold(cfg.threshold), cfg.delta_s);
  auto j = io::to_json(verdict);
  j["checkpoint"] = checkpoint.filename().string();
  io::write_file(verdict_path(out, checkpoint), io::dump(j));
  return verdict;
}

struct TextMetricsOutputs {
  CorpusStats before;
  CorpusStats after;
  std::vector<FrequencyRow> frequencies;
  ImprovementReport report;
};

inline TextMetricsOutputs cmd_textmetrics(const fs::path& before_path, const fs::path& after_path,
                                          std::size_t top_n, const fs::path& out,
                                          std::optional<LossPair> loss = std::nullopt) {
  const auto before = io::load_jsonl(before_path);
  const auto after = io::load_jsonl(after_path);
  if (before.empty() || after.empty()) throw io::FormatError("both corpora must contain at least one record");
  TextMetricsOutputs r{corpus_stats(before), corpus_stats(after), frequency_comparison(before, after, top_n), {}};
  r.report = improvement_report(r.before, r.after, loss, prompt_means(before), prompt_means(after));

  auto j = io::to_json(r.report);
  j["before"] = io::to_json(r.before);
  j["after"] = io::to_json(r.after);
  io::write_file(out / files::kTextReport, io::dump(j));
  io::write_file(out / files::kFrequency, io::frequency_csv(r.frequencies));
  io::write_file(out / files::kPromptScores, "corpus,epoch,prompt_id,n,mean_score,std_score\n" +
                                                 io::prompt_scores_csv(prompt_score_table(before), "before") +
                                                 io::prompt_scores_csv(prompt_score_table(after), "after"));
  return r;
}

// Collects whatever earlier commands left in the output directory.
inline io::json cmd_report(const fs::path& out) {
  io::json report = io::json::object();
  if (fs::exists(out / files::kManifest)) {
    const auto m = io::load_json(out / files::kManifest);
    report["dataset"] = {{"samples", m.at("samples").size()}, {"guaranteed_epsilon", m.at("guaranteed_epsilon")}};
  }
  if (fs::exists(out / files::kTrainSummary)) report["training"] = io::load_json(out / files::kTrainSummary);
  if (fs::exists(out)) {
    std::vector<fs::path> verdicts;
    for (const auto& entry : fs::directory_iterator(out)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("verdict_", 0) == 0 && entry.path().extension() == ".json") verdicts.push_back(entry.path());
    }
    std::sort(verdicts.begin(), verdicts.end());
    for (const auto& p : verdicts) {
      const auto v = io::load_json(p);
      report["verdicts"][p.stem().string()] = {{"condition1", v.at("condition1")},
                                               {"condition2", v.at("condition2")},
                                               {"possesses_self", v.at("possesses_self")},
                                               {"s_star", v.at("s_star")},
                                               {"max_d_s_to_s_star", v.at("max_d_s_to_s_star")},
                                               {"min_belief_at_s_star", v.at("min_belief_at_s_star")}};
    }
  }
  if (fs::exists(out / files::kTextReport)) report["textmetrics"] = io::load_json(out / files::kTextReport);
  io::write_file(out / files::kReport, io::dump(report));
  return report;
}

}  // namespace selfid
