#pragma once

// JSON and CSV persistence for every artifact the pipeline reads or writes.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "selfid/belief.hpp"
#include "selfid/continuum.hpp"
#include "selfid/recognition.hpp"
#include "selfid/spaces.hpp"
#include "selfid/synthdata.hpp"
#include "selfid/textmetrics.hpp"
#include "selfid/trainer.hpp"

namespace selfid::io {

using json = nlohmann::json;

// Raised for unreadable or malformed input files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(origin + ": " + e.what());
  }
}

inline json load_json(const std::filesystem::path& path) {
  return parse_json(read_file(path), path.string());
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(context + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(context + ": field '" + key + "': " + e.what());
  }
}

// ---- memories ------------------------------------------------------------

inline json to_json(const Memory& m) {
  return {{"id", m.id}, {"t", m.time}, {"content", m.content}, {"e", m.emotion}};
}

inline Memory memory_from_json(const json& j) {
  const std::string ctx = "memory";
  return {get_field<std::string>(j, "id", ctx), get_field<double>(j, "t", ctx),
          get_field<Vector>(j, "content", ctx), get_field<double>(j, "e", ctx)};
}

inline json to_json(const MemorySet& set) {
  json mems = json::array();
  for (const auto& m : set.memories) mems.push_back(to_json(m));
  return {{"k_c", set.k_c}, {"memories", std::move(mems)}};
}

inline MemorySet memory_set_from_json(const json& j) {
  MemorySet set;
  set.k_c = get_field<std::size_t>(j, "k_c", "memory set");
  const auto& mems = j.at("memories");
  if (!mems.is_array()) throw FormatError("memory set: 'memories' must be an array");
  for (const auto& m : mems) set.memories.push_back(memory_from_json(m));
  try {
    set.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("memory set: ") + e.what());
  }
  return set;
}

inline std::string distance_matrix_csv(const DistanceMatrix& d, std::span<const MemoryId> ids) {
  if (ids.size() != d.size()) throw std::invalid_argument("id count does not match matrix size");
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) out += (i ? "," : "") + ids[i];
  out += "\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) out += (j ? "," : "") + format_double(d(i, j));
    out += "\n";
  }
  return out;
}

// ---- continuum -----------------------------------------------------------

inline json to_json(const ContinuumReport& r) {
  json j = {{"epsilon", r.epsilon}, {"components", r.components},
            {"single_continuum", r.is_single_continuum}};
  if (!r.witness_paths.empty()) {
    json paths = json::array();
    for (const auto& [ends, path] : r.witness_paths)
      paths.push_back({{"from", ends.first}, {"to", ends.second}, {"path", path}});
    j["witness_paths"] = std::move(paths);
  }
  return j;
}

// ---- recognizer checkpoints ----------------------------------------------

inline json to_json(const AdaptedRecognizer& rec) {
  return {{"n", rec.output_dim()},
          {"k", rec.input_dim()},
          {"rank", rec.rank()},
          {"alpha", rec.alpha},
          {"seed", rec.seed},
          {"time_scale", rec.scaling.time_scale},
          {"emotion_scale", rec.scaling.emotion_scale},
          {"base_weights", rec.base_weights.row_major()},
          {"base_bias", rec.base_bias},
          {"adapter_a", rec.adapter_a.row_major()},
          {"adapter_b", rec.adapter_b.row_major()}};
}

inline AdaptedRecognizer recognizer_from_json(const json& j) {
  const std::string ctx = "checkpoint";
  const auto n = get_field<std::size_t>(j, "n", ctx);
  const auto k = get_field<std::size_t>(j, "k", ctx);
  const auto r = get_field<std::size_t>(j, "rank", ctx);
  try {
    AdaptedRecognizer rec{Matrix(n, k, get_field<std::vector<double>>(j, "base_weights", ctx)),
                          get_field<Vector>(j, "base_bias", ctx),
                          Matrix(n, r, get_field<std::vector<double>>(j, "adapter_a", ctx)),
                          Matrix(r, k, get_field<std::vector<double>>(j, "adapter_b", ctx)),
                          get_field<double>(j, "alpha", ctx),
                          {get_field<double>(j, "time_scale", ctx), get_field<double>(j, "emotion_scale", ctx)},
                          get_field<std::uint64_t>(j, "seed", ctx)};
    rec.validate();
    return rec;
  } catch (const std::invalid_argument& e) {
    throw FormatError(ctx + ": " + e.what());
  }
}

// ---- belief --------------------------------------------------------------

inline json to_json(const IdentityMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms) atoms.push_back(a.attributes);
  return {{"atoms", std::move(atoms)}, {"weights", mu.weights}};
}

inline IdentityMeasure measure_from_json(const json& j) {
  IdentityMeasure mu;
  for (auto& a : get_field<std::vector<Vector>>(j, "atoms", "identity measure"))
    mu.atoms.push_back({std::move(a)});
  mu.weights = get_field<std::vector<double>>(j, "weights", "identity measure");
  try {
    mu.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("identity measure: ") + e.what());
  }
  return mu;
}

inline json to_json(const Condition2Verdict& v) {
  json rows = json::array();
  for (const auto& r : v.rows)
    rows.push_back({{"memory_id", r.memory_id},
                    {"d_s_to_s_star", r.distance_to_s_star},
                    {"belief_at_s_star", r.belief_at_s_star},
                    {"pass", r.passed()}});
  return {{"s_star_index", v.s_star_index},
          {"s_star", v.s_star.attributes},
          {"mean_output", v.mean_output.attributes},
          {"tau", v.tau},
          {"threshold", v.threshold},
          {"delta_s", v.delta_s},
          {"holds", v.holds},
          {"failing_memories", v.failing_memories()},
          {"rows", std::move(rows)}};
}

inline json to_json(const SelfVerdict& v) {
  double max_d = 0.0, min_belief = 1.0;
  for (const auto& r : v.condition2_detail.rows) {
    max_d = std::max(max_d, r.distance_to_s_star);
    min_belief = std::min(min_belief, r.belief_at_s_star);
  }
  return {{"condition1", v.condition1},
          {"condition2", v.condition2},
          {"possesses_self", v.possesses_self},
          {"s_star", v.s_star ? json(v.s_star->attributes) : json(nullptr)},
          {"max_d_s_to_s_star", max_d},
          {"min_belief_at_s_star", min_belief},
          {"continuum", to_json(v.continuum)},
          {"condition2_detail", to_json(v.condition2_detail)}};
}

// ---- training ------------------------------------------------------------

inline std::string trace_csv(const TrainingTrace& t) {
  std::string out = "step,epoch,loss,grad_norm_preclip,update_norm\n";
  for (const auto& s : t.steps)
    out += std::to_string(s.step) + "," + std::to_string(s.epoch) + "," + format_double(s.loss) + "," +
           format_double(s.grad_norm_preclip) + "," + format_double(s.update_norm) + "\n";
  return out;
}

inline std::string epoch_loss_csv(const TrainingTrace& t) {
  std::string out = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < t.epoch_mean_loss.size(); ++e)
    out += std::to_string(e + 1) + "," + format_double(t.epoch_mean_loss[e]) + "\n";
  return out;
}

inline json trace_summary(const TrainingTrace& t) {
  return {{"initial_loss", t.initial_loss},
          {"final_loss", t.final_loss},
          {"loss_ratio", t.initial_loss != 0.0 ? json(t.final_loss / t.initial_loss) : json(nullptr)},
          {"percent_reduction",
           t.initial_loss != 0.0 ? json(-percent_change(t.initial_loss, t.final_loss)) : json(nullptr)},
          {"convergence_step", t.convergence_step ? json(*t.convergence_step) : json(nullptr)},
          {"steps", t.steps.size()},
          {"epochs", t.epoch_mean_loss.size()}};
}

// ---- datasets ------------------------------------------------------------

inline json to_json(const GeneratorConfig& c) {
  return {{"n_samples", c.n_samples},     {"memories_per_sample", c.memories_per_sample},
          {"k_c", c.k_c},                 {"step_sigma", c.step_sigma},
          {"time_stride", c.time_stride}, {"emotion_range", {c.emotion_min, c.emotion_max}},
          {"seed", c.seed}};
}

inline json to_json(const MemoryMetricConfig& c) {
  return {{"w_t", c.w_t}, {"w_c", c.w_c}, {"w_e", c.w_e},
          {"content_metric", c.content_metric == ContentMetric::Euclidean ? "euclidean" : "cosine"}};
}

inline json to_json(const DatasetManifest& m, std::span<const Sample> samples) {
  json groups = json::array();
  for (const auto& s : samples) groups.push_back(ids_of(s.memories));
  return {{"generator", to_json(m.config)},
          {"metric", to_json(m.metric)},
          {"guaranteed_epsilon", m.guaranteed_epsilon},
          {"files", m.files},
          {"samples", std::move(groups)}};
}

inline json labels_to_json(std::span<const LabeledMemory> labels) {
  json arr = json::array();
  for (const auto& l : labels) arr.push_back({{"id", l.memory.id}, {"target", l.target.attributes}});
  return arr;
}

// Joins a label array keyed by memory id onto the memories.
inline std::vector<LabeledMemory> labels_from_json(const json& j, std::span<const Memory> memories) {
  if (!j.is_array()) throw FormatError("labels: expected a JSON array");
  std::map<std::string, Vector> by_id;
  for (const auto& entry : j)
    by_id[get_field<std::string>(entry, "id", "label")] = get_field<Vector>(entry, "target", "label");
  std::vector<LabeledMemory> out;
  out.reserve(memories.size());
  for (const auto& m : memories) {
    auto it = by_id.find(m.id);
    if (it == by_id.end()) throw FormatError("labels: no target for memory '" + m.id + "'");
    out.push_back({m, {it->second}});
  }
  return out;
}

// ---- response corpora ----------------------------------------------------

inline ResponseRecord response_from_json(const json& j) {
  ResponseRecord r;
  r.prompt_id = get_field<int>(j, "prompt_id", "record");
  r.epoch = get_field<int>(j, "epoch", "record");
  r.response_text = get_field<std::string>(j, "response_text", "record");
  if (j.contains("score") && !j.at("score").is_null()) r.score = get_field<double>(j, "score", "record");
  r.validate();
  return r;
}

inline json to_json(const ResponseRecord& r) {
  return {{"prompt_id", r.prompt_id}, {"epoch", r.epoch}, {"response_text", r.response_text},
          {"score", r.score ? json(*r.score) : json(nullptr)}};
}

// One record per non-blank line; errors name the offending line.
inline std::vector<ResponseRecord> parse_jsonl(const std::string& text, const std::string& origin) {
  std::vector<ResponseRecord> records;
  std::istringstream in(text);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(response_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw FormatError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

inline std::vector<ResponseRecord> load_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(read_file(path), path.string());
}

inline std::string frequency_csv(std::span<const FrequencyRow> rows) {
  std::string out = "word,before,after,percent_change\n";
  for (const auto& r : rows)
    out += r.word + "," + std::to_string(r.before) + "," + std::to_string(r.after) + "," +
           (r.percent_change ? format_double(round1(*r.percent_change)) : std::string()) + "\n";
  return out;
}

inline std::string prompt_scores_csv(std::span<const PromptScoreRow> rows, const std::string& corpus) {
  std::string out;
  for (const auto& r : rows)
    out += corpus + "," + std::to_string(r.epoch) + "," + std::to_string(r.prompt_id) + "," +
           std::to_string(r.summary.count) + "," + format_double(r.summary.mean) + "," +
           format_double(r.summary.std_dev) + "\n";
  return out;
}

inline json to_json(const MetricDelta& d) {
  return {{"name", d.name},
          {"before", d.before},
          {"after", d.after},
          {"absolute_change", d.absolute_change},
          {"percent_change", d.percent ? json(*d.percent) : json(nullptr)},
          {"percent_change_rounded", d.percent ? json(round1(*d.percent)) : json(nullptr)}};
}

inline json to_json(const CorpusStats& s) {
  return {{"responses", s.responses},
          {"mean_score", s.scores ? json(s.scores->mean) : json(nullptr)},
          {"score_std", s.scores ? json(s.scores->std_dev) : json(nullptr)},
          {"scored_responses", s.scores ? s.scores->count : 0},
          {"mean_word_count", s.mean_word_count},
          {"mean_unique_words", s.mean_unique_words},
          {"unique_ratio", s.unique_ratio},
          {"std_convention", "population"}};
}

inline json to_json(const ImprovementReport& r) {
  json metrics = json::array(), prompts = json::array();
  for (const auto& m : r.metrics) metrics.push_back(to_json(m));
  for (const auto& m : r.per_prompt) prompts.push_back(to_json(m));
  return {{"metrics", std::move(metrics)},
          {"per_prompt", std::move(prompts)},
          {"score_std_direction", r.score_std_direction}};
}

}  // namespace selfid::io
