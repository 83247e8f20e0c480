#pragma once

// Response-corpus statistics: judge score summaries, response length,
// vocabulary diversity and word-frequency comparisons between two corpora.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace selfid {

struct ResponseRecord {
  int prompt_id = 1;
  int epoch = 0;  // 0 is the untrained baseline
  std::string response_text;
  std::optional<double> score;

  void validate() const {
    if (prompt_id < 1 || prompt_id > 7) throw std::invalid_argument("prompt_id must be in 1..7");
    if (epoch < 0) throw std::invalid_argument("epoch must be >= 0");
    if (score && *score != 0.0 && *score != 1.0)
      throw std::invalid_argument("score must be exactly 0.0 or 1.0");
  }
};

// Lowercased maximal runs of ASCII letters and digits.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

using WordCounts = std::unordered_map<std::string, std::size_t>;
using RankedCounts = std::vector<std::pair<std::string, std::size_t>>;

inline WordCounts word_counts(std::span<const ResponseRecord> records) {
  WordCounts counts;
  for (const auto& r : records)
    for (auto& w : tokenize(r.response_text)) ++counts[std::move(w)];
  return counts;
}

// Count descending, then word ascending.
inline RankedCounts rank_counts(const WordCounts& counts) {
  RankedCounts ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return ranked;
}

struct ScoreSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // population
};

inline std::optional<ScoreSummary> summarize_scores(std::span<const ResponseRecord> records) {
  ScoreSummary s;
  double sum = 0.0;
  for (const auto& r : records)
    if (r.score) {
      sum += *r.score;
      ++s.count;
    }
  if (s.count == 0) return std::nullopt;
  s.mean = sum / static_cast<double>(s.count);
  double var = 0.0;
  for (const auto& r : records)
    if (r.score) var += (*r.score - s.mean) * (*r.score - s.mean);
  s.std_dev = std::sqrt(var / static_cast<double>(s.count));
  return s;
}

struct CorpusStats {
  std::size_t responses = 0;
  std::optional<ScoreSummary> scores;  // absent when no record carries a score
  double mean_word_count = 0.0;
  double mean_unique_words = 0.0;
  double unique_ratio = 0.0;  // mean over non-empty responses of unique / total
  RankedCounts word_frequencies;
};

inline CorpusStats corpus_stats(std::span<const ResponseRecord> records) {
  if (records.empty()) throw std::invalid_argument("corpus is empty");
  CorpusStats stats;
  stats.responses = records.size();
  stats.scores = summarize_scores(records);
  WordCounts counts;
  double words = 0.0, unique = 0.0, ratio = 0.0;
  std::size_t nonempty = 0;
  for (const auto& r : records) {
    auto tokens = tokenize(r.response_text);
    std::unordered_set<std::string_view> distinct(tokens.begin(), tokens.end());
    words += static_cast<double>(tokens.size());
    unique += static_cast<double>(distinct.size());
    if (!tokens.empty()) {
      ratio += static_cast<double>(distinct.size()) / static_cast<double>(tokens.size());
      ++nonempty;
    }
    for (auto& w : tokens) ++counts[std::move(w)];
  }
  const auto n = static_cast<double>(records.size());
  stats.mean_word_count = words / n;
  stats.mean_unique_words = unique / n;
  stats.unique_ratio = nonempty ? ratio / static_cast<double>(nonempty) : 0.0;
  stats.word_frequencies = rank_counts(counts);
  return stats;
}

inline double percent_change(double before, double after) {
  if (before == 0.0) throw std::invalid_argument("percent change from a zero baseline is undefined");
  return 100.0 * (after - before) / before;
}

// One decimal, halves rounded away from zero.
inline double round1(double x) { return std::round(x * 10.0) / 10.0; }

struct FrequencyRow {
  std::string word;
  std::size_t before = 0;
  std::size_t after = 0;
  std::optional<double> percent_change;  // absent when the word is new
};

inline std::vector<FrequencyRow> compare_counts(const WordCounts& before, const WordCounts& after,
                                                std::size_t top_n) {
  if (top_n == 0) throw std::invalid_argument("top_n must be at least 1");
  WordCounts combined = before;
  for (const auto& [w, c] : after) combined[w] += c;
  const auto ranked = rank_counts(combined);
  std::vector<FrequencyRow> rows;
  for (std::size_t i = 0; i < ranked.size() && i < top_n; ++i) {
    FrequencyRow row;
    row.word = ranked[i].first;
    if (auto it = before.find(row.word); it != before.end()) row.before = it->second;
    if (auto it = after.find(row.word); it != after.end()) row.after = it->second;
    if (row.before > 0)
      row.percent_change = percent_change(static_cast<double>(row.before), static_cast<double>(row.after));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<FrequencyRow> frequency_comparison(std::span<const ResponseRecord> before,
                                                      std::span<const ResponseRecord> after,
                                                      std::size_t top_n) {
  if (before.empty() || after.empty()) throw std::invalid_argument("both corpora must be nonempty");
  return compare_counts(word_counts(before), word_counts(after), top_n);
}

// Score mean and spread for each (epoch, prompt) cell; spread is the
// consistency measure for repeated identical prompts.
struct PromptScoreRow {
  int epoch = 0;
  int prompt_id = 0;
  ScoreSummary summary;
};

inline std::vector<PromptScoreRow> prompt_score_table(std::span<const ResponseRecord> records) {
  std::map<std::pair<int, int>, std::vector<ResponseRecord>> cells;
  for (const auto& r : records)
    if (r.score) cells[{r.epoch, r.prompt_id}].push_back(r);
  std::vector<PromptScoreRow> rows;
  for (const auto& [key, group] : cells)
    rows.push_back({key.first, key.second, *summarize_scores(group)});
  return rows;
}

// Per-prompt mean score across all epochs in a corpus.
inline std::map<int, double> prompt_means(std::span<const ResponseRecord> records) {
  std::map<int, std::pair<double, std::size_t>> acc;
  for (const auto& r : records)
    if (r.score) {
      acc[r.prompt_id].first += *r.score;
      ++acc[r.prompt_id].second;
    }
  std::map<int, double> out;
  for (const auto& [p, s] : acc) out[p] = s.first / static_cast<double>(s.second);
  return out;
}

struct MetricDelta {
  std::string name;
  double before = 0.0;
  double after = 0.0;
  double absolute_change = 0.0;
  std::optional<double> percent;  // absent for a zero baseline
};

inline MetricDelta metric_delta(std::string name, double before, double after) {
  MetricDelta d;
  d.name = std::move(name);
  d.before = before;
  d.after = after;
  d.absolute_change = after - before;
  if (before != 0.0) d.percent = percent_change(before, after);
  return d;
}

struct ImprovementReport {
  std::vector<MetricDelta> metrics;
  std::vector<MetricDelta> per_prompt;  // names are "prompt_<id>"
  std::string score_std_direction;      // "increased", "decreased", "unchanged" or empty

  const MetricDelta* find(std::string_view name) const {
    for (const auto& m : metrics)
      if (m.name == name) return &m;
    for (const auto& m : per_prompt)
      if (m.name == name) return &m;
    return nullptr;
  }
};

struct LossPair {
  double initial = 0.0;
  double final = 0.0;
};

inline ImprovementReport improvement_report(const CorpusStats& baseline, const CorpusStats& final,
                                            std::optional<LossPair> loss = std::nullopt,
                                            const std::map<int, double>& baseline_prompts = {},
                                            const std::map<int, double>& final_prompts = {}) {
  ImprovementReport report;
  if (baseline.scores && final.scores) {
    report.metrics.push_back(metric_delta("mean_score", baseline.scores->mean, final.scores->mean));
    report.metrics.push_back(metric_delta("score_std", baseline.scores->std_dev, final.scores->std_dev));
    const double d = final.scores->std_dev - baseline.scores->std_dev;
    report.score_std_direction = d > 0 ? "increased" : d < 0 ? "decreased" : "unchanged";
  }
  report.metrics.push_back(metric_delta("mean_word_count", baseline.mean_word_count, final.mean_word_count));
  report.metrics.push_back(metric_delta("mean_unique_words", baseline.mean_unique_words, final.mean_unique_words));
  report.metrics.push_back(metric_delta("unique_ratio", baseline.unique_ratio, final.unique_ratio));
  if (loss) report.metrics.push_back(metric_delta("loss", loss->initial, loss->final));
  for (const auto& [prompt, before] : baseline_prompts)
    if (auto it = final_prompts.find(prompt); it != final_prompts.end())
      report.per_prompt.push_back(metric_delta("prompt_" + std::to_string(prompt), before, it->second));
  return report;
}

// Comparison of a computed percentage with a separately stated one.
enum class StatedFigureStatus { Match, RoundingDiscrepancy, Mismatch };

struct StatedFigureCheck {
  double computed = 0.0;
  double rounded = 0.0;
  double stated = 0.0;
  StatedFigureStatus status = StatedFigureStatus::Mismatch;
};

// Match: rounds to the stated value. RoundingDiscrepancy: within tolerance
// but rounds elsewhere. Mismatch: outside tolerance.
inline StatedFigureCheck check_stated_percent(double before, double after, double stated,
                                              double tolerance_pp = 0.1) {
  StatedFigureCheck c;
  c.computed = percent_change(before, after);
  c.rounded = round1(c.computed);
  c.stated = stated;
  if (std::abs(c.rounded - stated) < 1e-9) c.status = StatedFigureStatus::Match;
  else if (std::abs(c.computed - stated) <= tolerance_pp) c.status = StatedFigureStatus::RoundingDiscrepancy;
  else c.status = StatedFigureStatus::Mismatch;
  return c;
}

}  // namespace selfid
