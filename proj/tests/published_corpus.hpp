#pragma once

// Synthetic response corpora whose aggregate statistics equal published
// before/after figures: response count, score ones, mean word count, mean
// unique words, per-word totals and one prompt's score split.

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "selfid/textmetrics.hpp"

namespace fixture {

struct CorpusSpec {
  std::size_t responses = 0;
  std::size_t score_ones = 0;
  double mean_words = 0.0;
  double mean_unique = 0.0;
  std::vector<std::pair<std::string, std::size_t>> word_totals;
  int epoch = 0;
  int focus_prompt = 2;
  std::size_t focus_responses = 0;
  std::size_t focus_ones = 0;
};

// Spreads an integer total over n slots as evenly as possible, earlier slots first.
inline std::size_t share(std::size_t total, std::size_t n, std::size_t i) {
  return total / n + (i < total % n ? 1 : 0);
}

inline std::vector<selfid::ResponseRecord> build_corpus(const CorpusSpec& spec) {
  const std::size_t n = spec.responses;
  const auto words_total = static_cast<std::size_t>(std::llround(spec.mean_words * n));
  const auto unique_total = static_cast<std::size_t>(std::llround(spec.mean_unique * n));

  std::vector<selfid::ResponseRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.epoch = spec.epoch;
    const bool focus = i < spec.focus_responses;
    if (focus) {
      r.prompt_id = spec.focus_prompt;
      r.score = i < spec.focus_ones ? 1.0 : 0.0;
    } else {
      static const int others[] = {1, 3, 4, 5, 6, 7};
      r.prompt_id = others[(i - spec.focus_responses) % 6];
      r.score = (i - spec.focus_responses) < spec.score_ones - spec.focus_ones ? 1.0 : 0.0;
    }

    std::size_t tracked = 0, distinct = 0;
    for (const auto& [word, total] : spec.word_totals) {
      const std::size_t c = share(total, n, i);
      for (std::size_t k = 0; k < c; ++k) r.response_text += word + " ";
      tracked += c;
      distinct += c > 0;
    }
    const std::size_t words = share(words_total, n, i);
    const std::size_t unique = share(unique_total, n, i);
    const std::size_t fillers = words - tracked;
    const std::size_t filler_kinds = unique - distinct;
    for (std::size_t k = 0; k < filler_kinds; ++k) r.response_text += "filler" + std::to_string(k) + " ";
    for (std::size_t k = filler_kinds; k < fillers; ++k) r.response_text += "filler0 ";
  }
  return out;
}

inline CorpusSpec baseline_spec() {
  CorpusSpec s;
  s.responses = 500;
  s.score_ones = 138;
  s.mean_words = 235.5;
  s.mean_unique = 200.5;
  s.word_totals = {{"as", 1550}, {"of", 2305}, {"from", 837}, {"and", 2789},
                   {"your", 769}, {"if", 579},  {"i", 2009}};
  s.epoch = 0;
  s.focus_responses = 50;
  s.focus_ones = 3;
  return s;
}

inline CorpusSpec final_spec() {
  CorpusSpec s;
  s.responses = 1000;
  s.score_ones = 801;
  s.mean_words = 155.1;
  s.mean_unique = 127.2;
  s.word_totals = {{"as", 532}, {"of", 1380}, {"from", 541}, {"and", 1891},
                   {"your", 1227}, {"if", 774}, {"i", 1733}};
  s.epoch = 20;
  s.focus_responses = 100;
  s.focus_ones = 87;
  return s;
}

struct StatedFigure {
  std::string label;
  double before;
  double after;
  double stated_percent;
};

// Published pairs and their stated percentage changes.
inline std::vector<StatedFigure> stated_figures() {
  return {{"mean score", 0.276, 0.801, 190.2},      {"loss at epoch 2", 1.49, 0.066, -95.6},
          {"mean word count", 235.5, 155.1, -34.1}, {"mean unique words", 200.5, 127.2, -36.6},
          {"'as'", 1550, 532, -65.7},               {"'of'", 2305, 1380, -40.1},
          {"'from'", 837, 541, -35.4},              {"'and'", 2789, 1891, -32.2},
          {"'your'", 769, 1227, 59.6},              {"'if'", 579, 774, 33.7},
          {"'i'", 2009, 1733, -13.7}};
}

}  // namespace fixture
