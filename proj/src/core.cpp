#include "rephrasecal/core.hpp"

#include <algorithm>
#include <numeric>

namespace rephrasecal {

void validate_question(const Question& q) {
  const int k = q.num_choices();
  if (k < kMinChoices || k > kMaxChoices) {
    throw ValidationError("question '" + q.id + "': " + std::to_string(k) +
                          " choices, expected between 2 and 8");
  }
  std::vector<bool> seen(kMaxChoices, false);
  for (int i = 0; i < k; ++i) {
    const int idx = q.choices[i].label.index();
    if (idx < kMaxChoices && seen[idx]) {
      throw ValidationError("question '" + q.id + "': duplicate label " +
                            q.choices[i].label.str());
    }
    if (idx < kMaxChoices) seen[idx] = true;
    if (idx != i) {
      throw ValidationError("question '" + q.id + "': non-contiguous labels, position " +
                            std::to_string(i) + " carries " + q.choices[i].label.str());
    }
  }
  if (q.gold && q.gold->index() >= k) {
    throw ValidationError("question '" + q.id + "': gold " + q.gold->str() +
                          " is not among the labels");
  }
}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kReword: return "reword";
    case StrategyKind::kRephrase: return "rephrase";
    case StrategyKind::kParaphrase: return "paraphrase";
    case StrategyKind::kExpansion: return "expansion";
    case StrategyKind::kHint: return "hint";
    case StrategyKind::kIdentity: return "identity";
  }
  return "identity";
}

StrategyKind parse_strategy_kind(std::string_view name) {
  for (auto kind : {StrategyKind::kReword, StrategyKind::kRephrase, StrategyKind::kParaphrase,
                    StrategyKind::kExpansion, StrategyKind::kHint, StrategyKind::kIdentity}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kTop1: return "top1";
    case DecodeMode::kTopK: return "topk";
    case DecodeMode::kTemperature: return "temperature";
  }
  return "top1";
}

DecodeMode parse_decode_mode(std::string_view name) {
  for (auto mode : {DecodeMode::kTop1, DecodeMode::kTopK, DecodeMode::kTemperature}) {
    if (to_string(mode) == name) return mode;
  }
  throw std::invalid_argument("unknown decode mode '" + std::string(name) + "'");
}

void validate_decode(const DecodeConfig& cfg) {
  if (cfg.mode == DecodeMode::kTopK && cfg.k < 1) {
    throw std::invalid_argument("top-k decoding needs k >= 1");
  }
  if (cfg.mode == DecodeMode::kTemperature && !(cfg.sampling_temperature > 0.0)) {
    throw std::invalid_argument("temperature sampling needs a positive temperature");
  }
}

PredictionSummary summarize_counts(std::string question_id, std::vector<int> counts) {
  const int k = static_cast<int>(counts.size());
  if (k < kMinChoices || k > kMaxChoices) {
    throw std::invalid_argument("summary needs between 2 and 8 labels");
  }
  PredictionSummary s;
  s.question_id = std::move(question_id);
  s.valid_draws = std::accumulate(counts.begin(), counts.end(), 0);
  s.distribution.assign(k, 0.0);
  if (s.valid_draws == 0) {
    s.predicted = std::nullopt;
    s.confidence = 1.0 / k;
    std::fill(s.distribution.begin(), s.distribution.end(), 1.0 / k);
  } else {
    // max_element returns the first maximum, i.e. the lowest label index.
    const auto best = std::max_element(counts.begin(), counts.end());
    s.predicted = ChoiceLabel(static_cast<int>(best - counts.begin()));
    const double n = s.valid_draws;
    s.confidence = *best / n;
    for (int i = 0; i < k; ++i) s.distribution[i] = counts[i] / n;
  }
  s.counts = std::move(counts);
  return s;
}

}  // namespace rephrasecal
