#pragma once

// Domain types shared by every module. No I/O here.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rephrasecal {

inline constexpr int kMinChoices = 2;
inline constexpr int kMaxChoices = 8;

/// A multiple-choice label: index 0 is 'A', 1 is 'B', ...
class ChoiceLabel {
 public:
  constexpr ChoiceLabel() = default;
  constexpr explicit ChoiceLabel(int index) : index_(static_cast<std::uint8_t>(index)) {}

  static std::optional<ChoiceLabel> from_letter(char c) {
    if (c < 'A' || c >= 'A' + kMaxChoices) return std::nullopt;
    return ChoiceLabel(c - 'A');
  }

  constexpr int index() const { return index_; }
  constexpr char letter() const { return static_cast<char>('A' + index_); }
  std::string str() const { return std::string(1, letter()); }

  friend constexpr bool operator==(ChoiceLabel, ChoiceLabel) = default;
  friend constexpr auto operator<=>(ChoiceLabel, ChoiceLabel) = default;

 private:
  std::uint8_t index_ = 0;
};

/// nullopt means the completion could not be parsed into a label.
using Extraction = std::optional<ChoiceLabel>;

struct Choice {
  ChoiceLabel label;
  std::string text;
};

struct Question {
  std::string id;
  std::string stem;
  std::vector<Choice> choices;
  std::optional<ChoiceLabel> gold;

  int num_choices() const { return static_cast<int>(choices.size()); }
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ValidationError describing the first violated invariant.
void validate_question(const Question& q);

enum class StrategyKind { kReword, kRephrase, kParaphrase, kExpansion, kHint, kIdentity };

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy_kind(std::string_view name);

/// True for the four strategies that go through a rephraser model.
constexpr bool uses_rephraser(StrategyKind kind) {
  return kind == StrategyKind::kReword || kind == StrategyKind::kRephrase ||
         kind == StrategyKind::kParaphrase || kind == StrategyKind::kExpansion;
}

struct Strategy {
  StrategyKind kind = StrategyKind::kIdentity;
  double rephrase_temperature = 1.0;
  std::optional<std::int64_t> hint_seed;
};

enum class DecodeMode { kTop1, kTopK, kTemperature };

std::string_view to_string(DecodeMode mode);
DecodeMode parse_decode_mode(std::string_view name);

struct DecodeConfig {
  DecodeMode mode = DecodeMode::kTop1;
  int k = 40;
  double sampling_temperature = 1.0;

  static DecodeConfig top1() { return {}; }
  static DecodeConfig topk(int k) { return {DecodeMode::kTopK, k, 1.0}; }
  static DecodeConfig temperature(double t) { return {DecodeMode::kTemperature, 40, t}; }
};

/// Throws std::invalid_argument for k < 1 in topk mode or t <= 0 in temperature mode.
void validate_decode(const DecodeConfig& cfg);

struct AnswerRecord {
  std::string question_id;
  int draw_index = 0;
  std::string prompt;      // exact text sent to the answering model
  std::string completion;  // raw completion text
  Extraction extracted;
  // Set when the backend failed for this draw; the draw then counts as unparsed.
  std::optional<std::string> error;
};

struct PredictionSummary {
  std::string question_id;
  std::vector<int> counts;  // indexed by label
  int valid_draws = 0;
  // nullopt when every draw failed to parse.
  std::optional<ChoiceLabel> predicted;
  double confidence = 0.0;
  std::vector<double> distribution;  // indexed by label

  int num_choices() const { return static_cast<int>(counts.size()); }
};

/// Builds a summary from per-label counts. Argmax ties go to the lowest label.
/// With zero valid draws the prediction is invalid, the distribution uniform and
/// the confidence 1/K.
PredictionSummary summarize_counts(std::string question_id, std::vector<int> counts);

struct ReliabilityBin {
  double lower = 0.0;
  double upper = 0.0;
  double mean_confidence = 0.0;
  double mean_accuracy = 0.0;
  std::size_t count = 0;
};

struct CalibrationReport {
  double accuracy = 0.0;
  double ece = 0.0;
  std::optional<double> tace;   // absent when every item falls below the threshold
  double brier = 0.0;
  std::optional<double> auroc;  // absent when all items are correct or all incorrect
  std::vector<ReliabilityBin> bins;
  std::size_t num_items = 0;
};

}  // namespace rephrasecal
