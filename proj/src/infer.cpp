#include "rephrasecal/infer.hpp"

#include <stdexcept>

namespace rephrasecal {

namespace {

bool is_ascii_letter(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }

}  // namespace

Extraction extract_answer(std::string_view text, int num_choices) {
  if (num_choices < kMinChoices || num_choices > kMaxChoices) {
    throw std::invalid_argument("extract_answer: num_choices must be in [2, 8]");
  }
  const char last = static_cast<char>('A' + num_choices - 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c < 'A' || c > last) continue;
    if (i > 0 && is_ascii_letter(text[i - 1])) continue;
    if (i + 1 < text.size() && is_ascii_letter(text[i + 1])) continue;
    return ChoiceLabel(c - 'A');
  }
  return std::nullopt;
}

PredictionSummary aggregate(std::span<const AnswerRecord> records, int num_choices) {
  if (records.empty()) throw std::invalid_argument("aggregate: no records");
  const auto& id = records.front().question_id;
  std::vector<int> counts(static_cast<std::size_t>(num_choices), 0);
  for (const auto& r : records) {
    if (r.question_id != id) {
      throw std::invalid_argument("aggregate: records for '" + id + "' and '" + r.question_id +
                                  "' mixed");
    }
    if (r.extracted && r.extracted->index() < num_choices) ++counts[r.extracted->index()];
  }
  return summarize_counts(id, std::move(counts));
}

PredictionSummary naive_summary(const Question& q, const AnswerRecord& single) {
  std::vector<int> counts(static_cast<std::size_t>(q.num_choices()), 0);
  if (single.extracted && single.extracted->index() < q.num_choices()) {
    counts[single.extracted->index()] = 1;
  }
  return summarize_counts(q.id, std::move(counts));
}

}  // namespace rephrasecal
