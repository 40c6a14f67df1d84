#pragma once

#include <span>
#include <string_view>

#include "rephrasecal/core.hpp"

namespace rephrasecal {

/// First standalone uppercase label among the first `num_choices` letters.
/// Standalone means neither neighbour is an ASCII letter, so the B in "BANANA"
/// does not count. Returns nullopt when nothing matches.
Extraction extract_answer(std::string_view text, int num_choices);

/// Aggregates the draws of one question. Unparsed draws are excluded from the
/// counts. Throws std::invalid_argument on an empty list or mixed question ids.
PredictionSummary aggregate(std::span<const AnswerRecord> records, int num_choices);

/// The deterministic single-answer baseline: full confidence on the one answer.
PredictionSummary naive_summary(const Question& q, const AnswerRecord& single);

}  // namespace rephrasecal
