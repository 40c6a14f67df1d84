#pragma once

// Prompt construction: one-shot rephrasing prompts, hint-augmented queries and
// the answering prompt. Only the question stem is ever rephrased; choices are
// appended verbatim afterwards.

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "rephrasecal/core.hpp"
#include "rephrasecal/rng.hpp"

namespace rephrasecal {

inline constexpr std::string_view kDefaultInstructionOpen = "[INST]";
inline constexpr std::string_view kDefaultInstructionClose = "[\\INST]";

/// One-shot rephrasing template. Renders as
///
///   {open}{demo_directive}
///   {one_shot_source}
///   {response_directive} {close}
///   {one_shot_target}
///   {open}{directive} {stem}
///   {response_directive} {close}
struct PromptTemplate {
  StrategyKind kind = StrategyKind::kReword;
  std::string instruction_open{kDefaultInstructionOpen};
  std::string instruction_close{kDefaultInstructionClose};
  std::string demo_directive;  // directive on the demonstration line
  std::string directive;       // directive on the target line
  std::string response_directive;
  std::string one_shot_source;
  std::string one_shot_target;

  std::string render(std::string_view stem) const;
};

/// Built-in template for reword/rephrase/paraphrase/expansion.
PromptTemplate default_template(StrategyKind kind);

inline constexpr std::array<std::string_view, 3> kHintPrefaces = {
    "I think the answer should be",
    "I read online the answer is",
    "I vaguely remember the answer is",
};

struct AnswerTemplate {
  std::string instruction_open{kDefaultInstructionOpen};
  std::string instruction_close{kDefaultInstructionClose};
  std::string instruction = "Answer with the letter of the correct option.";
};

/// The full set of templates used by a run.
class TemplateSet {
 public:
  TemplateSet();

  /// Reads `<kind>.txt` and `answer.txt` files of `key: value` lines from `dir`;
  /// missing files or keys keep the built-in defaults.
  static TemplateSet load_directory(const std::filesystem::path& dir);

  const PromptTemplate& rephrase_template(StrategyKind kind) const;
  const AnswerTemplate& answer_template() const { return answer_; }

  void set_rephrase_template(PromptTemplate t) { rephrase_[t.kind] = std::move(t); }
  void set_answer_template(AnswerTemplate t) { answer_ = std::move(t); }

 private:
  std::map<StrategyKind, PromptTemplate> rephrase_;
  AnswerTemplate answer_;
};

/// One-shot rephrasing prompt for `stem`. Throws std::invalid_argument for the
/// hint and identity strategies.
std::string build_rephrase_prompt(const Strategy& strategy, std::string_view stem,
                                  const TemplateSet& templates = TemplateSet());

/// "stem A. t1 B. t2 ..." with the question's own labels and texts.
std::string assemble_rephrased_question(std::string_view rephrased_stem, const Question& q);

struct HintChoice {
  std::size_t preface_index = 0;
  ChoiceLabel label;
};

/// Draws a preface uniformly from the three weak claims and a label uniformly
/// from the question's labels.
HintChoice draw_hint(int num_choices, Rng& rng);

/// Question text with choices, followed by a newline and one hint suffix.
std::string build_hint_query(const Question& q, Rng& rng);
std::string render_hint_query(const Question& q, const HintChoice& hint);

/// Wraps question text with the answering instruction. Throws
/// std::invalid_argument for empty text.
std::string build_answer_prompt(std::string_view question_text,
                                const AnswerTemplate& tmpl = AnswerTemplate());

/// Trims whitespace and one pair of surrounding double quotes from a
/// rephraser completion.
std::string clean_rephrasing(std::string_view completion);

}  // namespace rephrasecal
