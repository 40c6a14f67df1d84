#include "rephrasecal/rephrase.hpp"

#include <fstream>
#include <stdexcept>

namespace rephrasecal {

namespace {

constexpr std::string_view kDemoSource =
    "George wants to warm his hands quickly by rubbing them. Which skin surface will produce "
    "the most heat?";

PromptTemplate make_template(StrategyKind kind, std::string demo_directive, std::string directive,
                             std::string response_directive, std::string target) {
  PromptTemplate t;
  t.kind = kind;
  t.demo_directive = std::move(demo_directive);
  t.directive = std::move(directive);
  t.response_directive = std::move(response_directive);
  t.one_shot_source = std::string(kDemoSource);
  t.one_shot_target = std::move(target);
  return t;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Parses `key: value` lines; unknown keys are rejected so typos surface.
void apply_key_values(const std::filesystem::path& file,
                      const std::map<std::string, std::string*>& fields) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read template file " + file.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": expected 'key: value'");
    }
    const std::string key(trim(std::string_view(line).substr(0, colon)));
    std::string_view value = std::string_view(line).substr(colon + 1);
    // Exactly one separating space is dropped; the rest of the value is verbatim.
    if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    *it->second = std::string(value);
  }
}

}  // namespace

std::string PromptTemplate::render(std::string_view stem) const {
  std::string out;
  out.reserve(512 + stem.size());
  out += instruction_open;
  out += demo_directive;
  out += '\n';
  out += one_shot_source;
  out += '\n';
  out += response_directive;
  out += ' ';
  out += instruction_close;
  out += '\n';
  out += one_shot_target;
  out += '\n';
  out += instruction_open;
  out += directive;
  out += ' ';
  out += stem;
  out += '\n';
  out += response_directive;
  out += ' ';
  out += instruction_close;
  return out;
}

PromptTemplate default_template(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kReword:
      return make_template(kind, "Reword the following question:", "Reword the following question:",
                           "Respond with the reworded question only:",
                           "George seeks to heat his hands swiftly by rubbing them. Which skin area "
                           "will generate the maximum heat?");
    case StrategyKind::kRephrase:
      return make_template(kind, "Rephrase the following question:", "Rephrase the following question:",
                           "Respond with the rephrased question only:",
                           "What type of skin texture on George's hands would generate the most heat "
                           "through rapid rubbing to warm them effectively?");
    case StrategyKind::kParaphrase:
      return make_template(kind, "Semantically paraphrase the following question:",
                           "Semantically paraphrase the following question:",
                           "Respond with the semantically paraphrased question only:",
                           "How can George induce the highest thermal output by briskly rubbing his "
                           "hands, and which part of the skin would be most effective?");
    case StrategyKind::kExpansion:
      // The demonstration line carries a space after the opening delimiter; the
      // target line does not.
      return make_template(kind, " Expand the following question with additional context:",
                           "Expand the following question with additional context:",
                           "Respond with the expanded question only:",
                           "In the context of seeking immediate relief from the biting cold and "
                           "understanding the mechanisms behind heat generation through friction, "
                           "what type of skin texture on George's hands would most effectively "
                           "generate heat by rapid rubbing?");
    case StrategyKind::kHint:
    case StrategyKind::kIdentity:
      break;
  }
  throw std::invalid_argument("strategy '" + std::string(to_string(kind)) +
                              "' has no rephrasing template");
}

TemplateSet::TemplateSet() {
  for (auto kind : {StrategyKind::kReword, StrategyKind::kRephrase, StrategyKind::kParaphrase,
                    StrategyKind::kExpansion}) {
    rephrase_.emplace(kind, default_template(kind));
  }
}

TemplateSet TemplateSet::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("template directory " + dir.string() + " does not exist");
  }
  TemplateSet set;
  for (auto& [kind, t] : set.rephrase_) {
    const auto file = dir / (std::string(to_string(kind)) + ".txt");
    if (!std::filesystem::exists(file)) continue;
    apply_key_values(file, {{"instruction_open", &t.instruction_open},
                            {"instruction_close", &t.instruction_close},
                            {"demo_directive", &t.demo_directive},
                            {"directive", &t.directive},
                            {"response_directive", &t.response_directive},
                            {"one_shot_source", &t.one_shot_source},
                            {"one_shot_target", &t.one_shot_target}});
  }
  const auto answer = dir / "answer.txt";
  if (std::filesystem::exists(answer)) {
    auto& a = set.answer_;
    apply_key_values(answer, {{"instruction_open", &a.instruction_open},
                              {"instruction_close", &a.instruction_close},
                              {"instruction", &a.instruction}});
  }
  return set;
}

const PromptTemplate& TemplateSet::rephrase_template(StrategyKind kind) const {
  const auto it = rephrase_.find(kind);
  if (it == rephrase_.end()) {
    throw std::invalid_argument("strategy '" + std::string(to_string(kind)) +
                                "' has no rephrasing template");
  }
  return it->second;
}

std::string build_rephrase_prompt(const Strategy& strategy, std::string_view stem,
                                  const TemplateSet& templates) {
  if (!uses_rephraser(strategy.kind)) {
    throw std::invalid_argument("build_rephrase_prompt: strategy '" +
                                std::string(to_string(strategy.kind)) + "' does not rephrase");
  }
  return templates.rephrase_template(strategy.kind).render(stem);
}

std::string assemble_rephrased_question(std::string_view rephrased_stem, const Question& q) {
  std::string out(rephrased_stem);
  for (const auto& c : q.choices) {
    out += ' ';
    out += c.label.letter();
    out += ". ";
    out += c.text;
  }
  return out;
}

HintChoice draw_hint(int num_choices, Rng& rng) {
  HintChoice h;
  h.preface_index = uniform_index(rng, kHintPrefaces.size());
  h.label = ChoiceLabel(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(num_choices))));
  return h;
}

std::string render_hint_query(const Question& q, const HintChoice& hint) {
  std::string out = assemble_rephrased_question(q.stem, q);
  out += '\n';
  out += kHintPrefaces.at(hint.preface_index);
  out += ' ';
  out += hint.label.letter();
  return out;
}

std::string build_hint_query(const Question& q, Rng& rng) {
  return render_hint_query(q, draw_hint(q.num_choices(), rng));
}

std::string build_answer_prompt(std::string_view question_text, const AnswerTemplate& tmpl) {
  if (question_text.empty()) throw std::invalid_argument("build_answer_prompt: empty question");
  std::string out;
  out += tmpl.instruction_open;
  out += question_text;
  out += '\n';
  out += tmpl.instruction;
  if (!tmpl.instruction_close.empty()) {
    out += ' ';
    out += tmpl.instruction_close;
  }
  return out;
}

std::string clean_rephrasing(std::string_view completion) {
  auto s = trim(completion);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = trim(s.substr(1, s.size() - 2));
  return std::string(s);
}

}  // namespace rephrasecal
