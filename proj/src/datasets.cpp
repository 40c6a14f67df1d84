#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "rephrasecal/harness.hpp"
#include "rephrasecal/rng.hpp"

namespace rephrasecal {

namespace {

std::optional<ChoiceLabel> normalize_label(const std::string& raw) {
  if (raw.size() != 1) return std::nullopt;
  const char c = raw[0];
  if (c >= '1' && c <= '0' + kMaxChoices) return ChoiceLabel(c - '1');
  return ChoiceLabel::from_letter(c);
}

Question parse_arc_line(const std::string& line, std::size_t lineno) {
  const auto j = nlohmann::json::parse(line);
  Question q;
  q.id = j.contains("id") ? j["id"].get<std::string>() : "line-" + std::to_string(lineno);
  const auto& body = j.at("question");
  q.stem = body.at("stem").get<std::string>();
  for (const auto& c : body.at("choices")) {
    const auto raw = c.at("label").get<std::string>();
    const auto label = normalize_label(raw);
    if (!label) throw ValidationError("question '" + q.id + "': unsupported label '" + raw + "'");
    q.choices.push_back({*label, c.at("text").get<std::string>()});
  }
  if (j.contains("answerKey") && !j["answerKey"].is_null()) {
    const auto raw = j["answerKey"].get<std::string>();
    q.gold = normalize_label(raw);
    if (!q.gold) throw ValidationError("question '" + q.id + "': unsupported answer key '" + raw + "'");
  }
  validate_question(q);
  return q;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LatentDraw {
  LatentToyModel model;
  double u = 0.5;  // decides which class the gold label belongs to
};

LatentDraw draw_latent(const ToyWorldOptions& opts, std::size_t index, int num_choices) {
  Rng rng(derive_seed(opts.seed, {static_cast<std::uint64_t>(Stream::kWorld), index}));
  std::normal_distribution<double> normal(0.0, opts.gap_spread);
  const double gap = opts.gap_spread > 0.0 ? normal(rng) : 0.0;
  LatentDraw d{LatentToyModel::random(opts.latent_dim, gap, opts.s_rephrase, opts.s_topk, rng), 0.5};
  const auto k = static_cast<std::uint64_t>(num_choices);
  const auto a = uniform_index(rng, k);
  const auto b = (a + 1 + uniform_index(rng, k - 1)) % k;
  d.model.label_a = ChoiceLabel(static_cast<int>(a));
  d.model.label_b = ChoiceLabel(static_cast<int>(b));
  d.u = uniform_open01(rng);
  return d;
}

}  // namespace

ArcLoadResult load_arc_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset " + path.string());
  ArcLoadResult out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.questions.push_back(parse_arc_line(line, lineno));
    } catch (const std::exception&) {
      ++out.skipped;
    }
  }
  if (out.questions.empty()) {
    throw std::runtime_error("dataset " + path.string() + " has no valid questions (" +
                             std::to_string(out.skipped) + " skipped)");
  }
  return out;
}

ToyWorld make_toy_world(const ToyWorldOptions& opts) {
  if (opts.num_choices < kMinChoices || opts.num_choices > kMaxChoices) {
    throw std::invalid_argument("toy world: num_choices must be in [2, 8]");
  }
  ToyWorld world;
  world.questions.reserve(opts.num_questions);
  for (std::size_t i = 0; i < opts.num_questions; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "toy-%05zu", i);
    Question q;
    q.id = id;
    q.stem = "Synthetic question " + std::to_string(i) + ": which option is correct?";
    for (int c = 0; c < opts.num_choices; ++c) {
      q.choices.push_back({ChoiceLabel(c), "Option " + std::to_string(c + 1)});
    }
    auto d = draw_latent(opts, i, opts.num_choices);
    q.gold = d.u < sigmoid(d.model.gap()) ? d.model.label_a : d.model.label_b;
    world.models.emplace(q.id, std::move(d.model));
    world.questions.push_back(std::move(q));
  }
  return world;
}

std::map<std::string, LatentToyModel> attach_toy_models(const std::vector<Question>& questions,
                                                        const ToyWorldOptions& opts) {
  std::map<std::string, LatentToyModel> models;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto& q = questions[i];
    auto d = draw_latent(opts, i, q.num_choices());
    if (q.gold) {
      // Put the gold label on the class it would have come from.
      const bool gold_is_a = d.u < sigmoid(d.model.gap());
      auto& gold_slot = gold_is_a ? d.model.label_a : d.model.label_b;
      auto& other_slot = gold_is_a ? d.model.label_b : d.model.label_a;
      if (other_slot == *q.gold) other_slot = gold_slot;
      gold_slot = *q.gold;
    }
    models.emplace(q.id, std::move(d.model));
  }
  return models;
}

}  // namespace rephrasecal
