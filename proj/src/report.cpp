#include <cstdio>
#include <fstream>
#include <sstream>

#include "rephrasecal/harness.hpp"

namespace rephrasecal {

namespace {

using nlohmann::json;

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json label_or_null(const std::optional<ChoiceLabel>& l) { return l ? json(l->str()) : json(nullptr); }

std::optional<ChoiceLabel> label_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  const auto s = j.get<std::string>();
  const auto l = s.size() == 1 ? ChoiceLabel::from_letter(s[0]) : std::nullopt;
  if (!l) throw std::runtime_error("invalid label '" + s + "'");
  return l;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + p.string());
}

}  // namespace

std::string dump_pretty(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json to_json(const RunConfig& cfg) {
  json decode = {{"mode", std::string(to_string(cfg.decode.mode))}};
  if (cfg.decode.mode == DecodeMode::kTopK) decode["k"] = cfg.decode.k;
  if (cfg.decode.mode == DecodeMode::kTemperature) decode["temperature"] = cfg.decode.sampling_temperature;
  json strategy = {{"kind", std::string(to_string(cfg.strategy.kind))},
                   {"rephraseTemperature", cfg.strategy.rephrase_temperature}};
  if (cfg.strategy.hint_seed) strategy["hintSeed"] = *cfg.strategy.hint_seed;
  return {{"dataset", cfg.dataset},
          {"strategy", strategy},
          {"decode", decode},
          {"numDraws", cfg.num_draws},
          {"seed", cfg.seed},
          {"maxInFlight", cfg.max_in_flight},
          {"maxTokens", cfg.max_tokens},
          {"rephraser", cfg.rephraser},
          {"answerer", cfg.answerer},
          {"metricOptions",
           {{"eceBins", cfg.metrics.ece_bins},
            {"taceBins", cfg.metrics.tace_bins},
            {"taceThreshold", cfg.metrics.tace_threshold}}}};
}

nlohmann::json to_json(const CalibrationReport& r) {
  json bins = json::array();
  for (const auto& b : r.bins) {
    bins.push_back({{"lower", b.lower},
                    {"upper", b.upper},
                    {"meanConfidence", b.mean_confidence},
                    {"meanAccuracy", b.mean_accuracy},
                    {"count", b.count}});
  }
  return {{"accuracy", r.accuracy},  {"ece", r.ece},
          {"tace", optional_number(r.tace)}, {"brier", r.brier},
          {"auroc", optional_number(r.auroc)}, {"numItems", r.num_items},
          {"bins", bins}};
}

nlohmann::json summary_json(const RunRecord& run) {
  std::size_t total = 0;
  for (const auto& r : run.records) total += r.size();
  const auto& m = run.config.metrics;
  return {{"numQuestions", run.questions.size()},
          {"numRecords", total},
          {"backendFailures", run.backend_failures},
          {"parseFailures", run.parse_failures},
          {"metricOptions",
           {{"eceBins", m.ece_bins}, {"taceBins", m.tace_bins}, {"taceThreshold", m.tace_threshold}}},
          {"report", run.report ? to_json(*run.report) : json(nullptr)}};
}

nlohmann::json to_json(const AnswerRecord& r, const QuestionMeta& meta) {
  return {{"questionId", r.question_id},
          {"drawIndex", r.draw_index},
          {"numChoices", meta.num_choices},
          {"gold", label_or_null(meta.gold)},
          {"prompt", r.prompt},
          {"completion", r.completion},
          {"extracted", label_or_null(r.extracted)},
          {"error", r.error ? json(*r.error) : json(nullptr)}};
}

std::string raw_jsonl(const RunRecord& run) {
  std::string out;
  for (std::size_t qi = 0; qi < run.questions.size(); ++qi) {
    for (const auto& r : run.records[qi]) {
      out += to_json(r, run.questions[qi]).dump();
      out += '\n';
    }
  }
  return out;
}

std::string questions_csv(const RunRecord& run) {
  std::ostringstream out;
  out << "questionId,gold,predicted,confidence,correct,validDraws,counts\n";
  for (std::size_t qi = 0; qi < run.summaries.size(); ++qi) {
    const auto& s = run.summaries[qi];
    const auto& meta = run.questions[qi];
    std::string counts;
    for (int l = 0; l < s.num_choices(); ++l) {
      if (l) counts += ';';
      counts += ChoiceLabel(l).letter();
      counts += ':';
      counts += std::to_string(s.counts[l]);
    }
    out << csv_field(s.question_id) << ',' << (meta.gold ? meta.gold->str() : "") << ','
        << (s.predicted ? s.predicted->str() : "invalid") << ',' << num(s.confidence) << ','
        << (meta.gold ? (s.predicted == meta.gold ? "1" : "0") : "") << ',' << s.valid_draws << ','
        << counts << '\n';
  }
  return out.str();
}

std::string bins_csv(const CalibrationReport& r) {
  std::ostringstream out;
  out << "lower,upper,meanConfidence,meanAccuracy,count\n";
  for (const auto& b : r.bins) {
    out << num(b.lower) << ',' << num(b.upper) << ',' << num(b.mean_confidence) << ','
        << num(b.mean_accuracy) << ',' << b.count << '\n';
  }
  return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "draws,accuracy,ece,tace,brier,auroc\n";
  for (const auto& row : rows) {
    out << row.draws;
    if (row.report) {
      const auto& r = *row.report;
      out << ',' << num(r.accuracy) << ',' << num(r.ece) << ',' << (r.tace ? num(*r.tace) : "")
          << ',' << num(r.brier) << ',' << (r.auroc ? num(*r.auroc) : "");
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
  return out.str();
}

void emit_report(const RunRecord& run, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file(dir / "summary.json", dump_pretty(summary_json(run)));
  write_file(dir / "config.json", dump_pretty(to_json(run.config)));
  write_file(dir / "timing.json", dump_pretty({{"elapsedSeconds", run.elapsed_seconds}}));
  write_file(dir / "questions.csv", questions_csv(run));
  write_file(dir / "bins.csv", run.report ? bins_csv(*run.report) : std::string());
  write_file(dir / "raw.jsonl", raw_jsonl(run));
}

RunRecord replay_raw_jsonl(const std::filesystem::path& path, const MetricOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  RunRecord run;
  run.config.metrics = opts;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      AnswerRecord r;
      r.question_id = j.at("questionId").get<std::string>();
      r.draw_index = j.at("drawIndex").get<int>();
      r.prompt = j.at("prompt").get<std::string>();
      r.completion = j.at("completion").get<std::string>();
      r.extracted = label_from_json(j.at("extracted"));
      if (!j.at("error").is_null()) r.error = j["error"].get<std::string>();
      auto [it, fresh] = index.emplace(r.question_id, run.questions.size());
      if (fresh) {
        run.questions.push_back(
            {r.question_id, j.at("numChoices").get<int>(), label_from_json(j.at("gold"))});
        run.records.emplace_back();
      }
      run.records[it->second].push_back(std::move(r));
    } catch (const json::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (run.questions.empty()) throw std::runtime_error(path.string() + ": no records");
  int max_draws = 0;
  for (auto& recs : run.records) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const AnswerRecord& a, const AnswerRecord& b) { return a.draw_index < b.draw_index; });
    max_draws = std::max(max_draws, static_cast<int>(recs.size()));
  }
  run.config.num_draws = max_draws;
  summarize_run(run);
  return run;
}

}  // namespace rephrasecal
