#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "raplyr/generator.hpp"
#include "raplyr/rational.hpp"

namespace raplyr {

struct EvalInstance {
  std::string title;
  std::vector<std::string> input;
  std::vector<std::string> reference;
  std::string generated;
  double generated_rd = 0.0;           // against the input context
  double generated_rd_isolated = 0.0;  // the generated line on its own
  double reference_rd = 0.0;
  double slur_score = 0.0;
};

struct EvalReport {
  std::string model_name;
  double reference_rd = 0.0;
  double generated_rd = 0.0;
  double generated_rd_isolated = 0.0;
  double perplexity = 0.0;
  double generated_slur_score = 0.0;
  std::size_t num_instances = 0;
  std::size_t skipped = 0;
  std::vector<EvalInstance> instances;
};

/// Splits every test song into input and reference halves, completes from the
/// input (instance i uses seed params.seed + i) and averages the metrics.
/// Perplexity covers the whole test text; the slur score covers all generated
/// lines together.
inline EvalReport evaluate(const NgramModel& model, const std::vector<Song>& test_songs, const Lexicon& lexicon,
                           const PronouncingDict& dict, const GenParams& params, std::string model_name = "n-gram",
                           const LemmaTable& lemmas = empty_lemma_table()) {
  if (test_songs.empty()) throw EmptyTestSet("evaluation needs at least one test song");
  EvalReport report;
  report.model_name = std::move(model_name);
  std::vector<std::string> generated;
  for (const auto& song : test_songs) {
    std::pair<std::vector<std::string>, std::vector<std::string>> parts;
    try {
      parts = split_test_instance(song);
    } catch (const TooShort&) {
      ++report.skipped;
      continue;
    }
    if (!detail::has_tokens(parts.first) || !detail::has_tokens(parts.second)) {
      ++report.skipped;
      continue;
    }
    GenParams p = params;
    p.seed = params.seed + report.instances.size();
    auto result = complete_reranked(model, CompletionQuery{parts.first}, p, lexicon, dict, lemmas);
    EvalInstance inst;
    inst.title = song.title;
    inst.input = std::move(parts.first);
    inst.reference = std::move(parts.second);
    inst.generated = result.line;
    inst.generated_rd = result.rhyme_density_vs_context;
    inst.generated_rd_isolated = rhyme_density_text({result.line}, dict, params.window).density;
    inst.reference_rd = rhyme_density_text(inst.reference, dict, params.window).density;
    inst.slur_score = result.slur_score;
    generated.push_back(result.line);
    report.instances.push_back(std::move(inst));
  }
  report.num_instances = report.instances.size();
  if (report.num_instances == 0) throw EmptyTestSet("no test song has two or more lines");
  const auto n = static_cast<double>(report.num_instances);
  for (const auto& inst : report.instances) {
    report.reference_rd += inst.reference_rd / n;
    report.generated_rd += inst.generated_rd / n;
    report.generated_rd_isolated += inst.generated_rd_isolated / n;
  }
  report.perplexity = perplexity(model, prepare_training(test_songs));
  report.generated_slur_score = slur_score_of_text(generated, lexicon, lemmas);
  return report;
}

inline nlohmann::json to_json(const EvalReport& r, bool with_instances = true) {
  nlohmann::json j{{"model_name", r.model_name},
                   {"reference_rd", r.reference_rd},
                   {"generated_rd", r.generated_rd},
                   {"generated_rd_isolated", r.generated_rd_isolated},
                   {"perplexity_ngram", r.perplexity},
                   {"generated_slur_score", r.generated_slur_score},
                   {"num_instances", r.num_instances},
                   {"skipped", r.skipped}};
  if (with_instances) {
    auto arr = nlohmann::json::array();
    for (const auto& i : r.instances)
      arr.push_back({{"title", i.title},
                     {"input", i.input},
                     {"reference", i.reference},
                     {"generated", i.generated},
                     {"generated_rd", i.generated_rd},
                     {"generated_rd_isolated", i.generated_rd_isolated},
                     {"reference_rd", i.reference_rd},
                     {"slur_score", i.slur_score}});
    j["instances"] = std::move(arr);
  }
  return j;
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.model_name = j.at("model_name").get<std::string>();
  r.reference_rd = j.at("reference_rd").get<double>();
  r.generated_rd = j.at("generated_rd").get<double>();
  r.generated_rd_isolated = j.value("generated_rd_isolated", 0.0);
  r.perplexity = j.at("perplexity_ngram").get<double>();
  r.generated_slur_score = j.at("generated_slur_score").get<double>();
  r.num_instances = j.at("num_instances").get<std::size_t>();
  r.skipped = j.value("skipped", std::size_t{0});
  return r;
}

/// Published reference points, shown as labelled static rows only.
struct BaselineRow {
  const char* model;
  const char* generated_rd;
  const char* slur_score;
};
inline constexpr BaselineRow kPublishedBaselines[] = {
    {"Ghostwriter (published)", "0.17", "-"},
    {"DopeLearning (published)", "1.4", "0.23"},
};

enum class Winner { A, B, Tie };

struct MetricComparison {
  std::string metric;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;  // b - a
  Winner winner = Winner::Tie;
};

struct ReportComparison {
  std::string name_a;
  std::string name_b;
  std::vector<MetricComparison> rows;
};

/// Higher rhyme density wins; lower perplexity and slur score win.
inline ReportComparison compare_reports(const EvalReport& a, const EvalReport& b) {
  ReportComparison out{a.model_name, b.model_name, {}};
  auto row = [&](const char* name, double va, double vb, bool higher_better) {
    Winner w = Winner::Tie;
    if (va != vb) w = ((vb > va) == higher_better) ? Winner::B : Winner::A;
    out.rows.push_back({name, va, vb, vb - va, w});
  };
  row("reference_rd", a.reference_rd, b.reference_rd, true);
  row("generated_rd", a.generated_rd, b.generated_rd, true);
  row("generated_rd_isolated", a.generated_rd_isolated, b.generated_rd_isolated, true);
  row("perplexity_ngram", a.perplexity, b.perplexity, false);
  row("generated_slur_score", a.generated_slur_score, b.generated_slur_score, false);
  return out;
}

namespace detail {

inline std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace detail

/// Aligned text tables: rhyme density and perplexity per model, slur score per
/// model, then the metric-by-metric deltas.
inline std::string render_reports(const std::vector<EvalReport>& reports, bool with_baselines = true) {
  using detail::fixed;
  using detail::pad;
  std::ostringstream os;
  os << pad("Model", 28) << pad("Reference RD", 14) << pad("Generated RD", 14) << pad("Generated RD (alone)", 22)
     << "PP (n-gram)\n";
  if (with_baselines) os << pad(kPublishedBaselines[0].model, 28) << pad("-", 14) << pad(kPublishedBaselines[0].generated_rd, 14) << pad("-", 22) << "-\n";
  for (const auto& r : reports)
    os << pad(r.model_name, 28) << pad(fixed(r.reference_rd), 14) << pad(fixed(r.generated_rd), 14)
       << pad(fixed(r.generated_rd_isolated), 22) << fixed(r.perplexity, 1) << "\n";
  if (with_baselines) os << pad(kPublishedBaselines[1].model, 28) << pad("-", 14) << pad(kPublishedBaselines[1].generated_rd, 14) << pad("-", 22) << "-\n";
  os << "\n" << pad("Model", 28) << "Slur score\n";
  for (const auto& r : reports) os << pad(r.model_name, 28) << fixed(r.generated_slur_score, 4) << "\n";
  if (with_baselines) os << pad(kPublishedBaselines[1].model, 28) << kPublishedBaselines[1].slur_score << "\n";
  return os.str();
}

inline std::string render_comparison(const ReportComparison& c) {
  using detail::fixed;
  using detail::pad;
  std::ostringstream os;
  os << pad("Metric", 24) << pad(c.name_a, 16) << pad(c.name_b, 16) << pad("Delta", 12) << "Better\n";
  for (const auto& r : c.rows) {
    const char* w = r.winner == Winner::Tie ? "tie" : (r.winner == Winner::A ? c.name_a.c_str() : c.name_b.c_str());
    os << pad(r.metric, 24) << pad(fixed(r.a, 4), 16) << pad(fixed(r.b, 4), 16) << pad(fixed(r.delta, 4), 12) << w
       << "\n";
  }
  return os.str();
}

inline nlohmann::json to_json(const ReportComparison& c) {
  auto rows = nlohmann::json::array();
  for (const auto& r : c.rows)
    rows.push_back({{"metric", r.metric},
                    {"a", r.a},
                    {"b", r.b},
                    {"delta", r.delta},
                    {"better", r.winner == Winner::Tie ? "tie" : (r.winner == Winner::A ? c.name_a : c.name_b)}});
  return {{"a", c.name_a}, {"b", c.name_b}, {"rows", rows}};
}

// ---- energy ---------------------------------------------------------------

inline const Rational kDefaultGpuWatts{250};

struct EnergyReport {
  Rational power_watts;
  Rational hours;
  Rational kwh;

  friend bool operator==(const EnergyReport&, const EnergyReport&) = default;
};

/// E = P t, in kilowatt hours.
inline EnergyReport energy(const Rational& power_watts, const Rational& hours) {
  if (power_watts <= Rational(0)) throw NegativeInput("power must be positive");
  if (hours < Rational(0)) throw NegativeInput("hours must be non-negative");
  return {power_watts, hours, power_watts * hours / Rational(1000)};
}

}  // namespace raplyr
