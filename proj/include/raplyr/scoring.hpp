#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "raplyr/corpus.hpp"
#include "raplyr/error.hpp"
#include "raplyr/lexicon.hpp"
#include "raplyr/records.hpp"

namespace raplyr {

/// Default song-level cut-off, the third quartile of the raw-corpus
/// slur_score distribution.
inline constexpr double kDefaultSlurThreshold = 0.05;
inline constexpr double kDefaultFilterQuantile = 0.75;

using CategoryCounts = std::array<std::size_t, kCategoryCount>;

struct ProfanityMatch {
  std::size_t token_index = 0;
  ProfanityEntry entry;
};

struct LineAnnotation {
  std::size_t line_index = 0;  // index into Song::lines()
  std::size_t token_count = 0;
  std::vector<ProfanityMatch> matches;
  double ws_score = 0.0;
};

struct SongAnnotation {
  Song song;
  std::vector<LineAnnotation> lines;  // lines with at least one token
  double slur_score = 0.0;
  CategoryCounts category_counts{};

  std::size_t match_count() const {
    std::size_t n = 0;
    for (const auto& l : lines) n += l.matches.size();
    return n;
  }
};

struct FilterOutcome {
  double threshold = 0.0;
  std::vector<SongAnnotation> kept;
  std::vector<SongAnnotation> dropped;
};

inline const LemmaTable& empty_lemma_table() {
  static const LemmaTable table;
  return table;
}

/// Severity-weighted profanity density of one line: matched severities summed
/// and divided by the token count. Each token is charged at most once.
inline LineAnnotation annotate_line(std::string_view line, std::size_t line_index, const Lexicon& lexicon,
                                    const LemmaTable& lemmas) {
  auto tl = tokenize_and_lemmatize(line, lemmas);
  LineAnnotation out{line_index, tl.tokens.size(), {}, 0.0};
  double sum = 0.0;
  for (std::size_t i = 0; i < tl.tokens.size(); ++i) {
    if (const auto* hit = lexicon.lookup(tl.tokens[i], tl.lemmas[i])) {
      out.matches.push_back({i, *hit});
      sum += hit->severity;
    }
  }
  if (out.token_count > 0) out.ws_score = sum / static_cast<double>(out.token_count);
  return out;
}

/// Per-line ws_score and the song's slur_score (mean ws_score over lines that
/// have tokens). Throws EmptySong when no line has a token.
inline SongAnnotation annotate_song(const Song& song, const Lexicon& lexicon,
                                    const LemmaTable& lemmas = empty_lemma_table()) {
  SongAnnotation out{song, {}, 0.0, {}};
  auto lines = song.lines();
  double sum = 0.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto ann = annotate_line(lines[i], i, lexicon, lemmas);
    if (ann.token_count == 0) continue;
    sum += ann.ws_score;
    for (const auto& m : ann.matches) ++out.category_counts[static_cast<std::size_t>(m.entry.category)];
    out.lines.push_back(std::move(ann));
  }
  if (out.lines.empty()) throw EmptySong("song '" + song.title + "' has no non-empty lines");
  out.slur_score = sum / static_cast<double>(out.lines.size());
  return out;
}

/// Same formula as annotate_song, for arbitrary text such as generated lines.
inline double slur_score_of_text(const std::vector<std::string>& lines, const Lexicon& lexicon,
                                 const LemmaTable& lemmas = empty_lemma_table()) {
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto ann = annotate_line(lines[i], i, lexicon, lemmas);
    if (ann.token_count == 0) continue;
    sum += ann.ws_score;
    ++counted;
  }
  if (counted == 0) throw EmptyInput("slur score needs at least one non-empty line");
  return sum / static_cast<double>(counted);
}

/// 1-based nearest rank ceil(q * n), clamped to [1, n]. A relative slack of
/// 1e-12 keeps products such as 0.7 * 10 from rounding up a rank.
inline std::size_t nearest_rank(double q, std::size_t n) {
  double x = q * static_cast<double>(n);
  auto rank = static_cast<std::size_t>(std::ceil(x - 1e-12 * std::max(1.0, x)));
  return std::clamp<std::size_t>(rank, 1, n);
}

/// Nearest-rank quantile, q in (0, 1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyInput("quantile of empty list");
  if (!(q > 0.0 && q <= 1.0)) throw InvalidArgument("quantile q must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  return values[nearest_rank(q, values.size()) - 1];
}

/// Song-level split: kept iff slur_score <= threshold. Input order is kept.
inline FilterOutcome filter_corpus(std::vector<SongAnnotation> annotations, double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("threshold must be >= 0");
  FilterOutcome out{threshold, {}, {}};
  for (auto& a : annotations) (a.slur_score <= threshold ? out.kept : out.dropped).push_back(std::move(a));
  return out;
}

inline std::vector<double> slur_scores(const std::vector<SongAnnotation>& annotations) {
  std::vector<double> v;
  v.reserve(annotations.size());
  for (const auto& a : annotations) v.push_back(a.slur_score);
  return v;
}

inline CategoryCounts category_histogram(const std::vector<SongAnnotation>& annotations) {
  CategoryCounts total{};
  for (const auto& a : annotations)
    for (std::size_t i = 0; i < kCategoryCount; ++i) total[i] += a.category_counts[i];
  return total;
}

// ---- annotation records -------------------------------------------------

inline nlohmann::json match_to_json(const ProfanityMatch& m) {
  return {{"token", m.token_index},
          {"surface", m.entry.surface},
          {"canonical", m.entry.canonical},
          {"category", std::string(to_string(m.entry.category))},
          {"severity", m.entry.severity}};
}

inline nlohmann::json to_json(const SongAnnotation& a) {
  auto j = song_to_json(a.song);
  j["slur_score"] = a.slur_score;
  auto lines = nlohmann::json::array();
  for (const auto& l : a.lines) {
    auto matches = nlohmann::json::array();
    for (const auto& m : l.matches) matches.push_back(match_to_json(m));
    lines.push_back({{"line", l.line_index}, {"tokens", l.token_count}, {"ws_score", l.ws_score}, {"matches", matches}});
  }
  j["lines"] = std::move(lines);
  auto counts = nlohmann::json::object();
  for (auto c : all_categories()) counts[std::string(to_string(c))] = a.category_counts[static_cast<std::size_t>(c)];
  j["category_counts"] = std::move(counts);
  return j;
}

inline SongAnnotation annotation_from_json(const nlohmann::json& j) {
  SongAnnotation a;
  a.song = song_from_json(j);
  a.slur_score = j.at("slur_score").get<double>();
  for (const auto& l : j.value("lines", nlohmann::json::array())) {
    LineAnnotation line{l.at("line").get<std::size_t>(), l.at("tokens").get<std::size_t>(), {},
                        l.at("ws_score").get<double>()};
    for (const auto& m : l.value("matches", nlohmann::json::array())) {
      auto cat = category_from_string(m.at("category").get<std::string>());
      if (!cat) throw ParseError("unknown category in annotation");
      ProfanityEntry e{m.at("surface").get<std::string>(), m.value("canonical", m.at("surface").get<std::string>()),
                       *cat, m.at("severity").get<double>(), {}, {}};
      e.bucket = severity_bucket(e.severity);
      ++a.category_counts[static_cast<std::size_t>(*cat)];
      line.matches.push_back({m.at("token").get<std::size_t>(), std::move(e)});
    }
    a.lines.push_back(std::move(line));
  }
  return a;
}

inline std::vector<SongAnnotation> read_annotations(const std::filesystem::path& path) {
  std::vector<SongAnnotation> out;
  for_each_json_line(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(annotation_from_json(j)); });
  return out;
}

inline std::size_t write_annotations(const std::vector<SongAnnotation>& annotations, const std::filesystem::path& path) {
  std::vector<nlohmann::json> rows;
  rows.reserve(annotations.size());
  for (const auto& a : annotations) rows.push_back(to_json(a));
  write_json_lines(rows, path);
  return rows.size();
}

}  // namespace raplyr
