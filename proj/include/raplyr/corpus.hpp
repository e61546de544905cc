#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "raplyr/error.hpp"
#include "raplyr/text.hpp"

namespace raplyr {

enum class SectionKind { Verse, Chorus, Intro, Outro, Bridge, Interlude, Instrumental, Other };

inline std::string_view to_string(SectionKind kind) {
  switch (kind) {
    case SectionKind::Verse: return "verse";
    case SectionKind::Chorus: return "chorus";
    case SectionKind::Intro: return "intro";
    case SectionKind::Outro: return "outro";
    case SectionKind::Bridge: return "bridge";
    case SectionKind::Interlude: return "interlude";
    case SectionKind::Instrumental: return "instrumental";
    case SectionKind::Other: return "other";
  }
  return "other";
}

/// Maps a header label such as "Verse 2: Nas" or "HOOK" to its kind by
/// case-insensitive prefix. Hook, refrain and pre/post-chorus count as Chorus.
inline SectionKind section_kind_from_label(std::string_view label) {
  std::string l = to_lower(trim(label));
  static const std::array<std::pair<std::string_view, SectionKind>, 11> prefixes{{
      {"verse", SectionKind::Verse},
      {"chorus", SectionKind::Chorus},
      {"hook", SectionKind::Chorus},
      {"refrain", SectionKind::Chorus},
      {"pre-chorus", SectionKind::Chorus},
      {"post-chorus", SectionKind::Chorus},
      {"intro", SectionKind::Intro},
      {"outro", SectionKind::Outro},
      {"bridge", SectionKind::Bridge},
      {"interlude", SectionKind::Interlude},
      {"instrumental", SectionKind::Instrumental},
  }};
  for (const auto& [prefix, kind] : prefixes) {
    if (l.starts_with(prefix)) return kind;
  }
  return SectionKind::Other;
}

struct Section {
  SectionKind kind = SectionKind::Other;
  std::vector<std::string> lines;

  friend bool operator==(const Section&, const Section&) = default;
};

struct Song {
  std::string artist;
  std::string title;
  std::optional<int> year;
  std::string url;
  std::vector<Section> sections;

  /// All section lines in order.
  std::vector<std::string> lines() const {
    std::vector<std::string> out;
    for (const auto& s : sections) out.insert(out.end(), s.lines.begin(), s.lines.end());
    return out;
  }

  friend bool operator==(const Song&, const Song&) = default;
};

struct TokenizedLine {
  std::vector<std::string> tokens;
  std::vector<std::string> lemmas;
};

namespace detail {

inline std::optional<std::string_view> header_label(std::string_view line) {
  line = trim(line);
  if (line.size() < 2 || line.front() != '[' || line.back() != ']') return std::nullopt;
  line = line.substr(1, line.size() - 2);
  if (auto colon = line.find(':'); colon != std::string_view::npos) line = line.substr(0, colon);
  return line;
}

}  // namespace detail

/// Splits raw lyrics at bracketed headers. Blank lines are dropped. Text before
/// the first header becomes a Verse when the song has no headers at all and
/// Other otherwise.
inline std::vector<Section> parse_sections(std::string_view lyrics_text) {
  auto raw_lines = split_lines(lyrics_text);
  bool has_headers = std::any_of(raw_lines.begin(), raw_lines.end(),
                                 [](const auto& l) { return detail::header_label(l).has_value(); });

  std::vector<Section> sections;
  std::optional<Section> current;
  for (const auto& raw : raw_lines) {
    if (auto label = detail::header_label(raw)) {
      if (current) sections.push_back(std::move(*current));
      current = Section{section_kind_from_label(*label), {}};
      continue;
    }
    auto line = trim(raw);
    if (line.empty()) continue;
    if (!current) current = Section{has_headers ? SectionKind::Other : SectionKind::Verse, {}};
    current->lines.emplace_back(line);
  }
  if (current) sections.push_back(std::move(*current));
  return sections;
}

/// Keeps verse sections only, strips non-ASCII bytes, drops empty lines.
/// Returns nullopt when no verse line survives.
inline std::optional<Song> clean_song(const Song& song) {
  Song out{song.artist, song.title, song.year, song.url, {}};
  for (const auto& section : song.sections) {
    if (section.kind != SectionKind::Verse) continue;
    Section cleaned{SectionKind::Verse, {}};
    for (const auto& line : section.lines) {
      auto stripped = strip_non_ascii(line);
      if (!stripped.empty()) cleaned.lines.push_back(std::move(stripped));
    }
    if (!cleaned.lines.empty()) out.sections.push_back(std::move(cleaned));
  }
  if (out.sections.empty()) return std::nullopt;
  return out;
}

inline constexpr std::array<std::string_view, 50> kEnglishStopwords{
    "the",  "to",   "and",  "of",   "a",   "in",   "i",    "is",   "for",  "that",
    "you",  "it",   "on",   "with", "this", "was", "be",   "as",   "are",  "have",
    "at",   "he",   "not",  "by",   "but",  "from", "my",  "or",   "we",   "an",
    "your", "all",  "so",   "his",  "they", "me",  "if",   "one",  "can",  "will",
    "just", "like", "about", "up",  "out",  "what", "has", "when", "more", "do"};

inline constexpr double kDefaultEnglishThreshold = 0.15;

/// Share of verse tokens found in the stopword list, compared against
/// `threshold`. A song without tokens is not English.
inline bool is_english(const Song& song, double threshold = kDefaultEnglishThreshold) {
  static const std::unordered_set<std::string_view> stop(kEnglishStopwords.begin(),
                                                         kEnglishStopwords.end());
  std::size_t total = 0, hits = 0;
  for (const auto& section : song.sections) {
    for (const auto& line : section.lines) {
      for (const auto& tok : tokenize_line(line)) {
        ++total;
        if (stop.contains(tok)) ++hits;
      }
    }
  }
  if (total == 0) return false;
  return static_cast<double>(hits) / static_cast<double>(total) >= threshold;
}

/// Lowercase, remove (...) and [...] groups, keep only letters, digits and
/// single spaces.
inline std::string normalize_title(std::string_view title) {
  std::string out;
  int depth = 0;
  bool space = false;
  for (char c : title) {
    if (c == '(' || c == '[') {
      ++depth;
      continue;
    }
    if ((c == ')' || c == ']') && depth > 0) {
      --depth;
      continue;
    }
    if (depth > 0) continue;
    if (is_ascii_alnum(c)) {
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (c == ' ' || c == '\t') {
      space = true;
    }
  }
  return out;
}

/// One survivor per (artist, normalized title): earliest year wins, a missing
/// year loses to any known year, ties keep the earlier song. Survivors stay in
/// input order.
inline std::vector<Song> dedupe_corpus(const std::vector<Song>& songs) {
  std::map<std::pair<std::string, std::string>, std::size_t> best;
  for (std::size_t i = 0; i < songs.size(); ++i) {
    auto key = std::make_pair(to_lower(trim(songs[i].artist)), normalize_title(songs[i].title));
    auto [it, inserted] = best.try_emplace(std::move(key), i);
    if (inserted) continue;
    const auto& held = songs[it->second];
    const auto& cand = songs[i];
    bool earlier = cand.year && (!held.year || *cand.year < *held.year);
    if (earlier) it->second = i;
  }
  std::vector<bool> keep(songs.size(), false);
  for (const auto& [key, idx] : best) keep[idx] = true;
  std::vector<Song> out;
  for (std::size_t i = 0; i < songs.size(); ++i)
    if (keep[i]) out.push_back(songs[i]);
  return out;
}

/// form -> lemma lookup loaded from a two-column file.
class LemmaTable {
 public:
  LemmaTable() = default;
  explicit LemmaTable(std::unordered_map<std::string, std::string> forms) : forms_(std::move(forms)) {}

  /// `form<TAB>lemma` per line; '#' starts a comment line.
  static LemmaTable load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lemma table " + path.string());
    std::unordered_map<std::string, std::string> forms;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto body = trim(line);
      if (body.empty() || body.front() == '#') continue;
      auto tab = body.find('\t');
      if (tab == std::string_view::npos) throw ParseError("lemma table row needs a tab", lineno);
      forms.emplace(to_lower(trim(body.substr(0, tab))), to_lower(trim(body.substr(tab + 1))));
    }
    return LemmaTable(std::move(forms));
  }

  const std::string* find(const std::string& form) const {
    auto it = forms_.find(form);
    return it == forms_.end() ? nullptr : &it->second;
  }
  std::size_t size() const { return forms_.size(); }
  const std::unordered_map<std::string, std::string>& forms() const { return forms_; }

 private:
  std::unordered_map<std::string, std::string> forms_;
};

namespace detail {

inline bool is_vowel_letter(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// "runn" -> "run", but keeps "fall", "kiss", "buzz", "stuff".
inline std::string undouble(std::string stem) {
  auto n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel_letter(stem[n - 1]) &&
      std::string_view("lszf").find(stem[n - 1]) == std::string_view::npos) {
    stem.pop_back();
  }
  return stem;
}

}  // namespace detail

/// Table lookup, then the first applicable suffix rule: ies->y, es->"",
/// s->"", ing->"" (with doubled-consonant repair), ed->"". Stems shorter than
/// two letters (three for ing/ed) and words ending in ss/us/is are left alone.
inline std::string lemmatize(const std::string& token, const LemmaTable& table) {
  if (const auto* hit = table.find(token)) return *hit;
  auto ends = [&](std::string_view suf) { return token.size() > suf.size() && token.ends_with(suf); };
  auto stem = [&](std::size_t drop) { return token.substr(0, token.size() - drop); };
  if (ends("ies") && token.size() - 3 >= 2) return stem(3) + "y";
  if (ends("es") && token.size() - 2 >= 2) return stem(2);
  if (ends("s") && token.size() - 1 >= 2 && !ends("ss") && !ends("us") && !ends("is")) return stem(1);
  if (ends("ing") && token.size() - 3 >= 3) return detail::undouble(stem(3));
  if (ends("ed") && token.size() - 2 >= 3) return stem(2);
  return token;
}

inline TokenizedLine tokenize_and_lemmatize(std::string_view line, const LemmaTable& table) {
  TokenizedLine out;
  out.tokens = tokenize_line(line);
  out.lemmas.reserve(out.tokens.size());
  for (const auto& t : out.tokens) out.lemmas.push_back(lemmatize(t, table));
  return out;
}

struct CorpusStats {
  std::size_t song_count = 0;
  std::size_t token_count = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

inline CorpusStats corpus_stats(const std::vector<Song>& songs) {
  CorpusStats stats{songs.size(), 0};
  for (const auto& song : songs)
    for (const auto& section : song.sections)
      for (const auto& line : section.lines) stats.token_count += tokenize_line(line).size();
  return stats;
}

}  // namespace raplyr
