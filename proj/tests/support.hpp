// Shared fixtures and synthetic data for the unit and acceptance suites.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "raplyr/raplyr.hpp"

namespace raplyr::testing {

inline std::string fixture(const std::string& name) { return std::string(RAPLYR_FIXTURES) + "/" + name; }

inline Song make_song(std::string title, std::vector<std::string> lines, std::string artist = "Artist") {
  return Song{std::move(artist), std::move(title), std::nullopt, "", {Section{SectionKind::Verse, std::move(lines)}}};
}

/// Severity stored in tenths so oracles can use exact fractions.
struct SyntheticEntry {
  std::string surface;
  int severity_tenths;
  ProfanityCategory category;
};

inline std::vector<SyntheticEntry> synthetic_entries() {
  return {
      {"zorp", 10, ProfanityCategory::OtherInsult},       {"blick", 13, ProfanityCategory::SexualAnatomy},
      {"fraz", 15, ProfanityCategory::SexualAnatomy},     {"skog", 17, ProfanityCategory::BodilyFluids},
      {"wubb", 20, ProfanityCategory::RacialEthnic},      {"grunt", 22, ProfanityCategory::ReligiousOffense},
      {"pliff", 24, ProfanityCategory::MentalDisability}, {"drax", 25, ProfanityCategory::SexualOrientation},
      {"vorn", 28, ProfanityCategory::AnimalReferences},  {"qux", 30, ProfanityCategory::Political},
  };
}

inline Lexicon synthetic_lexicon() {
  Lexicon lex;
  for (const auto& e : synthetic_entries())
    lex.add({e.surface, e.surface, e.category, e.severity_tenths / 10.0, {}, {}});
  return lex;
}

/// Words with entries in fixtures/fixture.dict.
inline const std::vector<std::string>& dict_words() {
  static const std::vector<std::string> words{
      "walk", "talk",  "stalk", "cat",  "hat",   "bat",   "game",  "name",  "fame",  "flame",
      "time", "rhyme", "crime", "mind", "find",  "night", "light", "fight", "money", "honey",
      "day",  "way",   "play",  "stay", "flow",  "show",  "slow",  "later", "paper", "rider"};
  return words;
}

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{"i", "the", "you", "my", "we", "got", "in", "on", "to", "a", "and", "is"};
  return words;
}

/// How much profanity a synthetic song carries: the probability that any
/// one token is replaced by a lexicon surface (or an inflected form of one).
inline double pick_profanity_rate(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng);
  if (r < 0.6) return 0.0;   // clean
  if (r < 0.75) return 0.03;  // light
  return 0.35;                // heavy
}

/// Random verse song over fixture-dictionary words and fillers, with
/// profanities planted at `rate`.
inline Song synthetic_song(std::mt19937_64& rng, const std::string& title, double rate, bool inflect = true) {
  const auto& words = dict_words();
  const auto& fillers = filler_words();
  const auto entries = synthetic_entries();
  std::uniform_int_distribution<int> n_lines(2, 12), n_tokens(3, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> lines;
  int L = n_lines(rng);
  for (int l = 0; l < L; ++l) {
    int T = n_tokens(rng);
    std::vector<std::string> toks;
    for (int t = 0; t < T; ++t) {
      if (u(rng) < rate) {
        std::string w = entries[rng() % entries.size()].surface;
        if (inflect && u(rng) < 0.2) w += "s";
        if (u(rng) < 0.1) w[0] = static_cast<char>(std::toupper(w[0]));
        toks.push_back(w);
      } else if (u(rng) < 0.35) {
        toks.push_back(fillers[rng() % fillers.size()]);
      } else {
        toks.push_back(words[rng() % words.size()]);
      }
    }
    std::string line = join(toks);
    if (u(rng) < 0.3) line += ",";
    lines.push_back(line);
  }
  return make_song(title, std::move(lines));
}

inline std::vector<Song> synthetic_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Song> songs;
  for (std::size_t i = 0; i < n; ++i) {
    double rate = pick_profanity_rate(rng);
    songs.push_back(synthetic_song(rng, "song " + std::to_string(i), rate));
  }
  return songs;
}

}  // namespace raplyr::testing
