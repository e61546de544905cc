#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "raplyr/error.hpp"
#include "raplyr/subprocess.hpp"
#include "raplyr/text.hpp"

namespace raplyr {

using Phonemes = std::vector<std::string>;

inline constexpr std::size_t kDefaultRhymeWindow = 15;
inline constexpr std::string_view kArpabetVowels = "AA AE AH AO AW AY EH ER EY IH IY OW OY UH UW";
inline constexpr std::string_view kArpabetConsonants =
    "B CH D DH F G HH JH K L M N NG P R S SH T TH V W Y Z ZH";

/// "AO1" -> "AO"
inline std::string strip_stress(std::string_view phone) {
  while (!phone.empty() && phone.back() >= '0' && phone.back() <= '9') phone.remove_suffix(1);
  return std::string(phone);
}

namespace detail {

inline std::set<std::string> symbol_set(std::string_view list) {
  std::set<std::string> out;
  std::istringstream in{std::string(list)};
  std::string s;
  while (in >> s) out.insert(s);
  return out;
}

// IPA (as printed by espeak --ipa) to ARPABET. Longest key wins.
inline const std::vector<std::pair<std::string, std::string>>& ipa_table() {
  static const auto table = [] {
    std::vector<std::pair<std::string, std::string>> t{
        {"aɪə", "AY"}, {"aɪ", "AY"}, {"aʊ", "AW"}, {"eɪ", "EY"}, {"oʊ", "OW"}, {"əʊ", "OW"},
        {"ɔɪ", "OY"},  {"ɪə", "IH"}, {"eə", "EH"}, {"ʊə", "UH"}, {"ɑː", "AA"}, {"ɑ", "AA"},
        {"ɒ", "AA"},   {"a", "AA"},  {"æ", "AE"},  {"ʌ", "AH"},  {"ə", "AH"},  {"ɐ", "AH"},
        {"ɔː", "AO"},  {"ɔ", "AO"},  {"ɛ", "EH"},  {"e", "EH"},  {"ɜː", "ER"}, {"ɜ", "ER"},
        {"ɚ", "ER"},   {"ɝ", "ER"},  {"ɪ", "IH"},  {"ᵻ", "IH"},  {"iː", "IY"}, {"i", "IY"},
        {"ʊ", "UH"},   {"uː", "UW"}, {"u", "UW"},  {"o", "OW"},  {"tʃ", "CH"}, {"dʒ", "JH"},
        {"ŋ", "NG"},   {"ʃ", "SH"},  {"ʒ", "ZH"},  {"θ", "TH"},  {"ð", "DH"},  {"ɹ", "R"},
        {"r", "R"},    {"ɾ", "T"},   {"ʔ", "T"},   {"j", "Y"},   {"h", "HH"},  {"ɡ", "G"},
        {"g", "G"},    {"b", "B"},   {"d", "D"},   {"f", "F"},   {"k", "K"},   {"l", "L"},
        {"ɫ", "L"},    {"m", "M"},   {"n", "N"},   {"p", "P"},   {"s", "S"},   {"t", "T"},
        {"v", "V"},    {"w", "W"},   {"z", "Z"},   {"x", "HH"}};
    std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    return t;
  }();
  return table;
}

inline std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace detail

/// Converts one phonemizer reply into ARPABET symbols. A reply that is already
/// space-separated ARPABET is taken as is; otherwise it is read as IPA, with
/// stress and length marks and unknown symbols skipped.
inline Phonemes parse_phonemizer_reply(std::string_view reply, const std::set<std::string>& inventory) {
  reply = trim(reply);
  Phonemes out;
  {
    std::istringstream in{std::string(reply)};
    std::string sym;
    bool all_known = true;
    while (in >> sym) {
      if (!inventory.contains(strip_stress(sym))) {
        all_known = false;
        break;
      }
      out.push_back(sym);
    }
    if (all_known) return out;
    out.clear();
  }
  const auto& table = detail::ipa_table();
  std::size_t pos = 0;
  while (pos < reply.size()) {
    bool matched = false;
    for (const auto& [ipa, arpa] : table) {
      if (reply.compare(pos, ipa.size(), ipa) == 0) {
        out.push_back(arpa);
        pos += ipa.size();
        matched = true;
        break;
      }
    }
    if (!matched) pos += detail::utf8_length(static_cast<unsigned char>(reply[pos]));
  }
  return out;
}

/// Line-oriented external phonemizer: one token per stdin line, one phoneme
/// string per stdout line. Calls are serialized and replies cached.
class ExternalPhonemizer {
 public:
  explicit ExternalPhonemizer(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : command_(std::move(command)), timeout_(timeout) {}

  const std::string& command() const { return command_; }

  /// Raw reply line per token (empty string when the tool printed nothing).
  std::vector<std::string> query(const std::vector<std::string>& tokens) const {
    std::lock_guard lock(mu_);
    std::vector<std::string> missing;
    for (const auto& t : tokens)
      if (!cache_.contains(t) && std::find(missing.begin(), missing.end(), t) == missing.end()) missing.push_back(t);
    if (!missing.empty()) {
      std::string input;
      for (const auto& t : missing) input += t + "\n";
      ProcessResult res;
      try {
        res = run_process(command_, input, {timeout_, false});
      } catch (const ProcessError& e) {
        throw PhonemizerProcessError(std::string("phonemizer: ") + e.what());
      }
      if (res.exit_code != 0)
        throw PhonemizerProcessError("phonemizer exited with status " + std::to_string(res.exit_code) + ": " + res.err);
      auto lines = split_lines(res.out);
      if (!lines.empty() && lines.back().empty()) lines.pop_back();
      if (lines.size() < missing.size())
        throw PhonemizerProcessError("phonemizer returned " + std::to_string(lines.size()) + " lines for " +
                                     std::to_string(missing.size()) + " tokens");
      for (std::size_t i = 0; i < missing.size(); ++i) cache_[missing[i]] = lines[i];
    }
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(cache_.at(t));
    return out;
  }

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::string> cache_;
};

/// word -> pronunciations (first is primary), plus the vowel inventory.
class PronouncingDict {
 public:
  PronouncingDict()
      : vowels_(detail::symbol_set(kArpabetVowels)), consonants_(detail::symbol_set(kArpabetConsonants)) {}

  /// One entry per line, `word<TAB>PH PH PH` (any whitespace after the word is
  /// accepted, as is a CMU-style "(2)" suffix). Header comments
  /// `;;; vowels: ...` and `;;; consonants: ...` declare the inventory; both
  /// default to ARPABET. Repeated words add alternate pronunciations.
  static PronouncingDict parse(std::istream& in) {
    PronouncingDict dict;
    std::vector<std::pair<std::size_t, std::string>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto body = trim(line);
      if (body.empty()) continue;
      if (body.starts_with(";;;")) {
        auto rest = trim(body.substr(3));
        if (rest.starts_with("vowels:")) dict.vowels_ = detail::symbol_set(rest.substr(7));
        else if (rest.starts_with("consonants:")) dict.consonants_ = detail::symbol_set(rest.substr(11));
        continue;
      }
      if (body.starts_with("#")) continue;
      rows.emplace_back(lineno, std::string(body));
    }
    if (dict.vowels_.empty()) throw ParseError("pronouncing dictionary declares no vowels");
    for (const auto& [no, body] : rows) {
      std::istringstream fields(body);
      std::string word;
      fields >> word;
      if (auto paren = word.find('('); paren != std::string::npos && word.back() == ')') word.erase(paren);
      word = to_lower(word);
      Phonemes pron;
      std::string sym;
      while (fields >> sym) {
        if (!dict.in_inventory(sym)) throw ParseError("unknown phone '" + sym + "' for '" + word + "'", no);
        pron.push_back(sym);
      }
      if (word.empty() || pron.empty()) throw ParseError("entry needs a word and at least one phone", no);
      dict.entries_[word].push_back(std::move(pron));
    }
    return dict;
  }

  static PronouncingDict load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pronouncing dictionary " + path.string());
    return parse(in);
  }

  void add(const std::string& word, Phonemes pron) {
    for (const auto& p : pron)
      if (!in_inventory(p)) throw InvalidArgument("unknown phone '" + p + "'");
    if (pron.empty()) throw InvalidArgument("empty pronunciation");
    entries_[to_lower(word)].push_back(std::move(pron));
  }

  /// Routes dictionary misses to an external phonemizer.
  void set_hook(std::shared_ptr<const ExternalPhonemizer> hook) { hook_ = std::move(hook); }
  const std::shared_ptr<const ExternalPhonemizer>& hook() const { return hook_; }

  bool is_vowel(std::string_view phone) const { return vowels_.contains(strip_stress(phone)); }
  bool in_inventory(std::string_view phone) const {
    auto base = strip_stress(phone);
    return vowels_.contains(base) || consonants_.contains(base);
  }
  const std::set<std::string>& vowel_set() const { return vowels_; }
  std::set<std::string> inventory() const {
    auto all = vowels_;
    all.insert(consonants_.begin(), consonants_.end());
    return all;
  }

  const std::vector<Phonemes>* pronunciations(const std::string& word) const {
    auto it = entries_.find(word);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::size_t size() const { return entries_.size(); }

  /// Primary pronunciation, else the hook's reply, else nullopt.
  std::optional<Phonemes> phonemize(const std::string& token) const {
    return std::move(phonemize_all({token}).front());
  }

  /// Batch form; dictionary misses go to the hook in a single call.
  std::vector<std::optional<Phonemes>> phonemize_all(const std::vector<std::string>& tokens) const {
    std::vector<std::optional<Phonemes>> out(tokens.size());
    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (auto it = entries_.find(tokens[i]); it != entries_.end()) out[i] = it->second.front();
      else if (!tokens[i].empty()) misses.push_back(i);
    }
    if (hook_ && !misses.empty()) {
      std::vector<std::string> ask;
      for (auto i : misses) ask.push_back(tokens[i]);
      auto replies = hook_->query(ask);
      auto inv = inventory();
      for (std::size_t k = 0; k < misses.size(); ++k) {
        auto phones = parse_phonemizer_reply(replies[k], inv);
        if (!phones.empty()) out[misses[k]] = std::move(phones);
      }
    }
    return out;
  }

 private:
  std::unordered_map<std::string, std::vector<Phonemes>> entries_;
  std::set<std::string> vowels_;
  std::set<std::string> consonants_;
  std::shared_ptr<const ExternalPhonemizer> hook_;
};

inline PronouncingDict load_pronouncing_dict(const std::filesystem::path& path) { return PronouncingDict::load(path); }

/// Vowels of a pronunciation in order, stress digits removed.
inline std::vector<std::string> vowel_skeleton(const Phonemes& phonemes, const PronouncingDict& dict) {
  std::vector<std::string> out;
  for (const auto& p : phonemes) {
    auto base = strip_stress(p);
    if (dict.vowel_set().contains(base)) out.push_back(std::move(base));
  }
  return out;
}

struct RhymeDensityReport {
  std::vector<std::size_t> per_token_match;  // 0 for unscored tokens
  std::vector<bool> scored;
  std::size_t scored_count = 0;
  std::size_t oov_count = 0;  // tokens without vowels in their pronunciation
  double density = 0.0;

  /// Densities above 1 count as high.
  bool high() const { return density > 1.0; }
};

/// Lowercases and trims non-alphanumeric characters from both ends.
inline std::string normalize_rhyme_token(std::string_view token) {
  std::size_t b = 0, e = token.size();
  while (b < e && !is_ascii_alnum(token[b])) ++b;
  while (e > b && !is_ascii_alnum(token[e - 1])) --e;
  return to_lower(token.substr(b, e - b));
}

/// Longest-suffix vowel matching.
///
/// Token i's score is the length of the longest suffix of its vowel skeleton
/// that occurs in the running vowel stream (all tokens' skeletons
/// concatenated) as a contiguous run whose last vowel belongs to some token j
/// with i - window <= j < i and a surface form different from token i. The
/// density is the mean score over tokens with a non-empty skeleton whose
/// index is >= `first_scored`; earlier tokens only serve as context.
inline RhymeDensityReport rhyme_density_from(const std::vector<std::string>& raw_tokens, const PronouncingDict& dict,
                                             std::size_t window, std::size_t first_scored) {
  if (window == 0) throw InvalidArgument("rhyme window must be >= 1");
  const std::size_t n = raw_tokens.size();
  std::vector<std::string> tokens;
  tokens.reserve(n);
  for (const auto& t : raw_tokens) tokens.push_back(normalize_rhyme_token(t));

  auto prons = dict.phonemize_all(tokens);
  std::vector<std::string> stream;          // concatenated vowels
  std::vector<std::size_t> begin(n), end(n);  // token i owns stream[begin, end)
  std::vector<std::vector<std::string>> skel(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (prons[i]) skel[i] = vowel_skeleton(*prons[i], dict);
    begin[i] = stream.size();
    stream.insert(stream.end(), skel[i].begin(), skel[i].end());
    end[i] = stream.size();
  }

  RhymeDensityReport report;
  report.per_token_match.assign(n, 0);
  report.scored.assign(n, false);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (skel[i].empty()) {
      if (i >= first_scored) ++report.oov_count;
      continue;
    }
    std::size_t best = 0;
    const auto& s = skel[i];
    std::size_t lo = i > window ? i - window : 0;
    for (std::size_t j = lo; j < i && best < s.size(); ++j) {
      if (tokens[j] == tokens[i]) continue;
      for (std::size_t p = begin[j]; p < end[j]; ++p) {
        // Walk backwards from stream[p] and from the last vowel of token i.
        std::size_t len = 0;
        while (len < s.size() && len <= p && stream[p - len] == s[s.size() - 1 - len]) ++len;
        best = std::max(best, len);
      }
    }
    if (i < first_scored) continue;
    report.per_token_match[i] = best;
    report.scored[i] = true;
    ++report.scored_count;
    total += best;
  }
  if (report.scored_count > 0)
    report.density = static_cast<double>(total) / static_cast<double>(report.scored_count);
  return report;
}

inline RhymeDensityReport rhyme_density(const std::vector<std::string>& tokens, const PronouncingDict& dict,
                                        std::size_t window = kDefaultRhymeWindow) {
  return rhyme_density_from(tokens, dict, window, 0);
}

inline std::vector<std::string> tokenize_lines(const std::vector<std::string>& lines) {
  std::vector<std::string> out;
  for (const auto& l : lines) {
    auto t = tokenize_line(l);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

/// Tokenizes every line and scores the joined token stream.
inline RhymeDensityReport rhyme_density_text(const std::vector<std::string>& lines, const PronouncingDict& dict,
                                             std::size_t window = kDefaultRhymeWindow) {
  return rhyme_density(tokenize_lines(lines), dict, window);
}

/// Scores only the tokens of `continuation`, letting them match against the
/// preceding context.
inline RhymeDensityReport rhyme_density_after(const std::vector<std::string>& context_lines,
                                              const std::vector<std::string>& continuation, const PronouncingDict& dict,
                                              std::size_t window = kDefaultRhymeWindow) {
  auto tokens = tokenize_lines(context_lines);
  std::size_t first = tokens.size();
  auto more = tokenize_lines(continuation);
  tokens.insert(tokens.end(), more.begin(), more.end());
  return rhyme_density_from(tokens, dict, window, first);
}

}  // namespace raplyr
