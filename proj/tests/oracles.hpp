// Independent reference computations. Nothing here calls the code paths it
// is used to check.
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "raplyr/rational.hpp"

namespace raplyr::oracle {

/// Lowercase, then every maximal match of [a-z0-9]+('[a-z0-9]+)*.
inline std::vector<std::string> regex_tokens(const std::string& line) {
  std::string lower;
  for (char c : line) lower.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
  static const std::regex word("[a-z0-9]+(?:'[a-z0-9]+)*");
  std::vector<std::string> out;
  for (auto it = std::sregex_iterator(lower.begin(), lower.end(), word); it != std::sregex_iterator(); ++it)
    out.push_back(it->str());
  return out;
}

struct Surface {
  std::string text;
  int severity_tenths;
};

/// Slur score as an exact fraction: linear scan of the lexicon for each token
/// and then for its lemma (`lemma_of`), ws = sum / tokens, mean over lines
/// with tokens. nullopt when no line has a token.
template <typename LemmaFn>
std::optional<Rational> slur_score(const std::vector<std::string>& lines, const std::vector<Surface>& lexicon,
                                   LemmaFn lemma_of) {
  Rational total(0);
  std::int64_t counted = 0;
  for (const auto& line : lines) {
    auto toks = regex_tokens(line);
    if (toks.empty()) continue;
    std::int64_t sev = 0;
    for (const auto& t : toks) {
      const Surface* hit = nullptr;
      for (const auto& s : lexicon)
        if (s.text == t) hit = &s;
      if (!hit) {
        auto lemma = lemma_of(t);
        for (const auto& s : lexicon)
          if (s.text == lemma) hit = &s;
      }
      if (hit) sev += hit->severity_tenths;
    }
    total = total + Rational(sev, 10 * static_cast<std::int64_t>(toks.size()));
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return total / Rational(counted);
}

/// word -> vowel skeleton read straight from a dictionary file in the
/// `;;; vowels:` format (primary pronunciation only).
inline std::map<std::string, std::vector<std::string>> read_skeletons(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::set<std::string> vowels;
  std::map<std::string, std::vector<std::string>> out;
  while (std::getline(in, line)) {
    if (line.rfind(";;; vowels:", 0) == 0) {
      std::istringstream ss(line.substr(11));
      std::string v;
      while (ss >> v) vowels.insert(v);
      continue;
    }
    if (line.empty() || line[0] == ';') continue;
    std::istringstream ss(line);
    std::string word, ph;
    ss >> word;
    if (out.count(word)) continue;
    std::vector<std::string> skel;
    while (ss >> ph) {
      while (!ph.empty() && isdigit(static_cast<unsigned char>(ph.back()))) ph.pop_back();
      if (vowels.count(ph)) skel.push_back(ph);
    }
    out[word] = skel;
  }
  return out;
}

struct RhymeOracleResult {
  std::vector<std::size_t> per_token;
  std::size_t scored = 0;
  double density = 0.0;
};

/// Enumerates every suffix length of every scored token against every
/// stream position inside an admissible earlier token, comparing slices.
inline RhymeOracleResult rhyme_density(const std::vector<std::string>& tokens,
                                       const std::map<std::string, std::vector<std::string>>& skeletons,
                                       std::size_t window) {
  std::vector<std::string> stream;
  std::vector<std::size_t> owner;  // token index of each stream vowel
  std::vector<std::vector<std::string>> skel(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = skeletons.find(tokens[i]);
    if (it != skeletons.end()) skel[i] = it->second;
    for (const auto& v : skel[i]) {
      stream.push_back(v);
      owner.push_back(i);
    }
  }
  RhymeOracleResult r;
  r.per_token.assign(tokens.size(), 0);
  std::size_t sum = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (skel[i].empty()) continue;
    ++r.scored;
    std::size_t best = 0;
    for (std::size_t L = 1; L <= skel[i].size(); ++L) {
      std::vector<std::string> suffix(skel[i].end() - static_cast<std::ptrdiff_t>(L), skel[i].end());
      for (std::size_t start = 0; start + L <= stream.size(); ++start) {
        std::size_t end = start + L - 1;
        std::size_t j = owner[end];
        if (j >= i || i - j > window || tokens[j] == tokens[i]) continue;
        if (std::equal(suffix.begin(), suffix.end(), stream.begin() + static_cast<std::ptrdiff_t>(start)))
          best = std::max(best, L);
      }
    }
    r.per_token[i] = best;
    sum += best;
  }
  if (r.scored) r.density = static_cast<double>(sum) / static_cast<double>(r.scored);
  return r;
}

/// Reference xoshiro256** / splitmix64, written from the published
/// algorithm description.
class ReferenceRng {
 public:
  explicit ReferenceRng(std::uint64_t seed) {
    for (int i = 0; i < 4; ++i) {
      seed += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = seed;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      s_[i] = z ^ (z >> 31);
    }
  }
  std::uint64_t next() {
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }
  double uniform() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }

 private:
  std::uint64_t s_[4];
};

/// Interpolated add-k n-gram probabilities computed by scanning the raw
/// token stream for every count.
class ScanningNgram {
 public:
  ScanningNgram(std::vector<std::string> stream, int order, double k, double backoff)
      : stream_(std::move(stream)), order_(order), k_(k), b_(backoff) {
    std::set<std::string> v(stream_.begin(), stream_.end());
    v.insert("line:");
    v.insert("<unk>");
    vocab_.assign(v.begin(), v.end());
  }

  const std::vector<std::string>& vocab() const { return vocab_; }

  // Occurrences of `gram` as a contiguous slice of the stream.
  std::size_t count(const std::vector<std::string>& gram) const {
    if (gram.empty()) return stream_.size();
    std::size_t c = 0;
    for (std::size_t i = 0; i + gram.size() <= stream_.size(); ++i)
      if (std::equal(gram.begin(), gram.end(), stream_.begin() + static_cast<std::ptrdiff_t>(i))) ++c;
    return c;
  }

  // Occurrences of `h` followed by some token.
  std::size_t history_count(const std::vector<std::string>& h) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i + h.size() < stream_.size(); ++i)
      if (std::equal(h.begin(), h.end(), stream_.begin() + static_cast<std::ptrdiff_t>(i))) ++c;
    return c;
  }

  double prob(const std::vector<std::string>& history, const std::string& w) const {
    const double V = static_cast<double>(vocab_.size());
    double p = (static_cast<double>(count({w})) + k_) / (static_cast<double>(stream_.size()) + k_ * V);
    for (std::size_t len = 1; len < static_cast<std::size_t>(order_) && len <= history.size(); ++len) {
      std::vector<std::string> h(history.end() - static_cast<std::ptrdiff_t>(len), history.end());
      auto hc = history_count(h);
      if (hc == 0) continue;
      auto g = h;
      g.push_back(w);
      p = b_ * p + (1 - b_) * (static_cast<double>(count(g)) + k_) / (static_cast<double>(hc) + k_ * V);
    }
    return p;
  }

 private:
  std::vector<std::string> stream_;
  int order_;
  double k_, b_;
  std::vector<std::string> vocab_;
};

/// Replays top-k sampling step by step with the reference model and RNG.
inline std::vector<std::string> replay_completion(const ScanningNgram& model, std::vector<std::string> history,
                                                  std::size_t k, std::size_t min_tokens, std::size_t max_tokens,
                                                  std::uint64_t seed) {
  ReferenceRng rng(seed);
  std::vector<std::string> out;
  while (out.size() < max_tokens) {
    std::vector<std::pair<double, std::string>> cands;
    for (const auto& w : model.vocab()) {
      if (w == "<unk>") continue;
      if (w == "line:" && out.size() < min_tokens) continue;
      cands.emplace_back(model.prob(history, w), w);
    }
    std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    cands.resize(std::min(k, cands.size()));
    double mass = 0;
    for (const auto& c : cands) mass += c.first;
    double u = rng.uniform() * mass, acc = 0;
    std::string pick = cands.back().second;
    for (const auto& c : cands) {
      acc += c.first;
      if (u < acc) {
        pick = c.second;
        break;
      }
    }
    if (pick == "line:") break;
    out.push_back(pick);
    history.push_back(pick);
  }
  return out;
}

}  // namespace raplyr::oracle
