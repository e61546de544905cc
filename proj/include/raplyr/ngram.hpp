#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "raplyr/corpus.hpp"
#include "raplyr/error.hpp"
#include "raplyr/text.hpp"

namespace raplyr {

inline constexpr std::string_view kLineSeparator = "line:";
inline constexpr std::string_view kUnknownToken = "<unk>";
inline constexpr int kDefaultOrder = 4;
inline constexpr double kDefaultAddK = 0.01;
inline constexpr double kDefaultBackoff = 0.4;

/// Lowercase tokens of verse lines, each line preceded by the separator.
struct TrainingStream {
  std::vector<std::string> tokens;
};

/// Appends "line:" plus the line's tokens for every line that has tokens.
inline void append_lines(TrainingStream& stream, const std::vector<std::string>& lines) {
  for (const auto& line : lines) {
    auto toks = tokenize_line(line);
    if (toks.empty()) continue;
    stream.tokens.emplace_back(kLineSeparator);
    stream.tokens.insert(stream.tokens.end(), toks.begin(), toks.end());
  }
}

inline TrainingStream prepare_lines(const std::vector<std::string>& lines) {
  TrainingStream s;
  append_lines(s, lines);
  return s;
}

inline TrainingStream prepare_training(const std::vector<Song>& songs) {
  TrainingStream s;
  for (const auto& song : songs) append_lines(s, song.lines());
  if (s.tokens.empty()) throw EmptyCorpus("no tokens to train on");
  return s;
}

/// Interpolated add-k n-gram model with a fixed backoff weight.
///
///   P(w)     = (c(w) + k) / (N + k V)
///   P(w | h) = (1 - b) (c(h w) + k) / (c(h) + k V) + b P(w | h')   if c(h) > 0
///   P(w | h) = P(w | h')                                            otherwise
///
/// where h' drops the oldest token of h, c(h) counts h as a history and V is
/// the vocabulary size (including "<unk>", which is never observed). Every
/// conditional distribution sums to one over the vocabulary.
class NgramModel {
 public:
  using TokenId = std::uint32_t;

  struct Successors {
    std::uint64_t total = 0;
    std::vector<std::pair<TokenId, std::uint64_t>> counts;  // sorted by id

    std::uint64_t count(TokenId w) const {
      auto it = std::lower_bound(counts.begin(), counts.end(), w,
                                 [](const auto& p, TokenId id) { return p.first < id; });
      return it != counts.end() && it->first == w ? it->second : 0;
    }
  };

  NgramModel() = default;

  static NgramModel train(const TrainingStream& stream, int order = kDefaultOrder, double add_k = kDefaultAddK,
                          double backoff = kDefaultBackoff) {
    if (order < 2) throw InvalidArgument("n-gram order must be >= 2");
    if (stream.tokens.empty()) throw EmptyCorpus("empty training stream");
    if (stream.tokens.size() <= static_cast<std::size_t>(order))
      throw EmptyCorpus("training stream must be longer than the model order");
    std::vector<std::string> vocab(stream.tokens.begin(), stream.tokens.end());
    vocab.emplace_back(kLineSeparator);
    vocab.emplace_back(kUnknownToken);
    NgramModel m(std::move(vocab), order, add_k, backoff);

    std::vector<TokenId> ids;
    ids.reserve(stream.tokens.size());
    for (const auto& t : stream.tokens) ids.push_back(m.id_of(t));
    std::vector<std::unordered_map<std::string, std::map<TokenId, std::uint64_t>>> raw(order);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      ++m.unigrams_[ids[i]];
      ++m.total_;
      for (int len = 1; len < order && static_cast<std::size_t>(len) <= i; ++len) {
        ++raw[len][key(ids.data() + i - len, static_cast<std::size_t>(len))][ids[i]];
      }
    }
    for (int len = 1; len < order; ++len) {
      for (auto& [ctx, succ] : raw[len]) {
        Successors s;
        for (const auto& [w, c] : succ) {
          s.total += c;
          s.counts.emplace_back(w, c);
        }
        m.histories_[len].emplace(ctx, std::move(s));
      }
    }
    return m;
  }

  /// A model with no counts: every token of `vocab` gets probability 1/|vocab|.
  static NgramModel uniform(std::vector<std::string> vocab, double add_k = kDefaultAddK) {
    if (vocab.empty()) throw InvalidArgument("empty vocabulary");
    return NgramModel(std::move(vocab), 1, add_k, kDefaultBackoff);
  }

  int order() const { return order_; }
  double add_k() const { return add_k_; }
  double backoff() const { return backoff_; }
  std::uint64_t total() const { return total_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  const std::string& token(TokenId id) const { return vocab_.at(id); }

  bool contains(std::string_view tok) const { return index_.contains(std::string(tok)); }
  std::uint64_t unigram_count(std::string_view tok) const {
    auto it = index_.find(std::string(tok));
    return it == index_.end() ? 0 : unigrams_[it->second];
  }

  /// Count of `tokens` as an n-gram (history followed by last token).
  std::uint64_t ngram_count(const std::vector<std::string>& tokens) const {
    if (tokens.empty() || tokens.size() > static_cast<std::size_t>(order_)) return 0;
    std::vector<TokenId> ids;
    for (const auto& t : tokens) {
      auto it = index_.find(t);
      if (it == index_.end()) return 0;
      ids.push_back(it->second);
    }
    if (ids.size() == 1) return unigrams_[ids[0]];
    const auto* s = successors(ids.data(), ids.size() - 1);
    return s ? s->count(ids.back()) : 0;
  }

  /// Id for a token; unknown tokens map to "<unk>" when the vocabulary has it.
  TokenId id_of(std::string_view tok) const {
    auto it = index_.find(std::string(tok));
    if (it != index_.end()) return it->second;
    return unk_;
  }
  std::optional<TokenId> find_id(std::string_view tok) const {
    auto it = index_.find(std::string(tok));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<TokenId> unknown_id() const {
    if (unk_ == kNoId) return std::nullopt;
    return unk_;
  }

  /// Full next-token distribution after `history` (only its last order-1
  /// tokens matter).
  std::vector<double> distribution(const std::vector<TokenId>& history) const {
    const double v = static_cast<double>(vocab_.size());
    const double base_den = static_cast<double>(total_) + add_k_ * v;
    std::vector<double> p(vocab_.size());
    for (std::size_t w = 0; w < p.size(); ++w) p[w] = (static_cast<double>(unigrams_[w]) + add_k_) / base_den;
    for (std::size_t len = 1; len < static_cast<std::size_t>(order_) && len <= history.size(); ++len) {
      const auto* s = successors(history.data() + history.size() - len, len);
      if (!s || s->total == 0) continue;
      const double den = static_cast<double>(s->total) + add_k_ * v;
      const double floor = (1.0 - backoff_) * add_k_ / den;
      for (auto& x : p) x = backoff_ * x + floor;
      for (const auto& [w, c] : s->counts) p[w] += (1.0 - backoff_) * static_cast<double>(c) / den;
    }
    return p;
  }

  /// P(w | history), same formula as `distribution`. `w` may be outside the
  /// vocabulary, in which case it is charged the add-k floor.
  double probability(const std::vector<TokenId>& history, std::optional<TokenId> w) const {
    const double v = static_cast<double>(vocab_.size());
    auto count_of = [&](const Successors* s) -> double { return w && s ? static_cast<double>(s->count(*w)) : 0.0; };
    double p = ((w ? static_cast<double>(unigrams_[*w]) : 0.0) + add_k_) / (static_cast<double>(total_) + add_k_ * v);
    for (std::size_t len = 1; len < static_cast<std::size_t>(order_) && len <= history.size(); ++len) {
      const auto* s = successors(history.data() + history.size() - len, len);
      if (!s || s->total == 0) continue;
      const double den = static_cast<double>(s->total) + add_k_ * v;
      p = backoff_ * p + (1.0 - backoff_) * (count_of(s) + add_k_) / den;
    }
    return p;
  }

  // ---- serialization ----------------------------------------------------
  //
  //   raplyr-ngram 1
  //   order <n>
  //   add_k <hexfloat>
  //   backoff <hexfloat>
  //   vocab <V>             followed by V lines, one token each, id order
  //   unigrams <N> <U>      followed by U lines "<id> <count>"
  //   histories <len> <H>   followed by H lines "<id>... <S> <id>:<count>..."

  void save(std::ostream& out) const {
    out << "raplyr-ngram 1\n";
    out << "order " << order_ << "\n";
    out << "add_k " << hex(add_k_) << "\n";
    out << "backoff " << hex(backoff_) << "\n";
    out << "vocab " << vocab_.size() << "\n";
    for (const auto& t : vocab_) out << t << "\n";
    std::size_t nonzero = std::count_if(unigrams_.begin(), unigrams_.end(), [](auto c) { return c > 0; });
    out << "unigrams " << total_ << " " << nonzero << "\n";
    for (std::size_t w = 0; w < unigrams_.size(); ++w)
      if (unigrams_[w]) out << w << " " << unigrams_[w] << "\n";
    for (int len = 1; len < order_; ++len) {
      std::vector<const std::pair<const std::string, Successors>*> rows;
      for (const auto& kv : histories_[len]) rows.push_back(&kv);
      std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
      out << "histories " << len << " " << rows.size() << "\n";
      for (const auto* row : rows) {
        for (std::size_t i = 0; i < static_cast<std::size_t>(len); ++i) out << unpack(row->first, i) << " ";
        out << row->second.counts.size();
        for (const auto& [w, c] : row->second.counts) out << " " << w << ":" << c;
        out << "\n";
      }
    }
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model " + path.string());
    save(out);
    if (!out) throw IoError("write failed for " + path.string());
  }

  static NgramModel load(std::istream& in) {
    std::size_t lineno = 0;
    std::string line;
    auto next = [&]() -> std::string& {
      if (!std::getline(in, line)) throw ParseError("truncated model file", lineno + 1);
      ++lineno;
      return line;
    };
    auto expect = [&](std::string_view tag) {
      std::istringstream ss(next());
      std::string got;
      ss >> got;
      if (got != tag) throw ParseError("expected '" + std::string(tag) + "'", lineno);
      std::string rest;
      std::getline(ss, rest);
      return std::string(trim(rest));
    };
    if (next() != "raplyr-ngram 1") throw ParseError("not a raplyr-ngram v1 model", lineno);
    int order = std::stoi(expect("order"));
    double add_k = std::strtod(expect("add_k").c_str(), nullptr);
    double backoff = std::strtod(expect("backoff").c_str(), nullptr);
    auto vsize = std::stoull(expect("vocab"));
    std::vector<std::string> vocab;
    vocab.reserve(vsize);
    for (std::size_t i = 0; i < vsize; ++i) vocab.push_back(next());
    NgramModel m;
    m.order_ = order;
    m.add_k_ = add_k;
    m.backoff_ = backoff;
    m.vocab_ = std::move(vocab);
    m.reindex();
    if (m.vocab_.size() != vsize) throw ParseError("duplicate vocabulary entries", lineno);
    {
      std::istringstream ss(expect("unigrams"));
      std::size_t rows;
      ss >> m.total_ >> rows;
      for (std::size_t i = 0; i < rows; ++i) {
        std::istringstream r(next());
        std::size_t w;
        std::uint64_t c;
        if (!(r >> w >> c) || w >= vsize) throw ParseError("bad unigram row", lineno);
        m.unigrams_[w] = c;
      }
    }
    for (int len = 1; len < order; ++len) {
      std::istringstream ss(expect("histories"));
      int got_len;
      std::size_t rows;
      ss >> got_len >> rows;
      if (got_len != len) throw ParseError("history sections out of order", lineno);
      for (std::size_t i = 0; i < rows; ++i) {
        std::istringstream r(next());
        std::vector<TokenId> ctx(static_cast<std::size_t>(len));
        for (auto& id : ctx)
          if (!(r >> id) || id >= vsize) throw ParseError("bad history id", lineno);
        std::size_t n;
        r >> n;
        Successors s;
        for (std::size_t k = 0; k < n; ++k) {
          std::string cell;
          r >> cell;
          auto colon = cell.find(':');
          if (colon == std::string::npos) throw ParseError("bad successor cell", lineno);
          auto w = static_cast<TokenId>(std::stoul(cell.substr(0, colon)));
          auto c = std::stoull(cell.substr(colon + 1));
          if (w >= vsize) throw ParseError("successor id out of range", lineno);
          s.counts.emplace_back(w, c);
          s.total += c;
        }
        m.histories_[len].emplace(key(ctx.data(), ctx.size()), std::move(s));
      }
    }
    return m;
  }

  static NgramModel load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model " + path.string());
    return load(in);
  }

 private:
  static constexpr TokenId kNoId = static_cast<TokenId>(-1);

  NgramModel(std::vector<std::string> vocab, int order, double add_k, double backoff)
      : order_(order), add_k_(add_k), backoff_(backoff), vocab_(std::move(vocab)) {
    if (!(add_k > 0)) throw InvalidArgument("add-k constant must be positive");
    if (!(backoff >= 0 && backoff < 1)) throw InvalidArgument("backoff weight must lie in [0, 1)");
    std::sort(vocab_.begin(), vocab_.end());
    vocab_.erase(std::unique(vocab_.begin(), vocab_.end()), vocab_.end());
    for (const auto& t : vocab_)
      if (t.empty() || t.find('\n') != std::string::npos) throw InvalidArgument("invalid vocabulary token");
    reindex();
  }

  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], static_cast<TokenId>(i));
    auto it = index_.find(std::string(kUnknownToken));
    unk_ = it == index_.end() ? kNoId : it->second;
    unigrams_.assign(vocab_.size(), 0);
    histories_.assign(static_cast<std::size_t>(std::max(order_, 1)), {});
  }

  static std::string key(const TokenId* ids, std::size_t len) {
    return std::string(reinterpret_cast<const char*>(ids), len * sizeof(TokenId));
  }
  static TokenId unpack(const std::string& k, std::size_t i) {
    TokenId id;
    std::memcpy(&id, k.data() + i * sizeof(TokenId), sizeof(TokenId));
    return id;
  }
  static std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
  }

  const Successors* successors(const TokenId* ctx, std::size_t len) const {
    if (len == 0 || len >= histories_.size()) return nullptr;
    for (std::size_t i = 0; i < len; ++i)
      if (ctx[i] == kNoId) return nullptr;
    auto it = histories_[len].find(key(ctx, len));
    return it == histories_[len].end() ? nullptr : &it->second;
  }

  int order_ = 1;
  double add_k_ = kDefaultAddK;
  double backoff_ = kDefaultBackoff;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId unk_ = kNoId;
  std::vector<std::uint64_t> unigrams_;
  std::uint64_t total_ = 0;
  std::vector<std::unordered_map<std::string, Successors>> histories_;  // by history length
};

inline NgramModel train(const TrainingStream& stream, int order = kDefaultOrder) {
  return NgramModel::train(stream, order);
}

inline double perplexity(const NgramModel& model, const TrainingStream& stream) {
  if (stream.tokens.empty()) throw EmptyInput("perplexity of empty text");
  std::vector<NgramModel::TokenId> history;
  double log_sum = 0.0;
  const auto keep = static_cast<std::size_t>(std::max(model.order() - 1, 0));
  for (const auto& tok : stream.tokens) {
    auto id = model.find_id(tok);
    if (!id) id = model.unknown_id();
    log_sum += std::log(model.probability(history, id));
    // Out-of-vocabulary ids break histories; kNoId-equivalent via max value.
    history.push_back(id ? *id : static_cast<NgramModel::TokenId>(-1));
    if (history.size() > keep) history.erase(history.begin());
  }
  return std::exp(-log_sum / static_cast<double>(stream.tokens.size()));
}

/// Perplexity of `lines` after the same preparation as training text.
inline double perplexity(const NgramModel& model, const std::vector<std::string>& lines) {
  return perplexity(model, prepare_lines(lines));
}

}  // namespace raplyr
