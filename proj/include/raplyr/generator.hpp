#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "raplyr/corpus.hpp"
#include "raplyr/error.hpp"
#include "raplyr/lexicon.hpp"
#include "raplyr/ngram.hpp"
#include "raplyr/random.hpp"
#include "raplyr/rhyme.hpp"
#include "raplyr/scoring.hpp"
#include "raplyr/subprocess.hpp"

namespace raplyr {

inline constexpr double kDefaultTestFraction = 0.1;

struct GenParams {
  std::size_t k = 50;
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 50;
  std::uint64_t seed = 0;
  std::size_t num_candidates = 1;
  bool rerank = false;
  std::size_t window = kDefaultRhymeWindow;  // for the attached rhyme density

  void validate() const {
    if (k < 1) throw InvalidArgument("k must be >= 1");
    if (min_tokens < 1) throw InvalidArgument("min_tokens must be >= 1");
    if (min_tokens > max_tokens) throw InvalidArgument("min_tokens must not exceed max_tokens");
    if (num_candidates < 1) throw InvalidArgument("num_candidates must be >= 1");
    if (window < 1) throw InvalidArgument("window must be >= 1");
  }
};

struct CompletionQuery {
  std::vector<std::string> context_lines;
};

struct Candidate {
  std::string line;
  double rhyme_density = 0.0;
  double slur_score = 0.0;
  std::uint64_t seed = 0;
};

struct CompletionResult {
  std::string line;
  double rhyme_density_vs_context = 0.0;
  double slur_score = 0.0;
  std::vector<Candidate> candidates;  // filled when more than one was drawn
};

/// What the sampler saw at each step, for tests that check the top-k contract.
struct SamplingStep {
  std::vector<std::string> top_k;  // admissible tokens, best first
  std::string chosen;
};
using SamplingTrace = std::vector<SamplingStep>;

/// Seeded split: floor(test_fraction * n) songs go to the test set. Both
/// halves keep the input order.
inline std::pair<std::vector<Song>, std::vector<Song>> split_corpus(const std::vector<Song>& songs,
                                                                    double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("test fraction must lie in (0, 1)");
  std::vector<std::size_t> order(songs.size());
  std::iota(order.begin(), order.end(), 0);
  seeded_shuffle(order, seed);
  auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(songs.size()) + 1e-9));
  std::vector<bool> is_test(songs.size(), false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;
  std::pair<std::vector<Song>, std::vector<Song>> out;
  for (std::size_t i = 0; i < songs.size(); ++i) (is_test[i] ? out.second : out.first).push_back(songs[i]);
  return out;
}

/// First ceil(n/2) lines are the input, the rest the reference.
inline std::pair<std::vector<std::string>, std::vector<std::string>> split_test_instance(const Song& song) {
  auto lines = song.lines();
  if (lines.size() < 2) throw TooShort("song '" + song.title + "' has fewer than two lines");
  auto cut = (lines.size() + 1) / 2;
  return {{lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(cut)},
          {lines.begin() + static_cast<std::ptrdiff_t>(cut), lines.end()}};
}

namespace detail {

inline bool has_tokens(const std::vector<std::string>& lines) {
  return std::any_of(lines.begin(), lines.end(), [](const auto& l) { return !tokenize_line(l).empty(); });
}

inline void attach_metrics(CompletionResult& r, const std::vector<std::string>& context, const Lexicon& lexicon,
                           const PronouncingDict& dict, std::size_t window, const LemmaTable& lemmas) {
  r.rhyme_density_vs_context = rhyme_density_after(context, {r.line}, dict, window).density;
  r.slur_score = tokenize_line(r.line).empty() ? 0.0 : slur_score_of_text({r.line}, lexicon, lemmas);
}

}  // namespace detail

/// Samples one line with top-k sampling.
///
/// The history is the prepared context followed by a separator. At each step
/// the model distribution is restricted to admissible tokens ("<unk>" never,
/// the separator only once min_tokens have been emitted), the k most probable
/// are kept (ties by token order), and one is drawn proportionally with
/// Xoshiro256(seed). Generation stops at the separator or at max_tokens.
inline std::vector<std::string> sample_line(const NgramModel& model, const std::vector<std::string>& context_lines,
                                            const GenParams& params, SamplingTrace* trace = nullptr) {
  params.validate();
  auto prepared = prepare_lines(context_lines);
  if (prepared.tokens.empty()) throw EmptyQuery("completion context has no tokens");
  prepared.tokens.emplace_back(kLineSeparator);

  std::vector<NgramModel::TokenId> history;
  const std::size_t keep = static_cast<std::size_t>(std::max(model.order() - 1, 1));
  for (const auto& t : prepared.tokens) history.push_back(model.id_of(t));
  if (history.size() > keep) history.erase(history.begin(), history.end() - static_cast<std::ptrdiff_t>(keep));

  const auto sep = model.find_id(kLineSeparator);
  const auto unk = model.unknown_id();
  Xoshiro256 rng(params.seed);
  std::vector<std::string> out;
  std::vector<NgramModel::TokenId> admissible;
  while (out.size() < params.max_tokens) {
    auto p = model.distribution(history);
    admissible.clear();
    const bool allow_sep = out.size() >= params.min_tokens;
    for (NgramModel::TokenId w = 0; w < p.size(); ++w) {
      if (unk && w == *unk) continue;
      if (sep && w == *sep && !allow_sep) continue;
      admissible.push_back(w);
    }
    if (admissible.empty()) throw InvalidArgument("model vocabulary has no token to emit");
    const auto take = std::min(params.k, admissible.size());
    auto better = [&](NgramModel::TokenId a, NgramModel::TokenId b) { return p[a] > p[b] || (p[a] == p[b] && a < b); };
    std::partial_sort(admissible.begin(), admissible.begin() + static_cast<std::ptrdiff_t>(take), admissible.end(), better);
    admissible.resize(take);

    double mass = 0.0;
    for (auto w : admissible) mass += p[w];
    double u = rng.uniform() * mass;
    NgramModel::TokenId chosen = admissible.back();
    double acc = 0.0;
    for (auto w : admissible) {
      acc += p[w];
      if (u < acc) {
        chosen = w;
        break;
      }
    }
    if (trace) {
      SamplingStep step;
      for (auto w : admissible) step.top_k.push_back(model.token(w));
      step.chosen = model.token(chosen);
      trace->push_back(std::move(step));
    }
    if (sep && chosen == *sep) break;
    out.push_back(model.token(chosen));
    history.push_back(chosen);
    if (history.size() > keep) history.erase(history.begin());
  }
  return out;
}

/// One completion line with its rhyme density against the context and its
/// slur score.
inline CompletionResult complete(const NgramModel& model, const CompletionQuery& query, const GenParams& params,
                                 const Lexicon& lexicon, const PronouncingDict& dict,
                                 const LemmaTable& lemmas = empty_lemma_table(), SamplingTrace* trace = nullptr) {
  if (!detail::has_tokens(query.context_lines)) throw EmptyQuery("completion context has no tokens");
  CompletionResult r;
  r.line = join(sample_line(model, query.context_lines, params, trace));
  detail::attach_metrics(r, query.context_lines, lexicon, dict, params.window, lemmas);
  return r;
}

/// Draws num_candidates lines with seeds seed, seed+1, ... and, when rerank
/// is set, selects the one with the highest rhyme density against the
/// context (ties: lower slur score, then lower seed). Without rerank the
/// first candidate is selected.
inline CompletionResult complete_reranked(const NgramModel& model, const CompletionQuery& query,
                                          const GenParams& params, const Lexicon& lexicon,
                                          const PronouncingDict& dict, const LemmaTable& lemmas = empty_lemma_table()) {
  params.validate();
  if (params.num_candidates <= 1) return complete(model, query, params, lexicon, dict, lemmas);
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < params.num_candidates; ++i) {
    GenParams p = params;
    p.seed = params.seed + i;
    auto r = complete(model, query, p, lexicon, dict, lemmas);
    candidates.push_back({r.line, r.rhyme_density_vs_context, r.slur_score, p.seed});
  }
  std::size_t best = 0;
  if (params.rerank) {
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      const auto& c = candidates[i];
      const auto& b = candidates[best];
      if (c.rhyme_density > b.rhyme_density || (c.rhyme_density == b.rhyme_density && c.slur_score < b.slur_score))
        best = i;
    }
  }
  CompletionResult r{candidates[best].line, candidates[best].rhyme_density, candidates[best].slur_score,
                     std::move(candidates)};
  return r;
}

/// Delegates generation to an external program. The context lines are
/// written to its stdin followed by a blank line; the first stdout line is the
/// completion. Metrics are attached exactly as for `complete`.
inline CompletionResult external_generator_adapter(const std::string& command, const CompletionQuery& query,
                                                   const GenParams& params, const Lexicon& lexicon,
                                                   const PronouncingDict& dict,
                                                   std::chrono::milliseconds timeout = std::chrono::seconds(30),
                                                   const LemmaTable& lemmas = empty_lemma_table()) {
  if (!detail::has_tokens(query.context_lines)) throw EmptyQuery("completion context has no tokens");
  std::string input;
  for (const auto& l : query.context_lines) input += l + "\n";
  input += "\n";
  auto res = run_process(command, input, {timeout, true});
  if (!res.stopped_early && res.exit_code != 0)
    throw ProcessError("generator exited with status " + std::to_string(res.exit_code) + ": " + res.err);
  auto nl = res.out.find('\n');
  std::string line(trim(res.out.substr(0, nl)));
  if (line.empty()) throw ProcessError("generator returned no completion");
  CompletionResult r;
  r.line = std::move(line);
  detail::attach_metrics(r, query.context_lines, lexicon, dict, params.window, lemmas);
  return r;
}

}  // namespace raplyr
