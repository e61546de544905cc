#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "raplyr/generator.hpp"

namespace raplyr {

/// Line-by-line co-writing session. The user types a bar after "A:", the
/// model answers with "B: <line>", and both lines join the running context.
class ReplSession {
 public:
  ReplSession(const NgramModel& model, const Lexicon& lexicon, const PronouncingDict& dict, GenParams params,
              const LemmaTable& lemmas = empty_lemma_table())
      : model_(model), lexicon_(lexicon), dict_(dict), lemmas_(lemmas), params_(params) {
    params_.validate();
  }

  static constexpr const char* kHelp =
      "commands: :reset  :seed N  :k N  :quit  (anything else is a lyric line)";

  /// Handles one input line and returns the text to print. Sets `done` on :quit.
  std::string step(const std::string& input, bool& done) {
    done = false;
    auto line = std::string(trim(input));
    if (line.empty()) return "";
    if (line.front() == ':') return command(line, done);
    context_.push_back(line);
    CompletionResult r;
    try {
      r = complete_reranked(model_, CompletionQuery{context_}, params_, lexicon_, dict_, lemmas_);
    } catch (const EmptyQuery&) {
      context_.pop_back();
      return "(no words in that line)";
    }
    context_.push_back(r.line);
    char meta[96];
    std::snprintf(meta, sizeof meta, "   [rd %.3f%s, slur %.4f]", r.rhyme_density_vs_context,
                  r.rhyme_density_vs_context > 1.0 ? " high" : "", r.slur_score);
    return "B: " + r.line + meta;
  }

  void run(std::istream& in, std::ostream& out) {
    std::string line;
    out << kHelp << "\n";
    while (true) {
      out << "A: " << std::flush;
      if (!std::getline(in, line)) break;
      bool done = false;
      auto reply = step(line, done);
      if (!reply.empty()) out << reply << "\n";
      if (done) break;
    }
  }

  const std::vector<std::string>& context() const { return context_; }
  const GenParams& params() const { return params_; }

 private:
  std::string command(const std::string& line, bool& done) {
    std::istringstream in(line);
    std::string cmd;
    in >> cmd;
    if (cmd == ":quit" || cmd == ":q") {
      done = true;
      return "";
    }
    if (cmd == ":reset") {
      context_.clear();
      return "(context cleared)";
    }
    if (cmd == ":seed" || cmd == ":k") {
      long long v;
      if (!(in >> v) || v < (cmd == ":k" ? 1 : 0)) return kHelp;
      if (cmd == ":seed") params_.seed = static_cast<std::uint64_t>(v);
      else params_.k = static_cast<std::size_t>(v);
      return "(" + cmd.substr(1) + " = " + std::to_string(v) + ")";
    }
    return kHelp;
  }

  const NgramModel& model_;
  const Lexicon& lexicon_;
  const PronouncingDict& dict_;
  const LemmaTable& lemmas_;
  GenParams params_;
  std::vector<std::string> context_;
};

}  // namespace raplyr
