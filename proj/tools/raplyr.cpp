// raplyr command-line front end.

#include <signal.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "raplyr/eval.hpp"
#include "raplyr/ingest.hpp"
#include "raplyr/raplyr.hpp"
#include "raplyr/repl.hpp"
#include "raplyr/service.hpp"

#ifndef RAPLYR_RESOURCE_DIR
#define RAPLYR_RESOURCE_DIR "resources"
#endif

namespace {

using namespace raplyr;

enum class LogLevel { Error, Warn, Info, Debug };
LogLevel g_log = LogLevel::Info;

void log(LogLevel level, const std::string& msg) {
  if (level > g_log) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

std::string default_resource(const char* name) { return std::string(RAPLYR_RESOURCE_DIR) + "/" + name; }

LemmaTable load_lemmas(const std::string& path) {
  if (path.empty() || !std::filesystem::exists(path)) return {};
  return LemmaTable::load(path);
}

PronouncingDict load_dict(const std::string& path, const std::string& phonemizer_cmd) {
  auto dict = PronouncingDict::load(path);
  if (!phonemizer_cmd.empty()) dict.set_hook(std::make_shared<ExternalPhonemizer>(phonemizer_cmd));
  return dict;
}

std::vector<std::string> read_text_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

struct GenOptions {
  std::size_t k = 50;
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 50;
  std::uint64_t seed = 42;
  std::size_t candidates = 1;
  bool rerank = false;
  std::size_t window = kDefaultRhymeWindow;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--k", k, "Top-k cutoff")->capture_default_str();
    cmd->add_option("--min-tokens", min_tokens, "Minimum tokens per line")->capture_default_str();
    cmd->add_option("--max-tokens", max_tokens, "Maximum tokens per line")->capture_default_str();
    cmd->add_option("--seed", seed, "Sampler seed")->capture_default_str();
    cmd->add_option("--candidates", candidates, "Candidates drawn per completion")->capture_default_str();
    cmd->add_flag("--rerank", rerank, "Pick the candidate with the highest rhyme density");
    cmd->add_option("--window", window, "Rhyme lookback window in tokens")->capture_default_str();
  }

  GenParams params() const { return {k, min_tokens, max_tokens, seed, candidates, rerank, window}; }
};

// Blocks SIGINT/SIGTERM in every thread and stops `server` when one arrives.
void serve_until_signal(httplib::Server& server, const std::string& host, int port) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    log(LogLevel::Info, "signal " + std::to_string(sig) + ", shutting down");
    server.stop();
  });
  log(LogLevel::Info, "listening on http://" + host + ":" + std::to_string(port));
  if (!server.listen(host, port)) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raplyr: rap lyrics corpus, scoring, rhyme density and line completion"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option defaults");
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  // fetch
  auto* fetch = app.add_subcommand("fetch", "Crawl artist catalogs from a lyrics API");
  std::string artists_file, fetch_out, token, base_url = "https://api.genius.com";
  double rps = 1.0;
  int max_pages = 50;
  unsigned fetch_threads = 1;
  fetch->add_option("--artists-file", artists_file, "One artist per line")->required()->check(CLI::ExistingFile);
  fetch->add_option("--out", fetch_out, "Raw corpus (JSONL)")->required();
  fetch->add_option("--rps", rps, "Requests per second")->capture_default_str();
  fetch->add_option("--max-pages", max_pages, "Pages per artist")->capture_default_str();
  fetch->add_option("--token", token, "API token (RAPLYR_GENIUS_TOKEN overrides)");
  fetch->add_option("--base-url", base_url, "API base URL")->capture_default_str();
  fetch->add_option("--threads", fetch_threads, "Concurrent artists")->capture_default_str();

  // clean
  auto* clean = app.add_subcommand("clean", "Keep verses, strip non-ASCII, dedupe and language-filter");
  std::string clean_in, clean_out;
  double english_threshold = kDefaultEnglishThreshold;
  clean->add_option("--in", clean_in, "Raw corpus")->required()->check(CLI::ExistingFile);
  clean->add_option("--out", clean_out, "Cleaned corpus")->required();
  clean->add_option("--english-threshold", english_threshold, "Minimum stopword ratio")->capture_default_str();

  // annotate
  auto* annotate = app.add_subcommand("annotate", "Score songs against a profanity lexicon");
  std::string ann_in, ann_out, lexicon_path, lemma_path = default_resource("lemmas.tsv");
  annotate->add_option("--in", ann_in, "Cleaned corpus")->required()->check(CLI::ExistingFile);
  annotate->add_option("--lexicon", lexicon_path, "Profanity CSV")->required()->check(CLI::ExistingFile);
  annotate->add_option("--out", ann_out, "Annotated corpus")->required();
  annotate->add_option("--lemmas", lemma_path, "Lemma table")->capture_default_str();

  // filter
  auto* filter = app.add_subcommand("filter", "Drop songs whose slur score exceeds a threshold");
  std::string filter_in, filter_out, dropped_out;
  double threshold = kDefaultSlurThreshold;
  double q = kDefaultFilterQuantile;
  filter->add_option("--in", filter_in, "Annotated corpus")->required()->check(CLI::ExistingFile);
  filter->add_option("--out", filter_out, "Kept songs")->required();
  filter->add_option("--dropped-out", dropped_out, "Also write the dropped songs here");
  auto* thr_opt = filter->add_option("--threshold", threshold, "Fixed slur_score cutoff")->capture_default_str();
  auto* q_opt = filter->add_option("--quantile", q, "Use the nearest-rank quantile of the corpus as cutoff");
  thr_opt->excludes(q_opt);

  // split
  auto* split = app.add_subcommand("split", "Seeded train/test split");
  std::string split_in, train_out, test_out;
  double fraction = kDefaultTestFraction;
  std::uint64_t split_seed = 42;
  split->add_option("--in", split_in, "Corpus")->required()->check(CLI::ExistingFile);
  split->add_option("--train-out", train_out)->required();
  split->add_option("--test-out", test_out)->required();
  split->add_option("--fraction", fraction, "Test fraction")->capture_default_str();
  split->add_option("--seed", split_seed)->capture_default_str();

  // train
  auto* trainc = app.add_subcommand("train", "Train an n-gram line model");
  std::string train_in, model_out;
  int order = kDefaultOrder;
  trainc->add_option("--in", train_in, "Corpus")->required()->check(CLI::ExistingFile);
  trainc->add_option("--order", order)->capture_default_str();
  trainc->add_option("--out", model_out, "Model file")->required();

  // shared resource flags for generation commands
  std::string model_path, dict_path = default_resource("cmu.dict"), phonemizer_cmd;
  auto add_resources = [&](CLI::App* cmd, bool need_model) {
    auto* m = cmd->add_option("--model", model_path, "Model file");
    if (need_model) m->required()->check(CLI::ExistingFile);
    cmd->add_option("--lexicon", lexicon_path, "Profanity CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dict", dict_path, "Pronouncing dictionary")->capture_default_str();
    cmd->add_option("--lemmas", lemma_path, "Lemma table")->capture_default_str();
    cmd->add_option("--phonemizer-cmd", phonemizer_cmd, "External phonemizer for dictionary misses");
  };

  // complete
  auto* completec = app.add_subcommand("complete", "Generate the next line for a context");
  std::vector<std::string> context;
  std::string generator_cmd;
  GenOptions gen;
  add_resources(completec, false);
  completec->add_option("--context", context, "Context line (repeatable)")->required();
  completec->add_option("--generator-cmd", generator_cmd, "External generator instead of --model");
  gen.add_to(completec);

  // eval
  auto* evalc = app.add_subcommand("eval", "Evaluate a model on a test set");
  std::string test_path, report_out, model_name;
  GenOptions eval_gen;
  add_resources(evalc, true);
  evalc->add_option("--test", test_path, "Test corpus")->required()->check(CLI::ExistingFile);
  evalc->add_option("--out", report_out, "Report JSON");
  evalc->add_option("--name", model_name, "Model label (default: file stem)");
  eval_gen.add_to(evalc);

  // compare
  auto* comparec = app.add_subcommand("compare", "Compare two evaluation reports");
  std::string report_a, report_b;
  comparec->add_option("a", report_a)->required()->check(CLI::ExistingFile);
  comparec->add_option("b", report_b)->required()->check(CLI::ExistingFile);

  // energy
  auto* energyc = app.add_subcommand("energy", "Training energy, E = P t");
  std::string watts = "250";
  std::vector<std::string> hours;
  energyc->add_option("--watts", watts, "Power draw in watts")->capture_default_str();
  energyc->add_option("--hours", hours, "Training hours (repeat for a total)")->required();

  // rd
  auto* rdc = app.add_subcommand("rd", "Rhyme density of a text file");
  std::string rd_text;
  std::size_t rd_window = kDefaultRhymeWindow;
  rdc->add_option("--text", rd_text, "Text file")->required()->check(CLI::ExistingFile);
  rdc->add_option("--dict", dict_path, "Pronouncing dictionary")->capture_default_str();
  rdc->add_option("--window", rd_window)->capture_default_str();
  rdc->add_option("--phonemizer-cmd", phonemizer_cmd, "External phonemizer for dictionary misses");

  // serve
  auto* servec = app.add_subcommand("serve", "HTTP service for completion and scoring");
  ServiceConfig svc;
  GenOptions svc_gen;
  add_resources(servec, true);
  servec->add_option("--host", svc.host)->capture_default_str();
  servec->add_option("--port", svc.port)->capture_default_str()->check(CLI::Range(1, 65535));
  servec->add_option("--timeout", svc.request_timeout_seconds, "Request timeout seconds")->capture_default_str();
  svc_gen.add_to(servec);

  // repl
  auto* replc = app.add_subcommand("repl", "Interactive co-writing");
  GenOptions repl_gen;
  add_resources(replc, true);
  repl_gen.add_to(replc);

  CLI11_PARSE(app, argc, argv);
  g_log = log_level == "error" ? LogLevel::Error
          : log_level == "warn" ? LogLevel::Warn
          : log_level == "debug" ? LogLevel::Debug
                                 : LogLevel::Info;

  try {
    if (*fetch) {
      IngestConfig cfg;
      cfg.access_token = token;
      cfg.artists = read_artists_file(artists_file);
      cfg.max_pages_per_artist = max_pages;
      cfg.requests_per_second = rps;
      cfg.base_url = base_url;
      apply_token_from_env(cfg);
      auto results = fetch_all(cfg, fetch_threads);
      std::vector<RawSongRecord> records;
      int failures = 0;
      for (auto& r : results) {
        if (r.error) {
          ++failures;
          log(LogLevel::Warn, r.artist + ": " + *r.error + " (" + std::to_string(r.records.size()) + " records kept)");
        }
        for (auto& rec : r.records) {
          if (rec.lyrics_text.empty()) log(LogLevel::Debug, "empty lyrics: " + rec.artist + " / " + rec.title);
          records.push_back(std::move(rec));
        }
      }
      auto n = write_raw_corpus(records, fetch_out);
      std::cout << "wrote " << n << " records for " << results.size() << " artists (" << failures
                << " with errors)\n";
      return failures == static_cast<int>(results.size()) ? 1 : 0;
    }

    if (*clean) {
      auto raw = read_raw_corpus(clean_in);
      std::vector<Song> songs;
      std::size_t no_verse = 0, non_english = 0;
      for (const auto& r : raw) {
        auto cleaned = clean_song(song_from_raw(r));
        if (!cleaned) {
          ++no_verse;
          continue;
        }
        if (!is_english(*cleaned, english_threshold)) {
          ++non_english;
          continue;
        }
        songs.push_back(std::move(*cleaned));
      }
      auto before = songs.size();
      songs = dedupe_corpus(songs);
      write_songs(songs, clean_out);
      auto stats = corpus_stats(songs);
      std::cout << "raw " << raw.size() << ", no verses " << no_verse << ", non-English " << non_english
                << ", duplicates " << before - songs.size() << "\n";
      std::cout << stats.song_count << " songs (" << stats.token_count << " tokens)\n";
      return 0;
    }

    if (*annotate) {
      auto lexicon = Lexicon::load(lexicon_path);
      auto lemmas = load_lemmas(lemma_path);
      std::vector<SongAnnotation> annotations;
      std::size_t empty = 0;
      for (const auto& song : read_songs(ann_in)) {
        try {
          annotations.push_back(annotate_song(song, lexicon, lemmas));
        } catch (const EmptySong&) {
          ++empty;
        }
      }
      write_annotations(annotations, ann_out);
      auto hist = category_histogram(annotations);
      std::size_t total = 0, clean_songs = 0;
      for (auto c : hist) total += c;
      for (const auto& a : annotations) clean_songs += a.match_count() == 0;
      std::cout << annotations.size() << " songs annotated (" << empty << " skipped), " << total
                << " profanities, " << clean_songs << " songs without profanity\n";
      for (auto c : all_categories())
        std::cout << "  " << to_string(c) << ": " << hist[static_cast<std::size_t>(c)] << "\n";
      if (!annotations.empty())
        std::cout << "slur_score Q3 = " << quantile(slur_scores(annotations), 0.75) << "\n";
      return 0;
    }

    if (*filter) {
      auto annotations = read_annotations(filter_in);
      if (annotations.empty()) throw EmptyInput("no annotated songs in " + filter_in);
      double cutoff = *q_opt ? quantile(slur_scores(annotations), q) : threshold;
      auto outcome = filter_corpus(std::move(annotations), cutoff);
      write_annotations(outcome.kept, filter_out);
      if (!dropped_out.empty()) write_annotations(outcome.dropped, dropped_out);
      std::cout << "threshold " << cutoff << ": kept " << outcome.kept.size() << ", dropped "
                << outcome.dropped.size() << "\n";
      return 0;
    }

    if (*split) {
      auto songs = read_songs(split_in);
      auto [tr, te] = split_corpus(songs, fraction, split_seed);
      write_songs(tr, train_out);
      write_songs(te, test_out);
      std::cout << "train " << tr.size() << ", test " << te.size() << "\n";
      return 0;
    }

    if (*trainc) {
      auto stream = prepare_training(read_songs(train_in));
      auto model = NgramModel::train(stream, order);
      model.save(std::filesystem::path(model_out));
      std::cout << "order " << order << ", " << stream.tokens.size() << " tokens, vocabulary "
                << model.vocab_size() << "\n";
      return 0;
    }

    if (*completec) {
      auto lexicon = Lexicon::load(lexicon_path);
      auto lemmas = load_lemmas(lemma_path);
      auto dict = load_dict(dict_path, phonemizer_cmd);
      CompletionQuery query{context};
      CompletionResult r;
      if (!generator_cmd.empty()) {
        r = external_generator_adapter(generator_cmd, query, gen.params(), lexicon, dict, std::chrono::seconds(30),
                                       lemmas);
      } else {
        if (model_path.empty()) throw InvalidArgument("--model or --generator-cmd is required");
        auto model = NgramModel::load(std::filesystem::path(model_path));
        r = complete_reranked(model, query, gen.params(), lexicon, dict, lemmas);
      }
      std::cout << CompletionService::completion_to_json(r).dump(2) << "\n";
      return 0;
    }

    if (*evalc) {
      auto lexicon = Lexicon::load(lexicon_path);
      auto lemmas = load_lemmas(lemma_path);
      auto dict = load_dict(dict_path, phonemizer_cmd);
      auto model = NgramModel::load(std::filesystem::path(model_path));
      if (model_name.empty()) model_name = std::filesystem::path(model_path).stem().string();
      auto report = evaluate(model, read_songs(test_path), lexicon, dict, eval_gen.params(), model_name, lemmas);
      std::cout << render_reports({report});
      std::cout << report.num_instances << " instances, " << report.skipped << " skipped\n";
      if (!report_out.empty()) {
        std::ofstream out(report_out);
        if (!out) throw IoError("cannot write " + report_out);
        out << to_json(report).dump(2) << "\n";
      }
      return 0;
    }

    if (*comparec) {
      auto read = [](const std::string& p) {
        std::ifstream in(p);
        return eval_report_from_json(nlohmann::json::parse(in));
      };
      auto a = read(report_a), b = read(report_b);
      std::cout << render_reports({a, b}) << "\n" << render_comparison(compare_reports(a, b));
      return 0;
    }

    if (*energyc) {
      auto power = Rational::parse(watts);
      Rational total_h(0);
      for (const auto& h : hours) {
        auto e = energy(power, Rational::parse(h));
        total_h = total_h + e.hours;
        std::cout << h << " h at " << watts << " W = " << e.kwh.to_double() << " kWh\n";
      }
      if (hours.size() > 1) {
        auto e = energy(power, total_h);
        std::cout << "total " << total_h.to_double() << " h = " << e.kwh.to_double() << " kWh\n";
      }
      return 0;
    }

    if (*rdc) {
      auto dict = load_dict(dict_path, phonemizer_cmd);
      auto rep = rhyme_density_text(read_text_lines(rd_text), dict, rd_window);
      std::printf("rhyme density %.4f%s (%zu scored tokens, %zu without pronunciation)\n", rep.density,
                  rep.high() ? " [high]" : "", rep.scored_count, rep.oov_count);
      return 0;
    }

    if (*servec) {
      svc.model_path = model_path;
      svc.lexicon_path = lexicon_path;
      svc.dict_path = dict_path;
      svc.lemma_path = std::filesystem::exists(lemma_path) ? lemma_path : "";
      svc.defaults = svc_gen.params();
      auto service = CompletionService::from_config(svc);
      if (!phonemizer_cmd.empty()) log(LogLevel::Warn, "--phonemizer-cmd is ignored by serve");
      httplib::Server server;
      server.set_read_timeout(svc.request_timeout_seconds);
      server.set_write_timeout(svc.request_timeout_seconds);
      service.mount(server);
      serve_until_signal(server, svc.host, svc.port);
      return 0;
    }

    if (*replc) {
      auto lexicon = Lexicon::load(lexicon_path);
      auto lemmas = load_lemmas(lemma_path);
      auto dict = load_dict(dict_path, phonemizer_cmd);
      auto model = NgramModel::load(std::filesystem::path(model_path));
      ReplSession session(model, lexicon, dict, repl_gen.params(), lemmas);
      session.run(std::cin, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    log(LogLevel::Error, e.what());
    return 1;
  }
  return 0;
}
