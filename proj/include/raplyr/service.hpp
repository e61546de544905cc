#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "raplyr/generator.hpp"

namespace raplyr {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path model_path;
  std::filesystem::path lexicon_path;
  std::filesystem::path dict_path;
  std::filesystem::path lemma_path;  // optional
  GenParams defaults;
  int request_timeout_seconds = 30;

  void validate() const {
    if (port < 1 || port > 65535) throw InvalidArgument("port must lie in [1, 65535]");
    for (const auto* p : {&model_path, &lexicon_path, &dict_path})
      if (!std::filesystem::exists(*p)) throw IoError("missing resource " + p->string());
  }
};

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

/// Request handlers over shared read-only resources. Each handler is a plain
/// function of the request body so it can be checked without a socket.
class CompletionService {
 public:
  CompletionService(NgramModel model, Lexicon lexicon, PronouncingDict dict, LemmaTable lemmas, GenParams defaults,
                    std::string model_name)
      : model_(std::move(model)),
        lexicon_(std::move(lexicon)),
        dict_(std::move(dict)),
        lemmas_(std::move(lemmas)),
        defaults_(defaults),
        model_name_(std::move(model_name)) {
    defaults_.validate();
  }

  static CompletionService from_config(const ServiceConfig& config) {
    config.validate();
    LemmaTable lemmas;
    if (!config.lemma_path.empty()) lemmas = LemmaTable::load(config.lemma_path);
    return CompletionService(NgramModel::load(config.model_path), Lexicon::load(config.lexicon_path),
                             PronouncingDict::load(config.dict_path), std::move(lemmas), config.defaults,
                             config.model_path.stem().string());
  }

  const NgramModel& model() const { return model_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const PronouncingDict& dict() const { return dict_; }
  const LemmaTable& lemmas() const { return lemmas_; }
  const GenParams& defaults() const { return defaults_; }
  const std::string& model_name() const { return model_name_; }
  std::uint64_t requests_served() const { return requests_.load(); }

  HttpReply health() const { return {200, {{"status", "ok"}, {"model", model_name_}}}; }

  /// Body: {"context": [lines], "k", "seed", "min_tokens", "max_tokens",
  /// "candidates", "rerank", "window"}; all but context optional.
  HttpReply complete(const std::string& body) const {
    return guarded(body, [&](const nlohmann::json& j) {
      auto ctx = j.find("context");
      if (ctx == j.end() || !ctx->is_array()) throw BadRequest("'context' must be an array of strings");
      CompletionQuery query{ctx->get<std::vector<std::string>>()};
      auto params = params_from(j);
      auto r = complete_reranked(model_, query, params, lexicon_, dict_, lemmas_);
      return HttpReply{200, completion_to_json(r)};
    });
  }

  /// Body: {"lines": [...]}.
  HttpReply score(const std::string& body) const {
    return guarded(body, [&](const nlohmann::json& j) {
      auto lines = string_list(j, "lines");
      auto score = slur_score_of_text(lines, lexicon_, lemmas_);
      auto per_line = nlohmann::json::array();
      auto matches = nlohmann::json::array();
      for (std::size_t i = 0; i < lines.size(); ++i) {
        auto ann = annotate_line(lines[i], i, lexicon_, lemmas_);
        auto line_matches = nlohmann::json::array();
        for (const auto& m : ann.matches) {
          auto mj = match_to_json(m);
          line_matches.push_back(mj);
          mj["line"] = i;
          matches.push_back(std::move(mj));
        }
        per_line.push_back({{"line", i}, {"tokens", ann.token_count}, {"ws_score", ann.ws_score}, {"matches", line_matches}});
      }
      return HttpReply{200, {{"slur_score", score}, {"lines", per_line}, {"matches", matches}}};
    });
  }

  /// Body: {"lines": [...], "window": n}.
  HttpReply rhyme_density(const std::string& body) const {
    return guarded(body, [&](const nlohmann::json& j) {
      auto lines = string_list(j, "lines");
      std::size_t window = j.contains("window") ? j.at("window").get<std::size_t>() : defaults_.window;
      if (window < 1) throw InvalidArgument("window must be >= 1");
      auto tokens = tokenize_lines(lines);
      auto rep = raplyr::rhyme_density(tokens, dict_, window);
      return HttpReply{200, {{"density", rep.density},
                             {"high", rep.high()},
                             {"scored", rep.scored_count},
                             {"oov", rep.oov_count},
                             {"tokens", tokens},
                             {"per_token", rep.per_token_match}}};
    });
  }

  static nlohmann::json completion_to_json(const CompletionResult& r) {
    auto cands = nlohmann::json::array();
    for (const auto& c : r.candidates)
      cands.push_back({{"line", c.line}, {"rhyme_density", c.rhyme_density}, {"slur_score", c.slur_score}, {"seed", c.seed}});
    return {{"line", r.line}, {"rhyme_density", r.rhyme_density_vs_context}, {"slur_score", r.slur_score},
            {"candidates", cands}};
  }

  GenParams params_from(const nlohmann::json& j) const {
    GenParams p = defaults_;
    if (j.contains("k")) p.k = j.at("k").get<std::size_t>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("min_tokens")) p.min_tokens = j.at("min_tokens").get<std::size_t>();
    if (j.contains("max_tokens")) p.max_tokens = j.at("max_tokens").get<std::size_t>();
    if (j.contains("candidates")) p.num_candidates = j.at("candidates").get<std::size_t>();
    if (j.contains("rerank")) p.rerank = j.at("rerank").get<bool>();
    if (j.contains("window")) p.window = j.at("window").get<std::size_t>();
    p.validate();
    return p;
  }

  /// Registers the /v1 routes on `server`.
  void mount(httplib::Server& server) const {
    auto reply = [](httplib::Response& res, const HttpReply& r) {
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/v1/health", [this, reply](const httplib::Request&, httplib::Response& res) {
      ++requests_;
      reply(res, health());
    });
    server.Post("/v1/complete", [this, reply](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      reply(res, complete(req.body));
    });
    server.Post("/v1/score", [this, reply](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      reply(res, score(req.body));
    });
    server.Post("/v1/rhyme-density", [this, reply](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      reply(res, rhyme_density(req.body));
    });
  }

 private:
  struct BadRequest : Error {
    using Error::Error;
  };

  static std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) throw BadRequest(std::string("'") + key + "' must be an array of strings");
    return it->get<std::vector<std::string>>();
  }

  template <typename Fn>
  HttpReply guarded(const std::string& body, Fn&& fn) const {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      return {400, {{"error", "malformed JSON body"}}};
    }
    if (!j.is_object()) return {400, {{"error", "request body must be a JSON object"}}};
    try {
      return fn(j);
    } catch (const BadRequest& e) {
      return {400, {{"error", e.what()}}};
    } catch (const nlohmann::json::exception& e) {
      return {400, {{"error", std::string("bad field: ") + e.what()}}};
    } catch (const EmptyInput& e) {
      return {422, {{"error", e.what()}}};
    } catch (const InvalidArgument& e) {
      return {422, {{"error", e.what()}}};
    } catch (const std::exception& e) {
      char id[17];
      std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(std::random_device{}()) << 32 ^ ++requests_);
      std::fprintf(stderr, "internal error %s: %s\n", id, e.what());
      return {500, {{"error", "internal error"}, {"id", id}}};
    }
  }

  NgramModel model_;
  Lexicon lexicon_;
  PronouncingDict dict_;
  LemmaTable lemmas_;
  GenParams defaults_;
  std::string model_name_;
  mutable std::atomic<std::uint64_t> requests_{0};
};

}  // namespace raplyr
