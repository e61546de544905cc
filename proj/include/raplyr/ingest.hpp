#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "raplyr/error.hpp"
#include "raplyr/records.hpp"
#include "raplyr/text.hpp"

namespace raplyr {

inline constexpr const char* kTokenEnvVar = "RAPLYR_GENIUS_TOKEN";

struct IngestConfig {
  std::string access_token;
  std::vector<std::string> artists;
  int max_pages_per_artist = 50;
  double requests_per_second = 1.0;
  std::string base_url = "https://api.genius.com";
  int per_page = 50;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};  // doubled after every failed attempt
  std::chrono::seconds timeout{30};

  void validate() const {
    if (artists.empty()) throw InvalidArgument("artist list is empty");
    if (!(requests_per_second > 0)) throw InvalidArgument("requests_per_second must be > 0");
    if (max_pages_per_artist < 1) throw InvalidArgument("max_pages_per_artist must be >= 1");
    if (max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
  }
};

/// The environment token, when set, replaces the configured one.
inline void apply_token_from_env(IngestConfig& config) {
  if (const char* env = std::getenv(kTokenEnvVar); env && *env) config.access_token = env;
}

/// One artist name per line; blank lines and '#' comments skipped.
inline std::vector<std::string> read_artists_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open artists file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto name = trim(line);
    if (name.empty() || name.front() == '#') continue;
    out.emplace_back(name);
  }
  return out;
}

/// Token bucket of capacity one, shared by all fetch threads: successive
/// `acquire` calls return at least 1/rate seconds apart, so no 1-second
/// window holds more than `rate` requests.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double per_second)
      : interval_(std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / per_second))) {
    if (!(per_second > 0)) throw InvalidArgument("rate must be > 0");
  }

  void acquire() {
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      auto now = Clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  Clock::duration interval_;
  std::mutex mu_;
  Clock::time_point next_{};
};

/// One page of an artist catalog.
struct CatalogPage {
  std::vector<RawSongRecord> songs;
  std::optional<int> next_page;
};

/// Adapter for the catalog endpoint's JSON:
///   {"response": {"songs": [{"title", "lyrics", "url",
///                            "release_year" | "release_date_components": {"year"}}],
///                 "next_page": <int> | null}}
/// A top-level object without the "response" envelope is accepted too.
inline CatalogPage parse_catalog_page(const nlohmann::json& body, const std::string& artist) {
  const auto& root = body.contains("response") ? body.at("response") : body;
  CatalogPage page;
  for (const auto& s : root.value("songs", nlohmann::json::array())) {
    RawSongRecord r;
    r.artist = s.contains("artist") && s["artist"].is_string() ? s["artist"].get<std::string>() : artist;
    r.title = s.value("title", "");
    if (auto it = s.find("release_year"); it != s.end() && it->is_number_integer()) {
      r.release_year = it->get<int>();
    } else if (auto dc = s.find("release_date_components"); dc != s.end() && dc->is_object()) {
      if (auto y = dc->find("year"); y != dc->end() && y->is_number_integer()) r.release_year = y->get<int>();
    }
    r.lyrics_text = s.contains("lyrics") && s["lyrics"].is_string() ? s["lyrics"].get<std::string>() : "";
    r.source_url = s.contains("url") && s["url"].is_string() ? s["url"].get<std::string>() : "";
    if (r.artist.empty() || r.title.empty()) continue;
    page.songs.push_back(std::move(r));
  }
  if (auto it = root.find("next_page"); it != root.end() && it->is_number_integer()) page.next_page = it->get<int>();
  return page;
}

struct CatalogResult {
  std::string artist;
  std::vector<RawSongRecord> records;
  int pages_fetched = 0;
  std::optional<std::string> error;  // set when the crawl stopped early
  bool auth_failed = false;
};

namespace detail {

inline std::string url_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

}  // namespace detail

/// Fetches one page, retrying transient failures (network errors, 429, 5xx)
/// with exponential backoff. Throws AuthError, RateLimited or NetworkError
/// once attempts are exhausted.
inline CatalogPage fetch_catalog_page(httplib::Client& client, RateLimiter& limiter, const IngestConfig& config,
                                      const std::string& artist, int page) {
  std::string path = "/artists/songs?artist=" + detail::url_encode(artist) + "&page=" + std::to_string(page) +
                     "&per_page=" + std::to_string(config.per_page);
  httplib::Headers headers{{"Authorization", "Bearer " + config.access_token}};
  std::string last_error;
  bool last_was_rate_limit = false;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config.backoff_base * (1 << (attempt - 1)));
    limiter.acquire();
    auto res = client.Get(path, headers);
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      last_was_rate_limit = false;
      continue;
    }
    if (res->status == 401 || res->status == 403)
      throw AuthError("catalog request rejected with HTTP " + std::to_string(res->status));
    if (res->status == 429 || res->status >= 500) {
      last_was_rate_limit = res->status == 429;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw NetworkError("unexpected HTTP " + std::to_string(res->status));
    try {
      return parse_catalog_page(nlohmann::json::parse(res->body), artist);
    } catch (const nlohmann::json::exception& e) {
      throw NetworkError(std::string("malformed catalog page: ") + e.what());
    }
  }
  if (last_was_rate_limit) throw RateLimited("still rate limited after retries");
  throw NetworkError(last_error);
}

inline httplib::Client make_client(const IngestConfig& config) {
  httplib::Client client(config.base_url);
  if (!client.is_valid()) throw NetworkError("cannot use base url " + config.base_url);
  client.set_connection_timeout(config.timeout);
  client.set_read_timeout(config.timeout);
  return client;
}

/// Follows next_page from page 1 up to max_pages_per_artist. Errors end the
/// crawl for this artist and keep the records fetched so far.
inline CatalogResult fetch_artist_catalog(const IngestConfig& config, const std::string& artist,
                                          RateLimiter& limiter) {
  CatalogResult result{artist, {}, 0, std::nullopt, false};
  try {
    auto client = make_client(config);
    std::optional<int> page = 1;
    while (page && result.pages_fetched < config.max_pages_per_artist) {
      auto got = fetch_catalog_page(client, limiter, config, artist, *page);
      ++result.pages_fetched;
      result.records.insert(result.records.end(), std::make_move_iterator(got.songs.begin()),
                            std::make_move_iterator(got.songs.end()));
      page = got.next_page;
    }
  } catch (const AuthError& e) {
    result.auth_failed = true;
    result.error = e.what();
  } catch (const Error& e) {
    result.error = e.what();
  }
  return result;
}

inline CatalogResult fetch_artist_catalog(const IngestConfig& config, const std::string& artist) {
  RateLimiter limiter(config.requests_per_second);
  return fetch_artist_catalog(config, artist, limiter);
}

/// Crawls every configured artist with up to `threads` workers sharing one
/// rate limiter. Results come back in artist order.
inline std::vector<CatalogResult> fetch_all(const IngestConfig& config, unsigned threads = 1) {
  config.validate();
  RateLimiter limiter(config.requests_per_second);
  std::vector<CatalogResult> results(config.artists.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < config.artists.size();)
      results[i] = fetch_artist_catalog(config, config.artists[i], limiter);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(config.artists.size())));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  return results;
}

}  // namespace raplyr
