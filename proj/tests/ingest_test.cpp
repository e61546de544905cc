#include <gtest/gtest.h>

#include <mutex>
#include <thread>

#include "raplyr/ingest.hpp"
#include "support.hpp"

using namespace raplyr;
using Clock = std::chrono::steady_clock;

namespace {

/// Local stand-in for the catalog endpoint.
class MockCatalog {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit MockCatalog(Handler h) {
    server_.Get("/artists/songs", [this, h](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mu_);
        hits_.push_back(Clock::now());
        auths_.push_back(req.get_header_value("Authorization"));
      }
      h(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockCatalog() {
    server_.stop();
    thread_.join();
  }

  IngestConfig config(std::vector<std::string> artists) const {
    IngestConfig c;
    c.access_token = "secret";
    c.artists = std::move(artists);
    c.base_url = "http://127.0.0.1:" + std::to_string(port_);
    c.requests_per_second = 100;
    c.backoff_base = std::chrono::milliseconds(5);
    c.timeout = std::chrono::seconds(5);
    return c;
  }

  std::vector<Clock::time_point> hits() const {
    std::lock_guard lock(mu_);
    return hits_;
  }
  std::vector<std::string> auths() const {
    std::lock_guard lock(mu_);
    return auths_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::vector<Clock::time_point> hits_;
  std::vector<std::string> auths_;
};

nlohmann::json page_body(const std::string& artist, int page, int pages, int per_page) {
  auto songs = nlohmann::json::array();
  for (int i = 0; i < per_page; ++i)
    songs.push_back({{"title", artist + " song " + std::to_string(page) + "." + std::to_string(i)},
                     {"lyrics", "[Verse]\nline"},
                     {"url", "https://example.test/" + std::to_string(page)},
                     {"release_date_components", {{"year", 2000 + page}}}});
  nlohmann::json next = page < pages ? nlohmann::json(page + 1) : nlohmann::json(nullptr);
  return {{"response", {{"songs", songs}, {"next_page", next}}}};
}

MockCatalog::Handler paged(int pages, int per_page) {
  return [=](const httplib::Request& req, httplib::Response& res) {
    int page = std::stoi(req.get_param_value("page"));
    res.set_content(page_body(req.get_param_value("artist"), page, pages, per_page).dump(), "application/json");
  };
}

}  // namespace

TEST(Ingest, FollowsPagination) {
  MockCatalog mock(paged(3, 2));
  auto r = fetch_artist_catalog(mock.config({"MC Test"}), "MC Test");
  EXPECT_FALSE(r.error);
  EXPECT_EQ(r.pages_fetched, 3);
  ASSERT_EQ(r.records.size(), 6u);
  EXPECT_EQ(r.records[0].artist, "MC Test");
  EXPECT_EQ(r.records[5].release_year, 2003);
  for (const auto& a : mock.auths()) EXPECT_EQ(a, "Bearer secret");
}

TEST(Ingest, PageCapRespected) {
  MockCatalog mock(paged(10, 1));
  auto cfg = mock.config({"x"});
  cfg.max_pages_per_artist = 4;
  EXPECT_EQ(fetch_artist_catalog(cfg, "x").records.size(), 4u);
}

TEST(Ingest, EmptyCatalog) {
  MockCatalog mock([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"response":{"songs":[],"next_page":null}})", "application/json");
  });
  auto r = fetch_artist_catalog(mock.config({"x"}), "x");
  EXPECT_FALSE(r.error);
  EXPECT_TRUE(r.records.empty());
}

TEST(Ingest, UnauthorizedStopsWithoutRetry) {
  MockCatalog mock([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  auto r = fetch_artist_catalog(mock.config({"x"}), "x");
  EXPECT_TRUE(r.auth_failed);
  EXPECT_TRUE(r.error);
  EXPECT_EQ(mock.hits().size(), 1u);
}

TEST(Ingest, RetriesAfter429) {
  std::atomic<int> calls{0};
  MockCatalog mock([&](const httplib::Request& req, httplib::Response& res) {
    if (calls++ == 0) {
      res.status = 429;
      return;
    }
    paged(1, 2)(req, res);
  });
  auto r = fetch_artist_catalog(mock.config({"x"}), "x");
  EXPECT_FALSE(r.error);
  EXPECT_EQ(r.records.size(), 2u);
  EXPECT_EQ(mock.hits().size(), 2u);
}

TEST(Ingest, PersistentRateLimitKeepsPartialResults) {
  MockCatalog mock([](const httplib::Request& req, httplib::Response& res) {
    if (req.get_param_value("page") == "2") {
      res.status = 429;
      return;
    }
    paged(3, 2)(req, res);
  });
  auto cfg = mock.config({"x"});
  auto r = fetch_artist_catalog(cfg, "x");
  ASSERT_TRUE(r.error);
  EXPECT_EQ(r.records.size(), 2u);
  EXPECT_EQ(mock.hits().size(), 1u + static_cast<std::size_t>(cfg.max_attempts));
}

TEST(Ingest, RateLimitHoldsAcrossThreads) {
  MockCatalog mock(paged(3, 1));
  auto cfg = mock.config({"a", "b", "c", "d"});
  cfg.requests_per_second = 20;
  auto results = fetch_all(cfg, 4);
  ASSERT_EQ(results.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(results[i].artist, cfg.artists[i]);
    EXPECT_EQ(results[i].records.size(), 3u);
  }
  auto hits = mock.hits();
  std::sort(hits.begin(), hits.end());
  ASSERT_EQ(hits.size(), 12u);
  // any window of one second holds at most 20 requests; equivalently,
  // consecutive sends are spaced by about 1/20 s
  for (std::size_t i = 1; i < hits.size(); ++i)
    EXPECT_GE(std::chrono::duration<double>(hits[i] - hits[i - 1]).count(), 0.05 - 0.01);
}

TEST(Ingest, UnreachableServerReportsNetworkError) {
  IngestConfig cfg;
  cfg.artists = {"x"};
  cfg.base_url = "http://127.0.0.1:1";
  cfg.max_attempts = 2;
  cfg.backoff_base = std::chrono::milliseconds(1);
  auto r = fetch_artist_catalog(cfg, "x");
  EXPECT_TRUE(r.error);
  EXPECT_FALSE(r.auth_failed);
}

TEST(Ingest, ArtistsFileAndConfig) {
  EXPECT_EQ(read_artists_file(raplyr::testing::fixture("artists.txt")),
            (std::vector<std::string>{"MC Test", "DJ Clean"}));
  IngestConfig cfg;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg.artists = {"a"};
  cfg.requests_per_second = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Ingest, FetchedRecordsRoundTrip) {
  MockCatalog mock(paged(2, 3));
  auto r = fetch_artist_catalog(mock.config({"x"}), "x");
  auto path = std::filesystem::temp_directory_path() / "raplyr_fetch.jsonl";
  EXPECT_EQ(write_raw_corpus(r.records, path), 6u);
  EXPECT_EQ(read_raw_corpus(path), r.records);
}
