#include <gtest/gtest.h>

#include <thread>

#include "raplyr/service.hpp"
#include "support.hpp"

using namespace raplyr;
using nlohmann::json;

namespace {

CompletionService make_service() {
  auto train = std::vector<std::string>{"i walk and talk", "you got the game", "my name is fame", "zorp the night"};
  return CompletionService(NgramModel::train(prepare_lines(train), 3), raplyr::testing::synthetic_lexicon(),
                           PronouncingDict::load(raplyr::testing::fixture("fixture.dict")), LemmaTable{}, GenParams{},
                           "toy");
}

class LiveService : public ::testing::Test {
 protected:
  void SetUp() override {
    service_.mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  httplib::Result post(const std::string& path, const std::string& body) {
    httplib::Client c("127.0.0.1", port_);
    return c.Post(path, body, "application/json");
  }

  CompletionService service_ = make_service();
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

TEST_F(LiveService, Health) {
  httplib::Client c("127.0.0.1", port_);
  auto res = c.Get("/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["status"], "ok");
}

TEST_F(LiveService, CompleteMatchesLibrary) {
  auto res = post("/v1/complete", R"({"context":["i walk"],"seed":4,"k":5})");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  auto body = json::parse(res->body);
  GenParams p;
  p.seed = 4;
  p.k = 5;
  auto direct = complete(service_.model(), {{"i walk"}}, p, service_.lexicon(), service_.dict());
  EXPECT_EQ(body["line"], direct.line);
  EXPECT_DOUBLE_EQ(body["rhyme_density"].get<double>(), direct.rhyme_density_vs_context);
  EXPECT_DOUBLE_EQ(body["slur_score"].get<double>(), direct.slur_score);
}

TEST_F(LiveService, RerankedCandidates) {
  auto res = post("/v1/complete", R"({"context":["my name"],"seed":1,"candidates":4,"rerank":true})");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  auto body = json::parse(res->body);
  EXPECT_EQ(body["candidates"].size(), 4u);
  for (const auto& c : body["candidates"]) EXPECT_LE(c["rhyme_density"].get<double>(), body["rhyme_density"].get<double>());
}

TEST_F(LiveService, ScoreMatchesLibrary) {
  auto res = post("/v1/score", R"({"lines":["zorp a b c","","clean line"]})");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  auto body = json::parse(res->body);
  std::vector<std::string> lines{"zorp a b c", "", "clean line"};
  EXPECT_DOUBLE_EQ(body["slur_score"].get<double>(), slur_score_of_text(lines, service_.lexicon()));
  EXPECT_DOUBLE_EQ(body["slur_score"].get<double>(), 0.125);
  ASSERT_EQ(body["matches"].size(), 1u);
  EXPECT_EQ(body["matches"][0]["line"], 0);
  EXPECT_EQ(body["lines"][0]["matches"].size(), 1u);
}

TEST_F(LiveService, RhymeDensityMatchesLibrary) {
  auto res = post("/v1/rhyme-density", R"({"lines":["walk talk","stalk"]})");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  auto body = json::parse(res->body);
  EXPECT_NEAR(body["density"].get<double>(), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(body["high"], false);
  EXPECT_EQ(body["per_token"], json({0, 1, 1}));
}

TEST_F(LiveService, MalformedRequestsAre400) {
  for (const auto& [path, body] : std::vector<std::pair<std::string, std::string>>{
           {"/v1/complete", "{not json"},
           {"/v1/complete", R"({"context":"walk"})"},
           {"/v1/complete", R"({"context":["walk"],"k":"five"})"},
           {"/v1/score", R"([1,2])"},
           {"/v1/score", R"({"lines":[1]})"},
           {"/v1/rhyme-density", R"({})"}}) {
    auto res = post(path, body);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400) << path << " " << body;
    EXPECT_TRUE(json::parse(res->body).contains("error"));
  }
}

TEST_F(LiveService, ContractViolationsAre422) {
  for (const auto& [path, body] : std::vector<std::pair<std::string, std::string>>{
           {"/v1/complete", R"({"context":[]})"},
           {"/v1/complete", R"({"context":["walk"],"k":0})"},
           {"/v1/complete", R"({"context":["walk"],"min_tokens":9,"max_tokens":2})"},
           {"/v1/score", R"({"lines":["", "..."]})"},
           {"/v1/rhyme-density", R"({"lines":["walk"],"window":0})"}}) {
    auto res = post(path, body);
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 422) << path << " " << body;
  }
}

TEST_F(LiveService, ConcurrentRequestsAgree) {
  std::vector<std::thread> pool;
  std::vector<std::string> lines(8);
  for (int i = 0; i < 8; ++i)
    pool.emplace_back([&, i] {
      auto res = post("/v1/complete", R"({"context":["you got the game"],"seed":7})");
      if (res && res->status == 200) lines[i] = json::parse(res->body)["line"];
    });
  for (auto& t : pool) t.join();
  for (const auto& l : lines) EXPECT_EQ(l, lines[0]);
  EXPECT_FALSE(lines[0].empty());
}

TEST(Service, HandlersWithoutSocket) {
  auto s = make_service();
  EXPECT_EQ(s.health().status, 200);
  EXPECT_EQ(s.score("{").status, 400);
  EXPECT_EQ(s.score(R"({"lines":["zorp"]})").body["slur_score"], 1.0);
}
