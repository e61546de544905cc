#include <gtest/gtest.h>

#include "raplyr/eval.hpp"
#include "support.hpp"

using namespace raplyr;
using raplyr::testing::make_song;

namespace {
const PronouncingDict& dict() {
  static const auto d = PronouncingDict::load(raplyr::testing::fixture("fixture.dict"));
  return d;
}

struct Toy {
  std::vector<Song> train = {make_song("a", {"i walk and talk", "you got the game", "my name is fame"}),
                             make_song("b", {"we play all day", "in the night", "we got the light and fight"})};
  NgramModel model = NgramModel::train(prepare_training(train), 3);
  Lexicon lex = raplyr::testing::synthetic_lexicon();
  std::vector<Song> test = {make_song("t1", {"i got the flow", "you play the game", "time to rhyme"}),
                            make_song("t2", {"only one line"}),
                            make_song("t3", {"cat hat", "bat"})};
};
}  // namespace

TEST(Energy, KilowattHours) {
  auto e = energy(Rational(250), Rational(2));
  EXPECT_EQ(e.kwh, Rational(1, 2));
  EXPECT_EQ(energy(Rational(300), Rational::parse("1.75")).kwh, Rational(21, 40));
  EXPECT_EQ(energy(Rational(250), Rational(0)).kwh, Rational(0));
  EXPECT_THROW(energy(Rational(250), Rational(-1)), NegativeInput);
  EXPECT_THROW(energy(Rational(0), Rational(1)), NegativeInput);
}

TEST(Evaluate, ReportAggregatesInstances) {
  Toy s;
  GenParams p;
  p.seed = 5;
  auto r = evaluate(s.model, s.test, s.lex, dict(), p, "toy");
  EXPECT_EQ(r.model_name, "toy");
  EXPECT_EQ(r.num_instances, 2u);
  EXPECT_EQ(r.skipped, 1u);
  ASSERT_EQ(r.instances.size(), 2u);
  EXPECT_EQ(r.instances[0].input, (std::vector<std::string>{"i got the flow", "you play the game"}));
  EXPECT_EQ(r.instances[0].reference, (std::vector<std::string>{"time to rhyme"}));
  double mean_ref = (r.instances[0].reference_rd + r.instances[1].reference_rd) / 2;
  EXPECT_NEAR(r.reference_rd, mean_ref, 1e-12);
  EXPECT_GT(r.perplexity, 1.0);
  for (std::size_t i = 0; i < 2; ++i) {
    GenParams pi = p;
    pi.seed = p.seed + i;
    auto c = complete(s.model, {r.instances[i].input}, pi, s.lex, dict());
    EXPECT_EQ(c.line, r.instances[i].generated);
  }
}

TEST(Evaluate, DeterministicForSeed) {
  Toy s;
  GenParams p;
  p.seed = 9;
  auto a = to_json(evaluate(s.model, s.test, s.lex, dict(), p));
  auto b = to_json(evaluate(s.model, s.test, s.lex, dict(), p));
  EXPECT_EQ(a, b);
}

TEST(Evaluate, EmptyTestSetRejected) {
  Toy s;
  EXPECT_THROW(evaluate(s.model, {}, s.lex, dict(), {}), EmptyTestSet);
  EXPECT_THROW(evaluate(s.model, {make_song("x", {"one"})}, s.lex, dict(), {}), EmptyTestSet);
}

TEST(Report, JsonRoundTrip) {
  Toy s;
  auto r = evaluate(s.model, s.test, s.lex, dict(), {});
  auto back = eval_report_from_json(to_json(r));
  EXPECT_EQ(back.model_name, r.model_name);
  EXPECT_DOUBLE_EQ(back.perplexity, r.perplexity);
  EXPECT_DOUBLE_EQ(back.generated_rd, r.generated_rd);
  EXPECT_EQ(back.num_instances, r.num_instances);
  EXPECT_TRUE(to_json(r).contains("perplexity_ngram"));
}

TEST(Compare, DeltasAndWinners) {
  EvalReport a, b;
  a.model_name = "a";
  b.model_name = "b";
  a.generated_rd = 0.5;
  b.generated_rd = 0.75;
  a.perplexity = 100;
  b.perplexity = 120;
  a.generated_slur_score = b.generated_slur_score = 0.01;
  auto c = compare_reports(a, b);
  auto row = [&](const std::string& m) {
    return *std::find_if(c.rows.begin(), c.rows.end(), [&](const auto& r) { return r.metric == m; });
  };
  EXPECT_DOUBLE_EQ(row("generated_rd").delta, 0.25);
  EXPECT_EQ(row("generated_rd").winner, Winner::B);
  EXPECT_EQ(row("perplexity_ngram").winner, Winner::A);
  EXPECT_EQ(row("generated_slur_score").winner, Winner::Tie);
  auto text = render_comparison(c);
  EXPECT_NE(text.find("generated_rd"), std::string::npos);
}

TEST(Compare, IdenticalReportsTie) {
  Toy s;
  auto r = evaluate(s.model, s.test, s.lex, dict(), {});
  auto c = compare_reports(r, r);
  ASSERT_FALSE(c.rows.empty());
  for (const auto& row : c.rows) {
    EXPECT_EQ(row.delta, 0.0) << row.metric;
    EXPECT_EQ(row.winner, Winner::Tie) << row.metric;
  }
}

TEST(Evaluate, FiveSongFixtureIsDeterministic) {
  Toy s;
  std::vector<Song> five = {make_song("f1", {"i walk", "you talk", "we stalk"}),
                            make_song("f2", {"my name", "the game", "the fame"}),
                            make_song("f3", {"cat hat", "bat", "that"}),
                            make_song("f4", {"we play", "all day"}),
                            make_song("f5", {"in the night", "we got the light", "and fight"})};
  GenParams p;
  p.seed = 11;
  auto a = evaluate(s.model, five, s.lex, dict(), p);
  EXPECT_EQ(a.num_instances, 5u);
  EXPECT_EQ(to_json(a), to_json(evaluate(s.model, five, s.lex, dict(), p)));
}

TEST(Report, TableListsBaselinesAsPublished) {
  EvalReport r;
  r.model_name = "mine";
  auto text = render_reports({r});
  EXPECT_NE(text.find("mine"), std::string::npos);
  EXPECT_NE(text.find("Ghostwriter (published)"), std::string::npos);
  EXPECT_NE(text.find("0.17"), std::string::npos);
  EXPECT_NE(text.find("DopeLearning (published)"), std::string::npos);
  EXPECT_EQ(render_reports({r}, false).find("published"), std::string::npos);
}
