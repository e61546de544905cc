#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "raplyr/lexicon.hpp"
#include "support.hpp"

using namespace raplyr;

namespace {
Lexicon parse_text(const std::string& text) {
  std::istringstream in(text);
  return Lexicon::parse(in);
}
const std::string kHeader = "text,canonical_form_1,canonical_form_2,canonical_form_3,category_1,severity_rating,severity_description\n";
}  // namespace

TEST(Lexicon, LoadsFixture) {
  auto lex = Lexicon::load(raplyr::testing::fixture("mini_lexicon.csv"));
  ASSERT_NE(lex.find("damn"), nullptr);
  EXPECT_EQ(lex.find("damn")->category, ProfanityCategory::ReligiousOffense);
  ASSERT_NE(lex.find("g0ddamn"), nullptr);
  EXPECT_DOUBLE_EQ(lex.find("g0ddamn")->severity, 1.8);
  ASSERT_NE(lex.find("goddamn"), nullptr);
  // the canonical "damn" of g0ddamn is more severe than the plain row
  EXPECT_DOUBLE_EQ(lex.find("damn")->severity, 1.8);
  ASSERT_NE(lex.find("sn1tch"), nullptr);
  EXPECT_EQ(lex.find("sn1tch")->canonical, "snitch");
  EXPECT_EQ(lex.find("zorptwat")->bucket, SeverityBucket::Severe);
}

TEST(Lexicon, SeverityOutOfRangeRejected) {
  EXPECT_THROW(parse_text(kHeader + "foo,,,,sexual anatomy / sexual acts,3.4,x\n"), SeverityOutOfRange);
  EXPECT_THROW(parse_text(kHeader + "foo,,,,sexual anatomy / sexual acts,0.9,x\n"), SeverityOutOfRange);
}

TEST(Lexicon, MalformedRowsReportLine) {
  try {
    parse_text(kHeader + "ok,,,,political,1.0,\nbad,,,,not a category,1.0,\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_text(kHeader + "x,,,,political,high,\n"), ParseError);
  EXPECT_THROW(parse_text("word,severity\nx,1\n"), ParseError);
  EXPECT_THROW(parse_text(""), ParseError);
}

TEST(Lexicon, ExtraColumnsAndOrderIgnored) {
  auto lex = parse_text("severity_rating,extra,category_1,text\n2.5,zz,Other / general insult,Blah\n");
  ASSERT_EQ(lex.size(), 1u);
  EXPECT_EQ(lex.entries()[0].surface, "blah");
  EXPECT_EQ(lex.entries()[0].category, ProfanityCategory::OtherInsult);
}

TEST(Lexicon, DuplicateKeepsHigherSeverity) {
  auto lex = parse_text(kHeader + "x,,,,political,1.2,\nx,,,,animal references,2.0,\nx,,,,bodily fluids / excrement,2.0,\n");
  ASSERT_EQ(lex.size(), 1u);
  EXPECT_DOUBLE_EQ(lex.entries()[0].severity, 2.0);
  EXPECT_EQ(lex.entries()[0].category, ProfanityCategory::AnimalReferences);
}

TEST(Lexicon, CategoryLabels) {
  EXPECT_EQ(all_categories().size(), 11u);
  for (auto c : all_categories()) EXPECT_EQ(category_from_string(to_string(c)), c);
  EXPECT_EQ(category_from_string("Sexual anatomy/sexual acts"), ProfanityCategory::SexualAnatomy);
  EXPECT_EQ(category_from_string("nonsense"), std::nullopt);
}

TEST(Lexicon, BucketBoundaries) {
  EXPECT_EQ(severity_bucket(1.0), SeverityBucket::Mild);
  EXPECT_EQ(severity_bucket(1.49), SeverityBucket::Mild);
  EXPECT_EQ(severity_bucket(1.5), SeverityBucket::Strong);
  EXPECT_EQ(severity_bucket(2.49), SeverityBucket::Strong);
  EXPECT_EQ(severity_bucket(2.5), SeverityBucket::Severe);
  EXPECT_EQ(severity_bucket(3.0), SeverityBucket::Severe);
  EXPECT_THROW(severity_bucket(3.01), SeverityOutOfRange);
  EXPECT_THROW(severity_bucket(std::nan("")), SeverityOutOfRange);
}

TEST(Lexicon, LookupBySurfaceThenLemma) {
  auto lex = raplyr::testing::synthetic_lexicon();
  EXPECT_EQ(lex.lookup("zorp", "zorp")->surface, "zorp");
  EXPECT_EQ(lex.lookup("zorps", "zorp")->surface, "zorp");
  EXPECT_EQ(lex.lookup("nothing", "nothing"), nullptr);
}

TEST(Lexicon, LemmaFallback) {
  auto lex = Lexicon::load(raplyr::testing::fixture("mini_lexicon.csv"));
  EXPECT_EQ(lex.lookup("zorp", "zorp"), nullptr);
  ASSERT_NE(lex.lookup("damns", "damn"), nullptr);
  EXPECT_EQ(lex.lookup("damns", "damn")->surface, "damn");
}

TEST(Lexicon, RoundTripIsFieldEqual) {
  auto lex = Lexicon::load(raplyr::testing::fixture("mini_lexicon.csv"));
  EXPECT_GT(lex.size(), 5u);  // rows plus canonical variants
  auto path = std::filesystem::temp_directory_path() / "raplyr_lexicon_eq.csv";
  lex.save(path);
  EXPECT_EQ(Lexicon::load(path).entries(), lex.entries());
}

TEST(Lexicon, SaveLoadRoundTrip) {
  auto lex = Lexicon::load(raplyr::testing::fixture("mini_lexicon.csv"));
  auto path = std::filesystem::temp_directory_path() / "raplyr_lexicon_rt.csv";
  lex.save(path);
  auto again = Lexicon::load(path);
  ASSERT_EQ(again.size(), lex.size());
  for (const auto& e : lex.entries()) {
    const auto* f = again.find(e.surface);
    ASSERT_NE(f, nullptr) << e.surface;
    EXPECT_EQ(f->severity, e.severity);
    EXPECT_EQ(f->category, e.category);
    EXPECT_EQ(f->bucket, e.bucket);
  }
}
