#include <sstream>

#include "doctest.h"
#include "egr/affect.hpp"
#include "egr/error.hpp"
#include "support.hpp"

using namespace egr;

TEST_CASE("score_turn examples") {
  const auto lex = test::make_lexicon({{"pointless", {{"frustration", 1.0}}}, {"thanks", {{"happiness", 0.9}}}});
  auto a = score_turn("the flight leaves at noon", lex);
  CHECK(a.neg_sent == 0.0);
  CHECK(a.pos_score == 0.0);

  a = score_turn("this service is pointless", lex);
  CHECK(a.neg_emotions.at("frustration") == 1.0);
  CHECK(a.neg_sent == 1.0);

  a = score_turn("thanks", lex);
  CHECK(a.pos_score == doctest::Approx(0.9));
  CHECK(a.neg_sent == 0.0);

  a = score_turn("", lex);
  CHECK(a.neg_sent == 0.0);
  CHECK(a.pos_score == 0.0);
}

TEST_CASE("score_turn mean over matching tokens and clipped sum") {
  const auto lex = test::make_lexicon({{"awful", {{"anger", 0.8}, {"sadness", 0.6}}},
                                       {"useless", {{"anger", 0.4}}},
                                       {"sad", {{"sadness", 1.0}}}});
  // Negative-polarity matches: awful, useless, sad (3 tokens).
  const auto a = score_turn("awful useless and sad", lex);
  CHECK(a.neg_emotions.at("anger") == doctest::Approx((0.8 + 0.4) / 3.0).epsilon(1e-12));
  CHECK(a.neg_emotions.at("sadness") == doctest::Approx((0.6 + 1.0) / 3.0).epsilon(1e-12));
  CHECK(a.neg_sent == doctest::Approx(std::min(1.0, 1.2 / 3 + 1.6 / 3)).epsilon(1e-12));
  CHECK(a.max_neg_emotion() == doctest::Approx(1.6 / 3).epsilon(1e-12));
}

TEST_CASE("conversation_affect") {
  const auto lex = test::make_lexicon({{"pointless", {{"frustration", 1.0}}}, {"meh", {{"sadness", 0.7}}}});
  LexiconScorer scorer(lex);

  auto r = conversation_affect(test::make_conv({{"hello", "hi"}, {"flight", "ok"}}), scorer);
  CHECK(r.max_neg_emo == 0.0);
  CHECK(r.avg_neg_sent == 0.0);
  CHECK(r.diff_neg_sent == 0.0);

  r = conversation_affect(test::make_conv({{"hello", "pointless"}, {"pointless", "ok"}}), scorer);
  CHECK(r.avg_neg_sent == doctest::Approx(0.5));
  CHECK(r.diff_neg_sent == doctest::Approx(0.5));
  CHECK(r.max_neg_emo == 1.0);  // agent text is not scored

  r = conversation_affect(test::make_conv({{"meh", ""}}), scorer);
  CHECK(r.avg_neg_sent == doctest::Approx(0.7));
  CHECK(r.diff_neg_sent == 0.0);
  CHECK(r.max_neg_emo <= 0.7);
}

TEST_CASE("lexicon loading and validation") {
  std::istringstream in("# comment\nPointless,frustration,1.0\nthanks,happiness,0.9\n");
  const auto lex = EmotionLexicon::load(in);
  CHECK(lex.entries.at("pointless").at("frustration") == 1.0);

  std::istringstream bad("x,anger,1.5\n");
  CHECK_THROWS(EmotionLexicon::load(bad));

  auto overlap = test::make_lexicon({});
  overlap.positive_set.insert(*overlap.negative_set.begin());
  CHECK_THROWS_AS(overlap.validate(), ValidationError);

  const auto builtin = EmotionLexicon::builtin();
  CHECK(builtin.entries.size() >= 150);
  CHECK_NOTHROW(builtin.validate());
}
