#include <sstream>

#include "doctest.h"
#include "egr/detectors.hpp"
#include "egr/error.hpp"
#include "support.hpp"

using namespace egr;

namespace {

std::shared_ptr<const EmbeddingStore> basis_store() {
  // One axis per word, so similarities follow from word overlap alone.
  const std::vector<std::string> words = {"what", "are", "the", "ticket", "details", "x", "y", "weather",
                                          "baggage", "ok"};
  std::map<std::string, std::vector<double>> m;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::vector<double> v(words.size(), 0.0);
    v[i] = 1.0;
    m[words[i]] = v;
  }
  return test::make_store(m);
}

}  // namespace

TEST_CASE("match_not_trained") {
  const auto ps = PatternSet::builtin_not_trained();
  CHECK(match_not_trained("I'm not trained on that yet, but I'm still learning.", ps));
  CHECK_FALSE(match_not_trained("Please select \"Buy\" next to the ticket", ps));
  CHECK_FALSE(match_not_trained("", ps));
}

TEST_CASE("match_human_request") {
  const auto ps = PatternSet::builtin_human_request();
  CHECK(match_human_request("can i talk to a real live person?", ps));
  CHECK(match_human_request("Are you a real person?", ps));
  CHECK_FALSE(match_human_request("what are the flight details", ps));
  CHECK(ps.size() >= 8);
}

TEST_CASE("PatternSet parsing") {
  const auto ps = PatternSet::parse("t", "Foo Bar\nre:^baz\\d+$\n\n");
  CHECK(ps.size() == 2);
  CHECK(ps.matches("xx FOO bar yy"));
  CHECK(ps.matches("BAZ12"));
  CHECK_FALSE(ps.matches("baz"));
  CHECK_THROWS_AS(PatternSet::parse("t", ""), ValidationError);
  CHECK_THROWS_AS(PatternSet::parse("t", "re:(unclosed"), ValidationError);
}

TEST_CASE("is_unigram and is_long") {
  CHECK(is_unigram("thanks"));
  CHECK_FALSE(is_unigram("thanks a lot"));
  CHECK_FALSE(is_unigram(""));
  CHECK(is_long("a b c d e f g h i j k l m n o", 15));
  CHECK_FALSE(is_long("a b c"));
  CHECK(is_long("x", 1));
}

TEST_CASE("detect_customer_rephrases") {
  const auto store = basis_store();
  const auto res = test::make_resources(store);
  const std::string a = "what are the ticket details", b = "what are the details of the ticket";
  const double sim = test::oracle_text_sim(a, b, *store);
  REQUIRE(sim >= 0.8);

  auto pairs = detect_customer_rephrases(test::make_conv({{a, "x"}, {b, "y"}}), res);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].first_turn_index == 0);
  CHECK(pairs[0].second_turn_index == 1);
  CHECK(pairs[0].similarity == doctest::Approx(sim).epsilon(1e-12));

  CHECK(detect_customer_rephrases(test::make_conv({{"ok", "x"}, {"ok", "y"}}), res).empty());
  CHECK(detect_customer_rephrases(test::make_conv({{"weather", "x"}, {"baggage", "y"}}), res).empty());
  // Not consecutive: the middle turn breaks the pair.
  CHECK(detect_customer_rephrases(test::make_conv({{a, "x"}, {"weather y", "x"}, {a, "y"}}), res).empty());
}

TEST_CASE("positive turns are not rephrases") {
  const auto store = test::make_store({{"great", {1, 0}}, {"ticket", {0, 1}}});
  const auto res = test::make_resources(store, test::make_lexicon({{"great", {{"happiness", 1.0}}}}));
  CHECK(detect_customer_rephrases(test::make_conv({{"great ticket", ""}, {"great ticket", ""}}), res).empty());
}

TEST_CASE("detect_agent_repeats") {
  const auto store = basis_store();
  const auto res = test::make_resources(store);
  auto reps = detect_agent_repeats(test::make_conv({{"q", "x"}, {"q", "y"}, {"q", "x"}}), res);
  REQUIRE(reps.size() == 1);
  CHECK(reps[0].first_turn_index == 0);
  CHECK(reps[0].second_turn_index == 2);

  CHECK(detect_agent_repeats(test::make_conv({{"q", "x"}, {"q", "x"}, {"q", "x"}}), res).size() == 3);
  CHECK(detect_agent_repeats(test::make_conv({{"q", "x"}, {"q", "y"}, {"q", "weather"}}), res).empty());
}

TEST_CASE("detect_agent_repeats equals the pairwise oracle on a hand case") {
  const auto store = basis_store();
  const auto res = test::make_resources(store);
  const auto conv = test::make_conv(
      {{"q", "x y"}, {"q", "x"}, {"q", "y x"}, {"q", "ticket"}, {"q", ""}, {"q", "x y ticket"}});
  const auto got = detect_agent_repeats(conv, res);
  const auto want = test::oracle_agent_repeats(conv, *store, 0.8);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].first_turn_index == want[i].i);
    CHECK(got[i].second_turn_index == want[i].j);
    CHECK(got[i].similarity == doctest::Approx(want[i].sim).epsilon(1e-9));
  }
}

TEST_CASE("DetectorConfig validation") {
  DetectorConfig c;
  CHECK_NOTHROW(c.validate());
  c.similarity_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.long_turn_tokens = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
