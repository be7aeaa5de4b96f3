#include "doctest.h"
#include "egr/error.hpp"
#include "egr/rephrase_analysis.hpp"
#include "support.hpp"

using namespace egr;

namespace {

// "flight" and "info" at cosine 0.9; "baggage" at 0.3 to "flight".
std::shared_ptr<const EmbeddingStore> store() {
  const double s3 = std::sqrt(1 - 0.09), s9 = std::sqrt(1 - 0.81);
  return test::make_store({{"flight", {1, 0}}, {"info", {0.9, s9}}, {"baggage", {0.3, s3}}});
}

}  // namespace

TEST_CASE("classify_motivation") {
  const auto st = store();
  const auto nt = PatternSet::builtin_not_trained();
  const RephrasePair pair{0, 1, 0.95};

  auto conv = test::make_conv({{"flight flight", "I'm not trained on that"}, {"flight flight", ""}});
  CHECK(classify_motivation(conv, pair, *st, nt).motivation == Motivation::UnsupportedIntent);

  conv = test::make_conv({{"flight flight", "baggage"}, {"flight flight", ""}});
  REQUIRE(test::oracle_text_sim("flight flight", "baggage", *st) == doctest::Approx(0.3));
  CHECK(classify_motivation(conv, pair, *st, nt).motivation == Motivation::NluError);

  conv = test::make_conv({{"flight flight", "info"}, {"flight flight", ""}});
  REQUIRE(test::oracle_text_sim("flight flight", "info", *st) == doctest::Approx(0.9));
  CHECK(classify_motivation(conv, pair, *st, nt).motivation == Motivation::LgLimitation);

  CHECK_THROWS_AS(classify_motivation(conv, RephrasePair{0, 5, 1.0}, *st, nt), ValidationError);
}

TEST_CASE("motivation_distribution") {
  const auto res = test::make_resources(store());
  SUBCASE("every rephrase after a not-trained reply") {
    const std::vector<LabeledConversation> corpus = {
        {test::make_conv({{"flight info", "I'm not trained on that"}, {"flight info", "ok"}}, "a"), Label::Egregious},
        {test::make_conv({{"baggage flight", "not trained"}, {"baggage flight", "ok"}}, "b"), Label::NonEgregious},
    };
    const auto d = motivation_distribution(corpus, res);
    CHECK(d.egregious.percentages()[2] == 100.0);
    CHECK(d.non_egregious.percentages()[2] == 100.0);
  }
  SUBCASE("no rephrases flags both classes empty") {
    const std::vector<LabeledConversation> corpus = {
        {test::make_conv({{"flight info", "x"}, {"baggage", "y"}}, "a"), Label::Egregious},
    };
    const auto d = motivation_distribution(corpus, res);
    CHECK(d.egregious.empty());
    CHECK(d.non_egregious.empty());
    const auto table = format_motivation_table(d);
    CHECK(table.find("egregious class: no rephrase pairs") != std::string::npos);
  }
}

TEST_CASE("generated corpus recovers planted motivations") {
  const auto cfg = GeneratorConfig::domain_a(4, 400);
  const auto corpus = generate_corpus(cfg, test::synth_res());
  const auto got = motivation_distribution(corpus.conversations, test::synth_res(), 2);
  const auto want = planted_motivations(corpus.traces);
  for (auto l : {Label::Egregious, Label::NonEgregious}) {
    const auto g = got.of(l).percentages(), w = want.of(l).percentages();
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(g[i] - w[i]) <= 5.0);
  }
}

TEST_CASE("motivation names") {
  for (auto m : kMotivations) CHECK(parse_motivation(to_string(m)) == m);
  CHECK_THROWS(parse_motivation("asr_error"));
}
