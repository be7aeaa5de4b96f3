#include <cmath>
#include <sstream>

#include "doctest.h"
#include "egr/error.hpp"
#include "egr/text_similarity.hpp"
#include "support.hpp"

using namespace egr;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize") {
  CHECK(tokenize("Are you a real person?") == Tokens{"are", "you", "a", "real", "person"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("I'm not trained.") == Tokens{"i", "m", "not", "trained"});
  CHECK(tokenize("  ...!!  ").empty());
  CHECK(tokenize("Naïve café—really") == Tokens{"naïve", "café", "really"});
}

TEST_CASE("tokenize follows the split rule") {
  // Rule oracle: lowercase, then every non-alphanumeric ASCII byte is a boundary.
  auto oracle = [](const std::string& s) {
    Tokens out;
    std::string cur;
    for (char ch : s) {
      if (std::isalnum(static_cast<unsigned char>(ch))) {
        cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      } else if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  };
  for (const char* s : {"I'm not trained.", "can i talk to a real live person?", "a,b;c:d(e)f",
                        "Please select \"Buy\" next to the ticket", "x--y__z", "A1 b2"}) {
    CHECK(tokenize(s) == oracle(s));
  }
}

TEST_CASE("embed_sentence") {
  const auto store = test::make_store({{"a", {1, 0}}, {"b", {0, 1}}});
  auto e = embed_sentence(Tokens{"a", "b"}, *store);
  CHECK(e.vector == std::vector<double>{0.5, 0.5});

  e = embed_sentence(Tokens{"a", "z"}, *store);
  CHECK(e.vector == test::oracle_embed({"a", "z"}, *store));
  CHECK(e.vector == std::vector<double>{1, 0});
  CHECK(e.covered_tokens == 1);
  CHECK(e.total_tokens == 2);

  e = embed_sentence(Tokens{"z"}, *store);
  CHECK(e.is_zero());
  CHECK(e.vector == std::vector<double>{0, 0});
  CHECK(embed_sentence(Tokens{}, *store).is_zero());
}

TEST_CASE("cosine_similarity") {
  const std::vector<double> u{1, 1}, v{1, 0}, w{0, 1}, neg{-1, 0};
  CHECK(cosine_similarity(u, u) == doctest::Approx(1.0));
  CHECK(cosine_similarity(v, w) == 0.0);
  CHECK(cosine_similarity(u, v) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(cosine_similarity(u, v) == doctest::Approx(test::oracle_cosine(u, v)).epsilon(1e-12));
  CHECK(cosine_similarity(v, neg) == 0.0);  // clamped
  CHECK(cosine_similarity(std::vector<double>{0, 0}, v) == 0.0);
  CHECK_THROWS_AS(cosine_similarity(std::vector<double>{1}, v), DimensionError);
}

TEST_CASE("is_similar") {
  const auto store = test::make_store({{"ticket", {1, 0}}, {"details", {0.9, 0.1}}, {"weather", {0, 1}}});
  CHECK(is_similar("ticket details", "ticket details", *store));
  CHECK_FALSE(is_similar("ticket", "weather", *store));
  CHECK(is_similar("ticket", "weather", *store, 0.0));
  CHECK_FALSE(is_similar("zzz", "zzz", *store));  // all OOV
}

TEST_CASE("EmbeddingStore io") {
  std::istringstream in("3 2\nHello 1 0\nworld 0 1\nBye 0.5 0.5\n");
  auto s = EmbeddingStore::load(in);
  CHECK(s.dimension() == 2);
  CHECK(s.size() == 3);
  CHECK(s.contains("HELLO"));
  CHECK(s.lookup("bye")[1] == 0.5);

  std::stringstream out;
  s.save(out);
  auto back = EmbeddingStore::load(out);
  CHECK(back.size() == 3);
  CHECK(back.lookup("world")[1] == 1.0);

  std::istringstream ragged("a 1 2\nb 1\n");
  CHECK_THROWS(EmbeddingStore::load(ragged));
  EmbeddingStore e(2);
  CHECK_THROWS_AS(e.add("x", std::vector<double>{1, 2, 3}), DimensionError);
}
