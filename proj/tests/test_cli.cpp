#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "egr/cli.hpp"
#include "egr/error.hpp"
#include "support.hpp"

using namespace egr;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("egr-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::size_t count_lines_with(const std::string& text, const std::string& needle) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += line.find(needle) != std::string::npos;
  return n;
}

}  // namespace

TEST_CASE("generate writes three files deterministically") {
  TempDir d;
  auto r = run({"generate", "--out-dir", d / "a", "--n", "120", "--seed", "4"});
  REQUIRE(r.code == kExitOk);
  for (const char* f : {"conversations.jsonl", "labels.tsv", "traces.jsonl"}) CHECK(fs::exists(d.path / "a" / f));
  r = run({"generate", "--out-dir", d / "b", "--n", "120", "--seed", "4"});
  REQUIRE(r.code == kExitOk);
  for (const char* f : {"conversations.jsonl", "labels.tsv", "traces.jsonl"}) {
    CHECK(slurp(d.path / "a" / f) == slurp(d.path / "b" / f));
  }
}

TEST_CASE("generate rejects length_min below 2") {
  TempDir d;
  const auto r = run({"generate", "--out-dir", d / "a", "--length-min", "1"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("length_min must be >= 2") != std::string::npos);
}

TEST_CASE("pipeline subcommands") {
  TempDir d;
  REQUIRE(run({"generate", "--out-dir", d / "a", "--n", "300", "--rate", "0.2", "--seed", "6"}).code == 0);
  REQUIRE(run({"generate", "--out-dir", d / "b", "--n", "100", "--rate", "0.2", "--seed", "7", "--vocabulary",
               "software", "--domain-tag", "B"})
              .code == 0);
  const auto conv = d / "a/conversations.jsonl", labels = d / "a/labels.tsv";
  const auto before = slurp(conv);

  SUBCASE("cv reports three models and records the seed") {
    const auto r = run({"cv", "--corpus", conv, "--labels", labels, "-k", "5", "--seed", "13", "-o", d / "cv.tsv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("seed=13") != std::string::npos);
    for (const char* m : {"rule ", "text ", "egr "}) CHECK(count_lines_with(r.out, m) >= 1);
    const auto tsv = slurp(d.path / "cv.tsv");
    CHECK(tsv.find("seed=13") != std::string::npos);
    // 3 models x (5 folds + aggregate) x 2 classes
    CHECK(count_lines_with(tsv, "\t") == 1 + 3 * 6 * 2);
    CHECK(slurp(conv) == before);
  }
  SUBCASE("ablation emits three rows") {
    const auto r = run({"ablation", "--corpus", conv, "--labels", labels, "-k", "5", "-o", d / "abl.tsv"});
    REQUIRE(r.code == 0);
    const auto tsv = slurp(d.path / "abl.tsv");
    CHECK(count_lines_with(tsv, "\t") == 4);
    CHECK(tsv.find("agent\t") != std::string::npos);
    CHECK(tsv.find("agent+customer\t") != std::string::npos);
  }
  SUBCASE("train, evaluate and featurize") {
    REQUIRE(run({"train", "--corpus", conv, "--labels", labels, "-o", d / "m.json"}).code == 0);
    auto r = run({"evaluate", "--corpus", conv, "--labels", labels, "--model", d / "m.json", "--predictions",
                  d / "p.tsv"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(d.path / "p.tsv"));
    r = run({"featurize", "--corpus", conv, "--model", d / "m.json", "-j", "1", "-o", d / "f1.tsv"});
    REQUIRE(r.code == 0);
    r = run({"featurize", "--corpus", conv, "--model", d / "m.json", "-j", "4", "-o", d / "f4.tsv"});
    REQUIRE(r.code == 0);
    CHECK(slurp(d.path / "f1.tsv") == slurp(d.path / "f4.tsv"));

    REQUIRE(run({"train", "--corpus", conv, "--labels", labels, "--model-kind", "text", "-o", d / "t.json"}).code == 0);
    CHECK(run({"evaluate", "--corpus", conv, "--labels", labels, "--model", d / "t.json"}).code == 0);
  }
  SUBCASE("mcnemar on identical prediction files") {
    REQUIRE(run({"evaluate", "--corpus", conv, "--labels", labels, "--predictions", d / "rule.tsv"}).code == 0);
    const auto r = run({"mcnemar", "--a", d / "rule.tsv", "--b", d / "rule.tsv", "--truth", labels});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("p=1") != std::string::npos);
    CHECK(r.out.find("no discordant pairs") != std::string::npos);
  }
  SUBCASE("crossdomain and rephrase-report") {
    auto r = run({"crossdomain", "--corpus", conv, "--labels", labels, "--test-corpus", d / "b/conversations.jsonl",
                  "--test-labels", d / "b/labels.tsv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("mcnemar egr vs text") != std::string::npos);
    r = run({"rephrase-report", "--corpus", conv, "--labels", labels, "--traces", d / "a/traces.jsonl"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("planted:") != std::string::npos);
  }
  SUBCASE("stats") {
    std::ofstream(d / "j.txt") << "c1 1 1 1 0\nc2 0 0 0 0\nc3 1 1 0 1\n";
    const auto r = run({"stats", "--corpus", conv, "--judgments", d / "j.txt", "--labels-out", d / "agg.tsv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("mean_length") != std::string::npos);
    CHECK(r.out.find("mean_pairwise_kappa") != std::string::npos);
    CHECK(slurp(d.path / "agg.tsv").find("c3\tegregious") != std::string::npos);
  }
}

TEST_CASE("exit codes per error class") {
  TempDir d;
  CHECK(run({"bogus"}).code == kExitUsage);
  CHECK(run({"cv", "--folds", "notanumber"}).code == kExitUsage);
  CHECK(run({"cv", "--corpus", d / "missing.jsonl", "--labels", d / "x"}).code == kExitIo);
  CHECK(run({"cv", "--embeddings", d / "missing.txt"}).code == kExitIo);

  std::ofstream(d / "bad.jsonl") << "{\"conversation_id\": \"c\"}\n";
  std::ofstream(d / "l.tsv") << "c\tegregious\n";
  CHECK(run({"cv", "--corpus", d / "bad.jsonl", "--labels", d / "l.tsv"}).code == kExitSchema);

  {
    std::ofstream c(d / "one.jsonl");
    for (int i = 0; i < 4; ++i) {
      for (int t = 0; t < 2; ++t) {
        c << R"({"conversation_id":"c)" << i << R"(","turn_id":)" << t
          << R"(,"customer_text":"hello there","agent_text":"hi"})" << '\n';
      }
    }
    std::ofstream l(d / "one.tsv");
    for (int i = 0; i < 4; ++i) l << 'c' << i << "\tnon_egregious\n";
  }
  CHECK(run({"train", "--corpus", d / "one.jsonl", "--labels", d / "one.tsv", "-o", d / "m.json"}).code ==
        kExitDegenerate);
}

TEST_CASE("config round-trip and overrides") {
  RunConfig c;
  c.seed = 42;
  c.detector.similarity_threshold = 0.75;
  c.train.epochs = 7;
  c.group = FeatureGroup::Agent;
  c.generator.domain_tag = "Z";
  c.paths.corpus = "x.jsonl";
  const auto text = c.to_json();
  const auto back = RunConfig::from_json(text);
  CHECK(back == c);
  CHECK(RunConfig::from_json(back.to_json()) == back);

  CHECK_THROWS_AS(RunConfig::from_json(R"({"sede": 1})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(R"({"thresholds": {"similarity": "high"}})"), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json("{"), ConfigError);
  RunConfig bad;
  bad.detector.similarity_threshold = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  TempDir d;
  std::ofstream(d / "cfg.json") << R"({"generator": {"n_conversations": 40, "seed": 9}})";
  auto r = run({"generate", "--config", d / "cfg.json", "--out-dir", d / "g"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("generated 40 ") != std::string::npos);
  r = run({"generate", "--config", d / "cfg.json", "--n", "30", "--out-dir", d / "h"});
  CHECK(r.out.find("generated 30 ") != std::string::npos);

  ::setenv(kConfigEnvVar, (d / "cfg.json").c_str(), 1);
  r = run({"generate", "--out-dir", d / "e"});
  ::unsetenv(kConfigEnvVar);
  CHECK(r.out.find("generated 40 ") != std::string::npos);
}
