#pragma once

// Turn-level detectors: "not trained" replies, human-agent requests, unigram
// and long inputs, customer rephrases and agent repeats.

#include <cstddef>
#include <istream>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "egr/affect.hpp"
#include "egr/conversation.hpp"
#include "egr/text_similarity.hpp"

namespace egr {

/// Case-insensitive substring patterns, or ECMAScript regexes when the
/// source line starts with `re:`.
class PatternSet {
 public:
  PatternSet() = default;
  /// Throws ValidationError when empty or when a regex fails to compile.
  PatternSet(std::string name, const std::vector<std::string>& patterns);

  static PatternSet load(std::string name, std::istream& in);
  static PatternSet load_file(std::string name, const std::string& path);
  static PatternSet parse(std::string name, std::string_view text);

  static PatternSet builtin_not_trained();
  static PatternSet builtin_human_request();

  bool matches(std::string_view text) const;

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& sources() const noexcept { return sources_; }
  std::size_t size() const noexcept { return sources_.size(); }

  /// New set with `extra` patterns appended.
  PatternSet extended(const std::vector<std::string>& extra) const;

 private:
  struct Compiled {
    bool is_regex = false;
    std::string needle;  // lowercased substring
    std::shared_ptr<const std::regex> regex;
  };

  std::string name_;
  std::vector<std::string> sources_;
  std::vector<Compiled> compiled_;
};

bool match_not_trained(std::string_view agent_text, const PatternSet& ps);
bool match_human_request(std::string_view customer_text, const PatternSet& ps);

bool is_unigram(std::string_view customer_text);

inline constexpr std::size_t kDefaultLongTurnTokens = 15;
bool is_long(std::string_view customer_text, std::size_t min_tokens = kDefaultLongTurnTokens);

struct DetectorConfig {
  double similarity_threshold = kDefaultSimilarityThreshold;
  /// A turn with pos_score at or above this is "positive" and is excluded
  /// from rephrase detection.
  double positive_threshold = 0.6;
  /// Mean pair neg_sent at or above this counts as "high" negative sentiment.
  double neg_sent_threshold = 0.5;
  std::size_t long_turn_tokens = kDefaultLongTurnTokens;

  /// Throws ConfigError for out-of-range values.
  void validate() const;
};

/// Everything the detectors and feature extractor read. Shared resources are
/// immutable and may be used from several threads.
struct Resources {
  std::shared_ptr<const EmbeddingStore> embeddings;
  std::shared_ptr<const AffectScorer> affect;
  PatternSet not_trained;
  PatternSet human_request;
  DetectorConfig config;

  void validate() const;
};

/// Per-turn detector outputs, computed once per conversation.
struct TurnSignals {
  SentenceEmbedding customer_embedding;
  SentenceEmbedding agent_embedding;
  TurnAffect affect;
  std::size_t customer_tokens = 0;
  bool unigram = false;
  bool long_turn = false;
  bool positive = false;
  bool human_request = false;
  bool agent_not_trained = false;
};

struct ConversationAnalysis {
  std::vector<TurnSignals> turns;
  ConversationAffect affect;  // per_turn left empty; see turns[i].affect
};

ConversationAnalysis analyze(const Conversation& conv, const Resources& res);

struct RephrasePair {
  std::size_t first_turn_index = 0;
  std::size_t second_turn_index = 0;
  double similarity = 0.0;

  friend bool operator==(const RephrasePair&, const RephrasePair&) = default;
};

struct AgentRepeat {
  std::size_t first_turn_index = 0;
  std::size_t second_turn_index = 0;
  double similarity = 0.0;

  friend bool operator==(const AgentRepeat&, const AgentRepeat&) = default;
};

/// Consecutive customer turns (i, i+1) with similarity >= threshold, skipping
/// pairs where either turn is a unigram or positive.
std::vector<RephrasePair> detect_customer_rephrases(const ConversationAnalysis& analysis,
                                                    double threshold);
std::vector<RephrasePair> detect_customer_rephrases(const Conversation& conv,
                                                    const Resources& res);

/// All agent-turn pairs i < j, adjacent or not, with similarity >= threshold.
std::vector<AgentRepeat> detect_agent_repeats(const ConversationAnalysis& analysis,
                                              double threshold);
std::vector<AgentRepeat> detect_agent_repeats(const Conversation& conv, const Resources& res);

}  // namespace egr
