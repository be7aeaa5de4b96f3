#pragma once

// Per-turn emotion scoring and conversation-level negative sentiment.

#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "egr/conversation.hpp"

namespace egr {

struct EmotionLexicon {
  /// word -> (emotion -> weight in [0,1])
  std::map<std::string, std::map<std::string, double>> entries;
  std::set<std::string> negative_set;
  std::set<std::string> positive_set;

  /// Throws ValidationError if the polarity sets overlap or a weight falls
  /// outside [0,1].
  void validate() const;

  static std::set<std::string> default_negative_set();
  static std::set<std::string> default_positive_set();

  /// Reads `word,emotion,weight` lines ('#' starts a comment). Words are
  /// lowercased.
  static EmotionLexicon load(std::istream& in,
                             std::set<std::string> negative = default_negative_set(),
                             std::set<std::string> positive = default_positive_set());
  static EmotionLexicon load_file(const std::string& path,
                                  std::set<std::string> negative = default_negative_set(),
                                  std::set<std::string> positive = default_positive_set());

  /// The bundled mini-lexicon.
  static EmotionLexicon builtin();
};

struct TurnAffect {
  std::map<std::string, double> neg_emotions;
  double neg_sent = 0.0;
  double pos_score = 0.0;

  double max_neg_emotion() const;
};

/// Pluggable turn scorer. The lexicon scorer is the default; a client for a
/// remote tone service can implement the same interface.
class AffectScorer {
 public:
  virtual ~AffectScorer() = default;
  virtual TurnAffect score_turn(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

/// For each emotion: the mean weight over the tokens that match any lexicon
/// entry of that emotion's polarity. neg_sent is the clipped sum of the
/// negative scores; pos_score is the largest positive score.
class LexiconScorer final : public AffectScorer {
 public:
  explicit LexiconScorer(EmotionLexicon lexicon);

  TurnAffect score_turn(std::string_view text) const override;
  std::string name() const override { return "lexicon"; }

  const EmotionLexicon& lexicon() const noexcept { return lexicon_; }

 private:
  EmotionLexicon lexicon_;
};

TurnAffect score_turn(std::string_view text, const EmotionLexicon& lexicon);

struct ConversationAffect {
  double max_neg_emo = 0.0;
  double avg_neg_sent = 0.0;
  double diff_neg_sent = 0.0;
  std::vector<TurnAffect> per_turn;
};

/// Aggregates over customer turns.
ConversationAffect conversation_affect(const Conversation& conv, const AffectScorer& scorer);
ConversationAffect aggregate_affect(std::vector<TurnAffect> per_turn);

}  // namespace egr
