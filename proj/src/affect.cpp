#include "egr/affect.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "egr/error.hpp"
#include "egr/resources.hpp"
#include "egr/text_similarity.hpp"

namespace egr {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

void EmotionLexicon::validate() const {
  for (const auto& e : negative_set) {
    if (positive_set.count(e) != 0) {
      throw ValidationError("emotion '" + e + "' is both negative and positive");
    }
  }
  for (const auto& [word, emotions] : entries) {
    for (const auto& [emotion, weight] : emotions) {
      if (!(weight >= 0.0 && weight <= 1.0)) {
        throw ValidationError("weight for '" + word + "'/" + emotion + " outside [0,1]");
      }
    }
  }
}

std::set<std::string> EmotionLexicon::default_negative_set() {
  return {"anger", "disgust", "fear", "frustration", "sadness"};
}

std::set<std::string> EmotionLexicon::default_positive_set() {
  return {"gratitude", "happiness", "satisfaction"};
}

EmotionLexicon EmotionLexicon::load(std::istream& in, std::set<std::string> negative,
                                    std::set<std::string> positive) {
  EmotionLexicon lex;
  lex.negative_set = std::move(negative);
  lex.positive_set = std::move(positive);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    std::stringstream fields(body);
    std::string word, emotion, weight;
    if (!std::getline(fields, word, ',') || !std::getline(fields, emotion, ',') ||
        !std::getline(fields, weight)) {
      throw ParseError(line_no, "expected 'word,emotion,weight'");
    }
    double w = 0;
    try {
      std::size_t used = 0;
      const auto t = trim(weight);
      w = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw ParseError(line_no, "bad weight '" + weight + "'");
    }
    auto tokens = tokenize(trim(word));
    if (tokens.size() != 1) throw ParseError(line_no, "lexicon entry must be a single word");
    lex.entries[tokens.front()][trim(emotion)] = w;
  }
  lex.validate();
  return lex;
}

EmotionLexicon EmotionLexicon::load_file(const std::string& path, std::set<std::string> negative,
                                         std::set<std::string> positive) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon '" + path + "'");
  return load(in, std::move(negative), std::move(positive));
}

EmotionLexicon EmotionLexicon::builtin() {
  std::istringstream in{std::string(builtin_lexicon_text())};
  return load(in);
}

double TurnAffect::max_neg_emotion() const {
  double m = 0.0;
  for (const auto& [emotion, score] : neg_emotions) m = std::max(m, score);
  return m;
}

LexiconScorer::LexiconScorer(EmotionLexicon lexicon) : lexicon_(std::move(lexicon)) {
  lexicon_.validate();
}

TurnAffect LexiconScorer::score_turn(std::string_view text) const {
  return egr::score_turn(text, lexicon_);
}

TurnAffect score_turn(std::string_view text, const EmotionLexicon& lexicon) {
  std::map<std::string, double> neg_sum, pos_sum;
  std::size_t neg_matches = 0, pos_matches = 0;
  // Sorted so that floating-point sums do not depend on word order.
  auto tokens = tokenize(text);
  std::sort(tokens.begin(), tokens.end());
  for (const auto& tok : tokens) {
    auto it = lexicon.entries.find(tok);
    if (it == lexicon.entries.end()) continue;
    bool neg_hit = false, pos_hit = false;
    for (const auto& [emotion, weight] : it->second) {
      if (lexicon.negative_set.count(emotion)) {
        neg_sum[emotion] += weight;
        neg_hit = true;
      } else if (lexicon.positive_set.count(emotion)) {
        pos_sum[emotion] += weight;
        pos_hit = true;
      }
    }
    neg_matches += neg_hit ? 1 : 0;
    pos_matches += pos_hit ? 1 : 0;
  }

  TurnAffect out;
  double total = 0.0;
  for (const auto& [emotion, sum] : neg_sum) {
    const double score = std::min(1.0, sum / static_cast<double>(neg_matches));
    out.neg_emotions[emotion] = score;
    total += score;
  }
  out.neg_sent = std::min(1.0, total);
  for (const auto& [emotion, sum] : pos_sum) {
    out.pos_score = std::max(out.pos_score, std::min(1.0, sum / static_cast<double>(pos_matches)));
  }
  return out;
}

ConversationAffect aggregate_affect(std::vector<TurnAffect> per_turn) {
  ConversationAffect out;
  if (!per_turn.empty()) {
    double sum = 0.0, max_sent = 0.0, min_sent = 1.0;
    for (const auto& t : per_turn) {
      out.max_neg_emo = std::max(out.max_neg_emo, t.max_neg_emotion());
      sum += t.neg_sent;
      max_sent = std::max(max_sent, t.neg_sent);
      min_sent = std::min(min_sent, t.neg_sent);
    }
    out.avg_neg_sent = std::min(1.0, sum / static_cast<double>(per_turn.size()));
    // Flat sentiment is exactly zero difference, independent of rounding in the mean.
    out.diff_neg_sent = max_sent == min_sent ? 0.0 : std::clamp(max_sent - out.avg_neg_sent, 0.0, 1.0);
  }
  out.per_turn = std::move(per_turn);
  return out;
}

ConversationAffect conversation_affect(const Conversation& conv, const AffectScorer& scorer) {
  std::vector<TurnAffect> per_turn;
  per_turn.reserve(conv.turns.size());
  for (const auto& turn : conv.turns) per_turn.push_back(scorer.score_turn(turn.customer_text));
  return aggregate_affect(std::move(per_turn));
}

}  // namespace egr
