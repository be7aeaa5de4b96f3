#include "egr/detectors.hpp"

#include <fstream>
#include <sstream>

#include "egr/error.hpp"
#include "egr/resources.hpp"

namespace egr {

namespace {

// Lowercases ASCII and folds typographic apostrophes/quotes so that
// "I’m" and "I'm" match the same pattern.
std::string normalize_for_match(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80) {
      const auto third = static_cast<unsigned char>(text[i + 2]);
      if (third == 0x98 || third == 0x99) {
        out.push_back('\'');
        i += 2;
        continue;
      }
    }
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

PatternSet::PatternSet(std::string name, const std::vector<std::string>& patterns)
    : name_(std::move(name)) {
  for (const auto& raw : patterns) {
    auto source = trim(raw);
    if (source.empty()) continue;
    Compiled c;
    if (source.rfind("re:", 0) == 0) {
      c.is_regex = true;
      try {
        c.regex = std::make_shared<const std::regex>(
            source.substr(3), std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
      } catch (const std::regex_error& e) {
        throw ValidationError("pattern set '" + name_ + "': bad regex '" + source + "': " + e.what());
      }
    } else {
      c.needle = normalize_for_match(source);
    }
    sources_.push_back(std::move(source));
    compiled_.push_back(std::move(c));
  }
  if (compiled_.empty()) throw ValidationError("pattern set '" + name_ + "' has no patterns");
}

PatternSet PatternSet::load(std::string name, std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return PatternSet(std::move(name), lines);
}

PatternSet PatternSet::load_file(std::string name, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pattern file '" + path + "'");
  return load(std::move(name), in);
}

PatternSet PatternSet::parse(std::string name, std::string_view text) {
  std::istringstream in{std::string(text)};
  return load(std::move(name), in);
}

PatternSet PatternSet::builtin_not_trained() {
  return parse("not_trained", builtin_not_trained_patterns());
}

PatternSet PatternSet::builtin_human_request() {
  return parse("human_request", builtin_human_request_patterns());
}

bool PatternSet::matches(std::string_view text) const {
  if (text.empty()) return false;
  const auto norm = normalize_for_match(text);
  for (const auto& c : compiled_) {
    if (c.is_regex) {
      if (std::regex_search(norm, *c.regex)) return true;
    } else if (norm.find(c.needle) != std::string::npos) {
      return true;
    }
  }
  return false;
}

PatternSet PatternSet::extended(const std::vector<std::string>& extra) const {
  auto all = sources_;
  all.insert(all.end(), extra.begin(), extra.end());
  return PatternSet(name_, all);
}

bool match_not_trained(std::string_view agent_text, const PatternSet& ps) {
  return ps.matches(agent_text);
}

bool match_human_request(std::string_view customer_text, const PatternSet& ps) {
  return ps.matches(customer_text);
}

bool is_unigram(std::string_view customer_text) { return tokenize(customer_text).size() == 1; }

bool is_long(std::string_view customer_text, std::size_t min_tokens) {
  if (min_tokens < 1) throw ConfigError("min_tokens must be >= 1");
  return tokenize(customer_text).size() >= min_tokens;
}

void DetectorConfig::validate() const {
  auto unit = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " must be in [0,1]");
  };
  unit(similarity_threshold, "similarity threshold");
  unit(positive_threshold, "positive filter threshold");
  unit(neg_sent_threshold, "negative sentiment threshold");
  if (long_turn_tokens < 1) throw ConfigError("long-turn threshold must be >= 1");
}

void Resources::validate() const {
  if (!embeddings || embeddings->empty()) throw ConfigError("embedding store is not loaded");
  if (!affect) throw ConfigError("affect scorer is not configured");
  if (not_trained.size() == 0) throw ConfigError("not_trained pattern set is empty");
  if (human_request.size() == 0) throw ConfigError("human_request pattern set is empty");
  config.validate();
}

ConversationAnalysis analyze(const Conversation& conv, const Resources& res) {
  ConversationAnalysis out;
  out.turns.reserve(conv.turns.size());
  std::vector<TurnAffect> affects;
  affects.reserve(conv.turns.size());
  for (const auto& turn : conv.turns) {
    TurnSignals s;
    const auto tokens = tokenize(turn.customer_text);
    s.customer_tokens = tokens.size();
    s.customer_embedding = embed_sentence(tokens, *res.embeddings);
    s.agent_embedding = embed_text(turn.agent_text, *res.embeddings);
    s.affect = res.affect->score_turn(turn.customer_text);
    s.unigram = tokens.size() == 1;
    s.long_turn = tokens.size() >= res.config.long_turn_tokens;
    s.positive = s.affect.pos_score >= res.config.positive_threshold;
    s.human_request = res.human_request.matches(turn.customer_text);
    s.agent_not_trained = res.not_trained.matches(turn.agent_text);
    affects.push_back(s.affect);
    out.turns.push_back(std::move(s));
  }
  out.affect = aggregate_affect(std::move(affects));
  out.affect.per_turn.clear();
  return out;
}

std::vector<RephrasePair> detect_customer_rephrases(const ConversationAnalysis& analysis,
                                                    double threshold) {
  std::vector<RephrasePair> pairs;
  const auto& t = analysis.turns;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (t[i].unigram || t[i + 1].unigram || t[i].positive || t[i + 1].positive) continue;
    const double sim = cosine_similarity(t[i].customer_embedding, t[i + 1].customer_embedding);
    if (sim >= threshold) pairs.push_back({i, i + 1, sim});
  }
  return pairs;
}

std::vector<RephrasePair> detect_customer_rephrases(const Conversation& conv, const Resources& res) {
  return detect_customer_rephrases(analyze(conv, res), res.config.similarity_threshold);
}

std::vector<AgentRepeat> detect_agent_repeats(const ConversationAnalysis& analysis,
                                              double threshold) {
  std::vector<AgentRepeat> repeats;
  const auto& t = analysis.turns;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      const double sim = cosine_similarity(t[i].agent_embedding, t[j].agent_embedding);
      if (sim >= threshold) repeats.push_back({i, j, sim});
    }
  }
  return repeats;
}

std::vector<AgentRepeat> detect_agent_repeats(const Conversation& conv, const Resources& res) {
  return detect_agent_repeats(analyze(conv, res), res.config.similarity_threshold);
}

}  // namespace egr
