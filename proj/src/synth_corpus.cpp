#include "egr/synth_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <iomanip>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "egr/error.hpp"
#include "egr/resources.hpp"
#include "json.hpp"

namespace egr {

namespace {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Canonical templates. {a} and {o} are action and object slots.

const std::vector<std::string> kAskTemplates = {
    "i want to {a} my {o}",       "can you {a} my {o}",          "i need to {a} the {o}",
    "how do i {a} my {o}",        "please {a} my {o}",           "i would like to {a} my {o}",
    "is it possible to {a} the {o}", "could you {a} the {o} for me",
};

const std::vector<std::string> kRephraseTemplates = {
    "i said {a} my {o}",   "no i want to {a} my {o}",   "again how do i {a} the {o}",
    "{a} {o}",             "let me try again {a} my {o}", "i just need to {a} my {o}",
    "i asked how to {a} the {o}",
};

const std::vector<std::string> kAnswerTemplates = {
    "sure i can {a} your {o} right now", "okay i will {a} your {o} for you",
    "to {a} your {o} just follow these steps", "no problem your {o} is ready to {a}",
    "here is how to {a} the {o}",
};

const std::vector<std::string> kFallbacks = {
    "i am sorry i am not trained on that yet",
    "sorry i am still learning and cannot answer that",
    "i do not understand could you try rephrasing",
    "i am not sure i understand what you mean",
    "that is outside of what i can do for now",
    "i cannot help with that request",
};

// Literal cores of the fallbacks and human requests; the transformed
// vocabulary gets these as substring patterns.
const std::vector<std::string> kNotTrainedCores = {
    "not trained", "still learning", "try rephrasing",
    "not sure i understand", "outside of what i can", "cannot help with that",
};
const std::vector<std::string> kHumanRequestCores = {"real person", "human", "representative",
                                                     "live agent"};

const std::vector<std::string> kHumanRequests = {
    "i want to talk to a real person", "can i speak to a human", "connect me to a representative",
    "get me a human", "i need a live agent",
};
const std::vector<std::string> kPoliteHumanRequests = {
    "could i speak to a human about this", "i would prefer a live agent for this one",
    "can a representative call me",
};

const std::vector<std::string> kHandoffs = {
    "let me transfer you to a colleague now",
    "one moment while i connect you with our team",
};

const std::vector<std::string> kNegativeTails = {
    "this is useless",         "so frustrating",          "this is ridiculous",
    "you are useless",         "this is so annoying",     "seriously this is pointless",
    "what a terrible bot",     "this is unacceptable",    "i hate this",
};
const std::vector<std::string> kMildNegativeOpeners = {
    "i am a bit worried", "unfortunately", "i am nervous about it", "i am concerned",
};

const std::vector<std::string> kGreetings = {"hi", "hello"};
const std::string kGreetingReply = "hello how can i help you today";
const std::string kHelpUnigram = "help";
const std::string kHelpReply = "what can i do for you";
const std::string kHumanUnigram = "representative";

const std::vector<std::string> kClosings = {
    "thanks that was helpful", "great thank you", "thank you so much", "perfect thanks",
};
const std::vector<std::string> kClosingReplies = {
    "you are welcome have a nice day", "glad i could help", "happy to help anytime",
};

std::vector<std::string> all_template_strings() {
  std::vector<std::string> out;
  for (const auto* list : {&kAskTemplates, &kRephraseTemplates, &kAnswerTemplates, &kFallbacks,
                           &kNotTrainedCores, &kHumanRequestCores, &kHumanRequests,
                           &kPoliteHumanRequests, &kHandoffs, &kNegativeTails,
                           &kMildNegativeOpeners, &kGreetings, &kClosings, &kClosingReplies}) {
    out.insert(out.end(), list->begin(), list->end());
  }
  for (const auto* s : {&kGreetingReply, &kHelpUnigram, &kHelpReply, &kHumanUnigram}) out.push_back(*s);
  return out;
}

std::string fill_slots(std::string_view tmpl, std::string_view action, std::string_view object) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 3, "{a}") == 0) {
      out += action;
      i += 3;
    } else if (tmpl.compare(i, 3, "{o}") == 0) {
      out += object;
      i += 3;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

std::vector<std::string> template_tokens(std::string_view tmpl) {
  return tokenize(fill_slots(tmpl, " ", " "));
}

// ---------------------------------------------------------------------------
// Token rewrite for the transformed vocabulary.

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

std::string pig_latin(std::string_view w) {
  if (w.empty()) return {};
  if (is_vowel(w[0])) return std::string(w) + "way";
  std::size_t k = 0;
  while (k < w.size() && !is_vowel(w[k]) && !(k > 0 && w[k] == 'y')) ++k;
  return std::string(w.substr(k)) + std::string(w.substr(0, k)) + "ay";
}

struct RewriteTable {
  std::set<std::string> plain_universe;
  std::map<std::string, std::string> rewrite;
};

const RewriteTable& rewrite_table() {
  static const RewriteTable table = [] {
    RewriteTable t;
    for (const auto& w : canonical_tokens(Vocabulary::travel())) t.plain_universe.insert(w);
    std::set<std::string> used;
    for (const auto& w : canonical_tokens(Vocabulary::software())) {
      std::string r = pig_latin(w);
      while (t.plain_universe.count(r) || used.count(r)) r += 'x';
      used.insert(r);
      t.rewrite.emplace(w, r);
    }
    return t;
  }();
  return table;
}

// FNV-1a, so vectors do not depend on std::hash.
std::uint64_t fnv1a(std::string_view s, std::uint64_t salt) {
  std::uint64_t h = 1469598103934665603ULL ^ salt;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<double> gaussian_unit(std::uint64_t seed, std::size_t dim) {
  Rng rng(seed);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    // Box-Muller on the engine's own uniforms.
    const double u1 = std::max(rng.uniform(), 1e-300);
    const double u2 = rng.uniform();
    x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

constexpr double kSynonymNoise = 0.3;
constexpr double kFunctionNorm = 0.3;

void add_vocabulary_vectors(EmbeddingStore& store, const Vocabulary& vocab, std::size_t dim) {
  std::set<std::string> content;
  auto add_concepts = [&](const std::vector<SynonymSet>& concepts, std::string_view kind) {
    for (std::size_t c = 0; c < concepts.size(); ++c) {
      const auto base = gaussian_unit(fnv1a(vocab.id + std::string(kind) + std::to_string(c), 7), dim);
      for (const auto& w : concepts[c].words) {
        const auto noise = gaussian_unit(fnv1a(vocab.id + w, 11), dim);
        std::vector<double> v(dim);
        double norm = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          v[d] = base[d] + kSynonymNoise * noise[d];
          norm += v[d] * v[d];
        }
        for (auto& x : v) x /= std::sqrt(norm);
        store.add(vocab.render_token(w), v);
        content.insert(w);
      }
    }
  };
  add_concepts(vocab.actions, "action");
  add_concepts(vocab.objects, "object");
  for (const auto& w : canonical_tokens(vocab)) {
    if (content.count(w)) continue;
    auto v = gaussian_unit(fnv1a(w, 3), dim);
    for (auto& x : v) x *= kFunctionNorm;
    store.add(vocab.render_token(w), v);
  }
}

// ---------------------------------------------------------------------------
// Conversation construction.

struct Intent {
  std::size_t action = 0;
  std::size_t object = 0;
  friend bool operator<(const Intent& a, const Intent& b) {
    return std::tie(a.action, a.object) < std::tie(b.action, b.object);
  }
  friend bool operator==(const Intent&, const Intent&) = default;
};

constexpr double kRephraseFloor = 0.86;     // planted rephrases stay above this
constexpr double kDistinctCeiling = 0.7;    // unplanted neighbours stay below this
constexpr double kAnswerFloor = 0.86;       // on-topic answers
constexpr int kMaxDraws = 40;

class Builder {
 public:
  Builder(const Vocabulary& vocab, Rng& rng, const Resources& res)
      : vocab_(vocab), rng_(rng), res_(res) {}

  std::vector<Turn> turns;
  std::vector<PlantedEvent> events;
  std::vector<PlantedRephrase> rephrases;

  std::size_t size() const { return turns.size(); }

  double sim(std::string_view a, std::string_view b) const {
    return cosine_similarity(embed_text(a, *res_.embeddings), embed_text(b, *res_.embeddings));
  }

  std::string render(std::string_view canonical) const { return vocab_.render(canonical); }

  std::string pick_render(const std::vector<std::string>& list) { return render(rng_.pick(list)); }

  std::string phrase(const Intent& in, const std::vector<std::string>& templates) {
    const auto& a = vocab_.actions[in.action].words;
    const auto& o = vocab_.objects[in.object].words;
    return render(fill_slots(rng_.pick(templates), rng_.pick(a), rng_.pick(o)));
  }

  Intent fresh_intent() {
    for (int draw = 0;; ++draw) {
      Intent in{rng_.index(vocab_.actions.size()), rng_.index(vocab_.objects.size())};
      const bool clash = last_intent_ && (in.action == last_intent_->action || in.object == last_intent_->object);
      if ((!used_.count(in) && !clash) || draw > 200) {
        used_.insert(in);
        last_intent_ = in;
        return in;
      }
    }
  }

  Intent other_intent(const Intent& avoid) {
    for (;;) {
      Intent in{rng_.index(vocab_.actions.size()), rng_.index(vocab_.objects.size())};
      if (in.action != avoid.action && in.object != avoid.object) return in;
    }
  }

  std::string prev_customer() const { return turns.empty() ? std::string() : turns.back().customer_text; }

  // A customer turn on a new topic, kept dissimilar from the previous turn.
  std::string distinct_ask(const Intent& in, const std::string& prefix = {}) {
    std::string best;
    for (int draw = 0; draw < kMaxDraws; ++draw) {
      best = prefix.empty() ? phrase(in, kAskTemplates) : prefix + " " + phrase(in, kAskTemplates);
      if (turns.empty() || sim(best, prev_customer()) < kDistinctCeiling) break;
    }
    return best;
  }

  // A rephrase of `previous` for the same intent.
  std::string rephrase_of(const Intent& in, const std::string& previous, const std::string& tail) {
    for (int draw = 0; draw < kMaxDraws; ++draw) {
      auto text = phrase(in, rng_.chance(0.5) ? kRephraseTemplates : kAskTemplates);
      if (!tail.empty()) text += " " + tail;
      if (text != previous && sim(text, previous) >= kRephraseFloor) return text;
    }
    return tail.empty() ? previous : previous + " " + tail;
  }

  std::string on_topic_answer(const Intent& in, const std::string& customer) {
    std::string text;
    for (int draw = 0; draw < kMaxDraws; ++draw) {
      text = phrase(in, kAnswerTemplates);
      if (sim(text, customer) >= kAnswerFloor) break;
    }
    return text;
  }

  std::string off_topic_answer(const Intent& in, const std::string& customer) {
    std::string text;
    for (int draw = 0; draw < kMaxDraws; ++draw) {
      text = phrase(other_intent(in), kAnswerTemplates);
      if (sim(text, customer) < kDistinctCeiling) break;
    }
    return text;
  }

  std::string fallback() { return pick_render(kFallbacks); }
  std::string negative_tail() { return render(rng_.pick(kNegativeTails)); }

  std::size_t push(std::string customer, std::string agent) {
    turns.push_back({turns.size(), std::move(customer), std::move(agent)});
    return turns.size() - 1;
  }

  void event(EventType t, std::size_t turn, std::size_t other = 0) { events.push_back({t, turn, other}); }

  // Agent reply for the first turn of a rephrase pair, chosen by motivation.
  std::string reply_for(Motivation m, const Intent& in, const std::string& customer) {
    switch (m) {
      case Motivation::UnsupportedIntent: return fallback();
      case Motivation::NluError: return off_topic_answer(in, customer);
      case Motivation::LgLimitation: return on_topic_answer(in, customer);
    }
    return fallback();
  }

  void plant_rephrase(std::size_t first, Motivation m) {
    rephrases.push_back({first, first + 1, m});
    event(EventType::Rephrase, first + 1, first);
  }

  void note_agent(std::size_t turn) {
    if (res_.not_trained.matches(turns[turn].agent_text)) event(EventType::NotTrained, turn);
  }

  void note_customer(std::size_t turn) {
    const auto& text = turns[turn].customer_text;
    if (res_.human_request.matches(text)) event(EventType::HumanRequest, turn);
    if (res_.affect->score_turn(text).neg_sent >= res_.config.neg_sent_threshold) {
      event(EventType::NegativeEmotion, turn);
    }
    if (tokenize(text).size() == 1) event(EventType::Unigram, turn);
  }

  void smooth_exchange() {
    const auto in = fresh_intent();
    auto c = distinct_ask(in);
    auto a = on_topic_answer(in, c);
    push(std::move(c), std::move(a));
  }

  void greeting() { push(pick_render(kGreetings), render(kGreetingReply)); }

  void pad(std::size_t n, bool allow_greeting) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == 0 && allow_greeting && n >= 2 && rng_.chance(0.3)) greeting();
      else smooth_exchange();
    }
  }

  void closing() { push(pick_render(kClosings), pick_render(kClosingReplies)); }

  Rng& rng() { return rng_; }
  const Resources& res() const { return res_; }

 private:
  const Vocabulary& vocab_;
  Rng& rng_;
  const Resources& res_;
  std::set<Intent> used_;
  std::optional<Intent> last_intent_;
};

Motivation random_motivation(Rng& rng, double p_nlu) {
  return rng.chance(p_nlu) ? Motivation::NluError : Motivation::LgLimitation;
}

std::size_t room(std::size_t target, std::size_t core) { return target > core ? target - core : 0; }

// Same-intent chain of customer turns; agent reply per turn chosen by
// `reply_motivation(k)`. Negative tails go on turns listed in `negative`.
template <typename ReplyFn>
void chain(Builder& b, std::size_t m, const std::vector<bool>& negative, ReplyFn reply_motivation) {
  const auto in = b.fresh_intent();
  std::string prev;
  for (std::size_t k = 0; k < m; ++k) {
    const std::string tail = negative[k] ? b.negative_tail() : std::string();
    std::string c;
    if (k == 0) {
      c = b.distinct_ask(in);
      if (!tail.empty()) c += " " + tail;
    } else {
      c = b.rephrase_of(in, prev, tail);
    }
    const auto m_k = reply_motivation(k);
    const auto idx = b.push(c, b.reply_for(m_k, in, c));
    if (k + 1 < m) b.plant_rephrase(idx, m_k);
    prev = c;
  }
}

std::vector<bool> negative_plan(Rng& rng, std::size_t m, double p, std::size_t from = 1) {
  std::vector<bool> neg(m, false);
  if (!rng.chance(p)) return neg;
  const auto start = std::min(m - 1, std::max(from, m - 1 - rng.index(2)));
  for (std::size_t k = start; k < m; ++k) neg[k] = true;
  return neg;
}

void recipe_rephrase_loop(Builder& b, std::size_t target) {
  auto& rng = b.rng();
  const std::size_t m = target >= 6 && rng.chance(0.5) ? 4 : 3;
  const bool help = target >= m + 2 && rng.chance(0.35);
  b.pad(room(target, m + (help ? 1 : 0)), true);
  const auto neg = negative_plan(rng, m, 1.0);
  std::vector<Motivation> mot(m);
  for (auto& x : mot) x = random_motivation(rng, 0.55);
  chain(b, m, neg, [&](std::size_t k) { return mot[k]; });
  if (help) b.push(b.render(kHelpUnigram), b.render(kHelpReply));
}

void recipe_not_trained_cascade(Builder& b, std::size_t target) {
  auto& rng = b.rng();
  const std::size_t m = target >= 4 && rng.chance(0.5) ? 3 : 2;
  const bool extra = target >= m + 1 && (m == 2 || rng.chance(0.4));
  b.pad(room(target, m + (extra ? 1 : 0)), true);
  const auto neg = negative_plan(rng, m, 0.8);
  chain(b, m, neg, [&](std::size_t k) {
    if (m == 3 && k == 2 && rng.chance(0.3)) return Motivation::NluError;
    return Motivation::UnsupportedIntent;
  });
  if (extra) {
    const auto in = b.fresh_intent();
    auto c = b.distinct_ask(in);
    if (rng.chance(0.5)) c += " " + b.negative_tail();
    b.push(c, b.fallback());
  }
}

void recipe_repeat_loop(Builder& b, std::size_t target) {
  auto& rng = b.rng();
  const std::size_t m = target >= 4 && rng.chance(0.5) ? 3 : 2;
  const bool same_intent = rng.chance(0.5);
  b.pad(room(target, same_intent ? m : 3), true);
  const auto neg = negative_plan(rng, same_intent ? m : 3, 1.0);
  std::string canned;
  if (same_intent) {
    const auto in = b.fresh_intent();
    std::string prev;
    std::size_t first = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::string tail = neg[k] ? b.negative_tail() : std::string();
      std::string c = k == 0 ? b.distinct_ask(in) : b.rephrase_of(in, prev, tail);
      if (k == 0 && !tail.empty()) c += " " + tail;
      if (k == 0) canned = b.off_topic_answer(in, c);
      const auto idx = b.push(c, canned);
      if (k == 0) first = idx;
      else b.event(EventType::AgentRepeat, idx, first);
      if (k + 1 < m) b.plant_rephrase(idx, Motivation::NluError);
      prev = c;
    }
  } else {
    std::size_t first = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto in = b.fresh_intent();
      std::string c = b.distinct_ask(in);
      if (neg[k]) c += " " + b.negative_tail();
      if (k == 0) canned = b.off_topic_answer(in, c);
      const auto idx = b.push(c, canned);
      if (k == 0) first = idx;
      else b.event(EventType::AgentRepeat, idx, first);
    }
  }
}

void recipe_human_request_rejection(Builder& b, std::size_t target) {
  auto& rng = b.rng();
  const bool unigram = target >= 4 && rng.chance(0.6);
  b.pad(room(target, unigram ? 3 : 2), true);
  const auto in = b.fresh_intent();
  auto c = b.distinct_ask(in);
  b.push(c, rng.chance(0.5) ? b.fallback() : b.off_topic_answer(in, c));
  auto request = b.pick_render(kHumanRequests);
  const bool neg_on_request = rng.chance(0.5);
  if (neg_on_request) request += " " + b.negative_tail();
  b.push(request, b.fallback());
  if (unigram) b.push(b.render(kHumanUnigram), b.fallback());
  else if (!neg_on_request && rng.chance(0.6)) b.turns.back().customer_text += " " + b.negative_tail();
}

void recipe_mixed(Builder& b, std::size_t target) {
  auto& rng = b.rng();
  b.pad(room(target, 4), true);
  const auto in = b.fresh_intent();
  auto c0 = b.distinct_ask(in);
  const auto i0 = b.push(c0, b.off_topic_answer(in, c0));
  auto c1 = b.rephrase_of(in, c0, rng.chance(0.5) ? b.negative_tail() : std::string());
  b.plant_rephrase(i0, Motivation::NluError);
  b.push(c1, b.fallback());
  b.push(b.pick_render(kHumanRequests) + " " + b.negative_tail(), b.fallback());
  b.push(b.render(kHumanUnigram), b.fallback());
}

void recipe_smooth(Builder& b, std::size_t target) {
  const bool close = target >= 2 && b.rng().chance(0.85);
  b.pad(room(target, close ? 1 : 0), true);
  if (close) b.closing();
}

void recipe_clarify(Builder& b, std::size_t target) {
  auto& rng = b.rng();
  b.pad(room(target, 3), true);
  const auto m0 = random_motivation(rng, 0.4);
  chain(b, 2, {false, false}, [&](std::size_t k) { return k == 0 ? m0 : Motivation::LgLimitation; });
  b.closing();
}

void recipe_benign_fallback(Builder& b, std::size_t target) {
  b.pad(room(target, 3), true);
  chain(b, 2, {false, false},
        [&](std::size_t k) { return k == 0 ? Motivation::UnsupportedIntent : Motivation::LgLimitation; });
  b.closing();
}

void recipe_venting(Builder& b, std::size_t target) {
  const std::size_t before = b.rng().index(room(target, 2) + 1);
  b.pad(before, true);
  const auto in = b.fresh_intent();
  auto c = b.distinct_ask(in, b.pick_render(kMildNegativeOpeners));
  auto a = b.on_topic_answer(in, c);
  b.push(std::move(c), std::move(a));
  b.pad(room(target, before + 2), false);
  b.closing();
}

void recipe_handoff(Builder& b, std::size_t target) {
  b.pad(room(target, 1), true);
  b.push(b.pick_render(kPoliteHumanRequests), b.pick_render(kHandoffs));
}

void build(Recipe r, Builder& b, std::size_t target) {
  switch (r) {
    case Recipe::RephraseLoop: recipe_rephrase_loop(b, target); break;
    case Recipe::NotTrainedCascade: recipe_not_trained_cascade(b, target); break;
    case Recipe::RepeatLoop: recipe_repeat_loop(b, target); break;
    case Recipe::HumanRequestRejection: recipe_human_request_rejection(b, target); break;
    case Recipe::Mixed: recipe_mixed(b, target); break;
    case Recipe::Smooth: recipe_smooth(b, target); break;
    case Recipe::Clarify: recipe_clarify(b, target); break;
    case Recipe::BenignFallback: recipe_benign_fallback(b, target); break;
    case Recipe::Venting: recipe_venting(b, target); break;
    case Recipe::Handoff: recipe_handoff(b, target); break;
  }
}

// Detectors must recover exactly what was planted.
bool consistent(const Conversation& conv, const GenerationTrace& trace, const Resources& res) {
  const auto analysis = analyze(conv, res);
  const auto pairs = detect_customer_rephrases(analysis, res.config.similarity_threshold);
  if (pairs.size() != trace.rephrases.size()) return false;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = trace.rephrases[i];
    if (pairs[i].first_turn_index != p.first || pairs[i].second_turn_index != p.second) return false;
    const auto m = classify_motivation(conv, pairs[i], *res.embeddings, res.not_trained,
                                       res.config.similarity_threshold);
    if (m.motivation != p.motivation) return false;
  }
  std::set<std::size_t> nt, hr;
  for (const auto& e : trace.events) {
    if (e.type == EventType::NotTrained) nt.insert(e.turn);
    if (e.type == EventType::HumanRequest) hr.insert(e.turn);
    if (e.type == EventType::AgentRepeat &&
        cosine_similarity(analysis.turns[e.turn].agent_embedding,
                          analysis.turns[e.other_turn].agent_embedding) < res.config.similarity_threshold) {
      return false;
    }
  }
  for (std::size_t i = 0; i < conv.size(); ++i) {
    if (analysis.turns[i].agent_not_trained != (nt.count(i) > 0)) return false;
    if (analysis.turns[i].human_request != (hr.count(i) > 0)) return false;
  }
  const bool egregious = is_egregious(trace.label);
  const bool rule_fires = !nt.empty() || !hr.empty();
  if (!egregious && (trace.recipe == Recipe::Smooth || trace.recipe == Recipe::Clarify ||
                     trace.recipe == Recipe::Venting) && rule_fires) {
    return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Recipe r) {
  switch (r) {
    case Recipe::RephraseLoop: return "rephrase_loop";
    case Recipe::NotTrainedCascade: return "not_trained_cascade";
    case Recipe::RepeatLoop: return "repeat_loop";
    case Recipe::HumanRequestRejection: return "human_request_rejection";
    case Recipe::Mixed: return "mixed";
    case Recipe::Smooth: return "smooth";
    case Recipe::Clarify: return "clarify";
    case Recipe::BenignFallback: return "benign_fallback";
    case Recipe::Venting: return "venting";
    case Recipe::Handoff: return "handoff";
  }
  return "smooth";
}

Recipe parse_recipe(std::string_view text) {
  for (auto r : kEgregiousRecipes) if (to_string(r) == text) return r;
  for (auto r : kBenignRecipes) if (to_string(r) == text) return r;
  throw ValidationError("unknown recipe '" + std::string(text) + "'");
}

Label recipe_label(Recipe r) {
  return std::find(kEgregiousRecipes.begin(), kEgregiousRecipes.end(), r) != kEgregiousRecipes.end()
             ? Label::Egregious
             : Label::NonEgregious;
}

std::size_t recipe_min_length(Recipe r) {
  switch (r) {
    case Recipe::RephraseLoop: return 3;
    case Recipe::NotTrainedCascade: return 3;
    case Recipe::RepeatLoop: return 3;
    case Recipe::HumanRequestRejection: return 3;
    case Recipe::Mixed: return 4;
    case Recipe::Smooth: return 2;
    case Recipe::Clarify: return 3;
    case Recipe::BenignFallback: return 3;
    case Recipe::Venting: return 2;
    case Recipe::Handoff: return 2;
  }
  return 2;
}

void GeneratorConfig::validate() const {
  if (n_conversations < 1) throw ConfigError("n_conversations must be positive");
  if (!(egregious_rate > 0.0 && egregious_rate < 1.0)) throw ConfigError("egregious_rate must be in (0,1)");
  if (!(length_alpha > 1.0)) throw ConfigError("length_alpha must be > 1");
  if (length_min < 2) {
    throw ConfigError("length_min must be >= 2: conversations shorter than 2 turns are filtered out");
  }
  if (length_max < length_min) throw ConfigError("length_max must be >= length_min");
  auto check_mix = [](const std::array<double, 5>& mix, const char* what) {
    double sum = 0.0;
    for (double w : mix) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError(std::string(what) + " weights must be non-negative");
      sum += w;
    }
    if (!(sum > 0.0)) throw ConfigError(std::string(what) + " weights must not all be zero");
  };
  check_mix(recipe_mix, "recipe_mix");
  check_mix(benign_mix, "benign_mix");
  Vocabulary::by_id(vocabulary_id);
}

GeneratorConfig GeneratorConfig::domain_a(std::uint64_t seed, std::size_t n) {
  GeneratorConfig c;
  c.seed = seed;
  c.n_conversations = n;
  return c;
}

GeneratorConfig GeneratorConfig::domain_b(std::uint64_t seed, std::size_t n) {
  GeneratorConfig c;
  c.seed = seed;
  c.n_conversations = n;
  c.length_alpha = 2.2;
  c.length_max = 30;
  c.domain_tag = "B";
  c.vocabulary_id = "software";
  return c;
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ConfigError("cannot draw from an empty range");
  return static_cast<std::size_t>(engine_() % n);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::weighted(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw ConfigError("weights sum to zero");
  double u = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

std::size_t sample_length(const GeneratorConfig& cfg, Rng& rng) {
  double total = 0.0;
  std::vector<double> cdf;
  for (std::size_t l = cfg.length_min; l <= cfg.length_max; ++l) {
    total += std::pow(static_cast<double>(l), -cfg.length_alpha);
    cdf.push_back(total);
  }
  const double u = rng.uniform() * total;
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
  return cfg.length_min + k;
}

Vocabulary Vocabulary::travel() {
  Vocabulary v;
  v.id = "travel";
  v.actions = {
      {{"change", "modify", "alter"}},  {{"cancel", "drop", "void"}},
      {{"book", "reserve", "arrange"}}, {{"check", "verify", "confirm"}},
      {{"add", "include", "attach"}},   {{"find", "locate", "track"}},
  };
  v.objects = {
      {{"flight", "trip", "journey"}},        {{"hotel", "room", "accommodation"}},
      {{"seat", "seating", "chair"}},         {{"baggage", "luggage", "suitcase"}},
      {{"car", "vehicle", "rental"}},         {{"meal", "food", "dinner"}},
      {{"pet", "dog", "cat"}},                {{"visa", "permit", "passport"}},
      {{"insurance", "coverage", "policy"}},  {{"miles", "points", "rewards"}},
      {{"ticket", "reservation", "booking"}}, {{"payment", "card", "charge"}},
      {{"refund", "reimbursement", "money"}}, {{"upgrade", "business", "premium"}},
      {{"wifi", "internet", "connection"}},   {{"lounge", "terminal", "gate"}},
  };
  return v;
}

Vocabulary Vocabulary::software() {
  Vocabulary v;
  v.id = "software";
  v.transformed = true;
  v.actions = {
      {{"install", "setup", "deploy"}},  {{"reset", "restore", "recover"}},
      {{"update", "patch", "refresh"}},  {{"remove", "delete", "uninstall"}},
      {{"sync", "backup", "export"}},    {{"configure", "adjust", "customize"}},
  };
  v.objects = {
      {{"password", "passcode", "credentials"}}, {{"app", "application", "program"}},
      {{"license", "subscription", "plan"}},     {{"printer", "scanner", "device"}},
      {{"email", "inbox", "mailbox"}},           {{"account", "profile", "login"}},
      {{"driver", "firmware", "module"}},        {{"database", "records", "data"}},
      {{"vpn", "network", "proxy"}},             {{"calendar", "agenda", "planner"}},
      {{"browser", "extension", "plugin"}},      {{"laptop", "computer", "desktop"}},
      {{"antivirus", "firewall", "security"}},   {{"keyboard", "mouse", "touchpad"}},
      {{"storage", "disk", "drive"}},            {{"screen", "monitor", "display"}},
  };
  return v;
}

Vocabulary Vocabulary::by_id(std::string_view id) {
  if (id == "travel") return travel();
  if (id == "software") return software();
  throw ConfigError("unknown vocabulary '" + std::string(id) + "' (expected travel or software)");
}

std::string Vocabulary::render_token(std::string_view canonical) const {
  if (!transformed) return std::string(canonical);
  const auto& table = rewrite_table();
  const auto it = table.rewrite.find(std::string(canonical));
  if (it != table.rewrite.end()) return it->second;
  std::string r = pig_latin(canonical);
  while (table.plain_universe.count(r)) r += 'x';
  return r;
}

std::string Vocabulary::render(std::string_view canonical) const {
  std::string out;
  for (const auto& tok : tokenize(canonical)) {
    if (!out.empty()) out += ' ';
    out += render_token(tok);
  }
  return out;
}

std::vector<std::string> canonical_tokens(const Vocabulary& vocab) {
  std::set<std::string> words;
  for (const auto& t : all_template_strings()) {
    for (auto& w : template_tokens(t)) words.insert(std::move(w));
  }
  for (const auto* concepts : {&vocab.actions, &vocab.objects}) {
    for (const auto& s : *concepts) words.insert(s.words.begin(), s.words.end());
  }
  for (const auto& [word, _] : EmotionLexicon::builtin().entries) words.insert(word);
  return {words.begin(), words.end()};
}

std::shared_ptr<const EmbeddingStore> synthetic_embeddings(std::size_t dim) {
  auto store = std::make_shared<EmbeddingStore>(dim);
  add_vocabulary_vectors(*store, Vocabulary::travel(), dim);
  add_vocabulary_vectors(*store, Vocabulary::software(), dim);
  return store;
}

EmotionLexicon synthetic_lexicon() {
  auto lex = EmotionLexicon::builtin();
  const auto b = Vocabulary::software();
  std::map<std::string, std::map<std::string, double>> extra;
  for (const auto& [word, emotions] : lex.entries) extra[b.render_token(word)] = emotions;
  lex.entries.insert(extra.begin(), extra.end());
  lex.validate();
  return lex;
}

PatternSet synthetic_not_trained() {
  const auto b = Vocabulary::software();
  std::vector<std::string> extra;
  for (const auto& p : kNotTrainedCores) extra.push_back(b.render(p));
  return PatternSet::builtin_not_trained().extended(extra);
}

PatternSet synthetic_human_request() {
  const auto b = Vocabulary::software();
  std::vector<std::string> extra;
  for (const auto& p : kHumanRequestCores) extra.push_back(b.render(p));
  return PatternSet::builtin_human_request().extended(extra);
}

Resources synthetic_resources(const DetectorConfig& cfg) {
  Resources r;
  r.embeddings = synthetic_embeddings();
  r.affect = std::make_shared<LexiconScorer>(synthetic_lexicon());
  r.not_trained = synthetic_not_trained();
  r.human_request = synthetic_human_request();
  r.config = cfg;
  r.validate();
  return r;
}

std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::Rephrase: return "rephrase";
    case EventType::NotTrained: return "not_trained";
    case EventType::AgentRepeat: return "agent_repeat";
    case EventType::NegativeEmotion: return "negative_emotion";
    case EventType::HumanRequest: return "human_request";
    case EventType::Unigram: return "unigram";
  }
  return "rephrase";
}

namespace {

EventType parse_event_type(std::string_view text) {
  for (auto t : {EventType::Rephrase, EventType::NotTrained, EventType::AgentRepeat,
                 EventType::NegativeEmotion, EventType::HumanRequest, EventType::Unigram}) {
    if (to_string(t) == text) return t;
  }
  throw ValidationError("unknown event type '" + std::string(text) + "'");
}

}  // namespace

GeneratedConversation generate_conversation(Recipe recipe, const Vocabulary& vocab,
                                            std::size_t target_len, Rng& rng,
                                            const Resources& res, std::string id,
                                            std::string domain_tag) {
  if (target_len < 2) throw ConfigError("target length must be >= 2");
  const auto target = std::max(target_len, recipe_min_length(recipe));
  constexpr int kMaxAttempts = 200;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Builder b(vocab, rng, res);
    build(recipe, b, target);
    for (std::size_t i = 0; i < b.size(); ++i) {
      b.note_agent(i);
      b.note_customer(i);
    }
    GeneratedConversation out;
    auto& conv = out.conversation.conversation;
    conv.id = id;
    conv.domain_tag = domain_tag;
    conv.turns = std::move(b.turns);
    out.conversation.label = recipe_label(recipe);
    auto& trace = out.trace;
    trace.conversation_id = id;
    trace.recipe = recipe;
    trace.label = out.conversation.label;
    trace.length = conv.size();
    trace.events = std::move(b.events);
    std::sort(trace.events.begin(), trace.events.end(), [](const PlantedEvent& x, const PlantedEvent& y) {
      return std::tie(x.turn, x.type, x.other_turn) < std::tie(y.turn, y.type, y.other_turn);
    });
    trace.rephrases = std::move(b.rephrases);
    if (consistent(conv, trace, res)) return out;
  }
  throw Error("could not generate a consistent '" + std::string(to_string(recipe)) + "' conversation");
}

SyntheticCorpus generate_corpus(const GeneratorConfig& cfg) {
  return generate_corpus(cfg, synthetic_resources());
}

SyntheticCorpus generate_corpus(const GeneratorConfig& cfg, const Resources& res) {
  cfg.validate();
  const auto vocab = Vocabulary::by_id(cfg.vocabulary_id);
  Rng rng(cfg.seed);
  const auto n = cfg.n_conversations;
  const auto n_egr = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.egregious_rate));
  std::vector<bool> egregious(n, false);
  std::fill(egregious.begin(), egregious.begin() + static_cast<std::ptrdiff_t>(std::min(n_egr, n)), true);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = rng.index(i);
    const bool tmp = egregious[i - 1];
    egregious[i - 1] = egregious[j];
    egregious[j] = tmp;
  }

  SyntheticCorpus out;
  out.conversations.reserve(n);
  out.traces.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto recipe = egregious[i] ? kEgregiousRecipes[rng.weighted(cfg.recipe_mix)]
                                     : kBenignRecipes[rng.weighted(cfg.benign_mix)];
    const auto len = sample_length(cfg, rng);
    std::ostringstream id;
    id << cfg.domain_tag << '-' << std::setw(5) << std::setfill('0') << i;
    auto g = generate_conversation(recipe, vocab, len, rng, res, id.str(), cfg.domain_tag);
    out.conversations.push_back(std::move(g.conversation));
    out.traces.push_back(std::move(g.trace));
  }
  return out;
}

void write_traces(std::ostream& out, std::span<const GenerationTrace> traces) {
  for (const auto& t : traces) {
    json j;
    j["conversation_id"] = t.conversation_id;
    j["recipe"] = std::string(to_string(t.recipe));
    j["label"] = std::string(to_string(t.label));
    j["length"] = t.length;
    json events = json::array();
    for (const auto& e : t.events) {
      json je{{"type", std::string(to_string(e.type))}, {"turn", e.turn}};
      if (e.type == EventType::Rephrase || e.type == EventType::AgentRepeat) je["other_turn"] = e.other_turn;
      events.push_back(std::move(je));
    }
    j["events"] = std::move(events);
    json reph = json::array();
    for (const auto& r : t.rephrases) {
      reph.push_back({{"first", r.first}, {"second", r.second},
                      {"motivation", std::string(to_string(r.motivation))}});
    }
    j["rephrases"] = std::move(reph);
    out << j.dump() << '\n';
  }
}

std::vector<GenerationTrace> read_traces(std::istream& in) {
  std::vector<GenerationTrace> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      GenerationTrace t;
      t.conversation_id = j.at("conversation_id").get<std::string>();
      t.recipe = parse_recipe(j.at("recipe").get<std::string>());
      t.label = parse_label(j.at("label").get<std::string>());
      t.length = j.at("length").get<std::size_t>();
      for (const auto& je : j.at("events")) {
        PlantedEvent e;
        e.type = parse_event_type(je.at("type").get<std::string>());
        e.turn = je.at("turn").get<std::size_t>();
        if (je.contains("other_turn")) e.other_turn = je.at("other_turn").get<std::size_t>();
        if (e.turn >= t.length || e.other_turn >= t.length) throw ValidationError("event turn out of range");
        t.events.push_back(e);
      }
      for (const auto& jr : j.at("rephrases")) {
        t.rephrases.push_back({jr.at("first").get<std::size_t>(), jr.at("second").get<std::size_t>(),
                               parse_motivation(jr.at("motivation").get<std::string>())});
      }
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

MotivationDistribution planted_motivations(std::span<const GenerationTrace> traces) {
  MotivationDistribution d;
  for (const auto& t : traces) {
    auto& c = is_egregious(t.label) ? d.egregious : d.non_egregious;
    for (const auto& r : t.rephrases) ++c[r.motivation];
  }
  return d;
}

}  // namespace egr
