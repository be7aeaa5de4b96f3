#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "egr/affect.hpp"
#include "egr/conversation.hpp"
#include "egr/detectors.hpp"
#include "egr/synth_corpus.hpp"
#include "egr/text_similarity.hpp"

namespace egr::test {

inline Conversation make_conv(const std::vector<std::pair<std::string, std::string>>& turns,
                              std::string id = "c1", std::string tag = "") {
  Conversation c{std::move(id), std::move(tag), {}};
  for (std::size_t i = 0; i < turns.size(); ++i) c.turns.push_back({i, turns[i].first, turns[i].second});
  return c;
}

inline std::shared_ptr<const EmbeddingStore> make_store(
    const std::map<std::string, std::vector<double>>& words) {
  auto s = std::make_shared<EmbeddingStore>(words.begin()->second.size());
  for (const auto& [w, v] : words) s->add(w, v);
  return s;
}

inline EmotionLexicon make_lexicon(const std::map<std::string, std::map<std::string, double>>& entries) {
  EmotionLexicon lex;
  lex.entries = entries;
  lex.negative_set = EmotionLexicon::default_negative_set();
  lex.positive_set = EmotionLexicon::default_positive_set();
  return lex;
}

inline Resources make_resources(std::shared_ptr<const EmbeddingStore> store,
                                EmotionLexicon lex = EmotionLexicon::builtin()) {
  Resources r;
  r.embeddings = std::move(store);
  r.affect = std::make_shared<LexiconScorer>(std::move(lex));
  r.not_trained = PatternSet::builtin_not_trained();
  r.human_request = PatternSet::builtin_human_request();
  return r;
}

/// Built once; the synthetic embedding table takes a moment.
inline const Resources& synth_res() {
  static const Resources r = synthetic_resources();
  return r;
}

/// Hand-rolled input generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }
  std::size_t size(std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(eng_() % (hi - lo + 1)); }
  double real(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  bool coin(double p = 0.5) { return real(0, 1) < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[size(0, v.size() - 1)]; }

  Label label(double p_egregious = 0.5) { return coin(p_egregious) ? Label::Egregious : Label::NonEgregious; }
  std::vector<Label> labels(std::size_t n, double p = 0.5) {
    std::vector<Label> out(n);
    for (auto& l : out) l = label(p);
    return out;
  }
  std::vector<bool> bits(std::size_t n) {
    std::vector<bool> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = coin();
    return out;
  }
  std::vector<double> vec(std::size_t dim, double lo = -1, double hi = 1) {
    std::vector<double> v(dim);
    for (auto& x : v) x = real(lo, hi);
    return v;
  }

  std::string sentence(const std::vector<std::string>& pool, std::size_t lo, std::size_t hi) {
    const auto n = size(lo, hi);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += coin(0.1) ? ", " : " ";
      s += pick(pool);
    }
    if (coin(0.3)) s += coin() ? "?" : ".";
    return s;
  }

 private:
  std::mt19937_64 eng_;
};

/// Word pool for fuzzed conversations against the synthetic resources: both
/// domain vocabularies, OOV noise, affect words and the trigger phrases.
inline const std::vector<std::string>& fuzz_words() {
  static const std::vector<std::string> pool = [] {
    auto v = canonical_tokens(Vocabulary::travel());
    const auto b = canonical_tokens(Vocabulary::software());
    v.insert(v.end(), b.begin(), b.end());
    const auto soft = Vocabulary::software();
    for (std::size_t i = 0; i < b.size(); i += 7) v.push_back(soft.render_token(b[i]));
    for (const char* w : {"zzq", "qwxv", "héllo", "naïve", "42", "ok", "no", "yes", "thanks",
                          "pointless", "useless", "angry", "great", "awful", "!!!", "—", "..."}) {
      v.emplace_back(w);
    }
    return v;
  }();
  return pool;
}

inline const std::vector<std::string>& fuzz_phrases() {
  static const std::vector<std::string> p = {
      "I'm not trained on that yet, but I'm still learning.",
      "can i talk to a real live person?",
      "Are you a real person?",
      "I don't understand",
      "this service is pointless",
      "thanks",
      "",
  };
  return p;
}

inline Conversation fuzz_conversation(Gen& g, std::size_t max_turns = 12, std::string id = "f") {
  const auto n = g.size(1, max_turns);
  Conversation c{std::move(id), "F", {}};
  for (std::size_t i = 0; i < n; ++i) {
    std::string cust = g.coin(0.15) ? g.pick(fuzz_phrases()) : g.sentence(fuzz_words(), 1, 20);
    if (cust.find_first_not_of(" \t") == std::string::npos) cust = "hello";
    std::string agent = g.coin(0.2) ? g.pick(fuzz_phrases()) : g.sentence(fuzz_words(), 0, 15);
    // Repeats and rephrases need a chance to happen.
    if (i > 0 && g.coin(0.15)) cust = c.turns[i - 1].customer_text;
    if (i > 0 && g.coin(0.15)) agent = c.turns[g.size(0, i - 1)].agent_text;
    c.turns.push_back({i, cust, agent});
  }
  return c;
}

/// Five egregious turns: off-topic answers, a fallback and a request for a
/// human.
inline Conversation flight_ticket_transcript() {
  return make_conv({
      {"I got 2 quotes for the flight ticket, but i'm wondering what the details of each ticket are?",
       "Please select \"Buy\" next to the ticket you'd like to purchase."},
      {"No, I don't want to buy yet till I know the details of the flights.",
       "If you're in the process of renting a car, please continue with by clicking \"Next\""},
      {"Are you a real person?",
       "I am a digital assistant. I've been trained to answer questions about travels. Ask me any "
       "questions you have."},
      {"I asked a specific question and you gave me a random answer about car rental which I'm not "
       "interested in.",
       "I'm not trained on that yet, but I'm still learning. You may want to rephrase your question and "
       "try again."},
      {"This service is pointless , can i talk to a real live person?",
       "We don't currently have live agents to chat with online."},
  }, "fig");
}

// ---------------------------------------------------------------------------
// Oracles: deliberately naive re-implementations.

inline std::vector<double> oracle_embed(const std::vector<std::string>& tokens, const EmbeddingStore& store) {
  std::vector<double> sum(store.dimension(), 0.0);
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    const auto v = store.lookup(t);
    if (v.empty()) continue;
    ++hits;
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += v[d];
  }
  if (hits == 0) return sum;
  for (auto& x : sum) x /= static_cast<double>(hits);
  return sum;
}

inline double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return std::clamp(ab / std::sqrt(aa * bb), 0.0, 1.0);
}

inline double oracle_text_sim(const std::string& a, const std::string& b, const EmbeddingStore& s) {
  return oracle_cosine(oracle_embed(tokenize(a), s), oracle_embed(tokenize(b), s));
}

struct OracleRepeat {
  std::size_t i, j;
  double sim;
};

inline std::vector<OracleRepeat> oracle_agent_repeats(const Conversation& c, const EmbeddingStore& s,
                                                     double threshold) {
  std::vector<OracleRepeat> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const double sim = oracle_text_sim(c.turns[i].agent_text, c.turns[j].agent_text, s);
      if (sim >= threshold) out.push_back({i, j, sim});
    }
  }
  return out;
}

struct OraclePrf {
  double p, r, f;
};

inline OraclePrf oracle_prf(const std::vector<Label>& truth, const std::vector<Label>& pred, Label pos) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == pos, p = pred[i] == pos;
    if (t && p) tp += 1;
    if (!t && p) fp += 1;
    if (t && !p) fn += 1;
  }
  const double P = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double R = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return {P, R, P + R > 0 ? 2 * P * R / (P + R) : 0.0};
}

/// Kappa from the 2x2 agreement table.
inline double oracle_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  double t[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < a.size(); ++i) t[a[i]][b[i]] += 1;
  const double n = static_cast<double>(a.size());
  const double po = (t[0][0] + t[1][1]) / n;
  const double a1 = (t[1][0] + t[1][1]) / n, b1 = (t[0][1] + t[1][1]) / n;
  const double pe = a1 * b1 + (1 - a1) * (1 - b1);
  return (po - pe) / (1 - pe);
}

/// Chi-square(1) survival by Simpson integration of the density after the
/// substitution t = u^2, which removes the singularity at 0.
inline double oracle_chi2_sf_df1(double x) {
  if (x <= 0) return 1.0;
  const double hi = std::sqrt(x);
  const int n = 20000;
  const double h = hi / n;
  const double c = 2.0 / std::sqrt(2.0 * 3.14159265358979323846);
  auto f = [&](double u) { return c * std::exp(-u * u / 2.0); };
  double s = f(0) + f(hi);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
  return 1.0 - s * h / 3.0;
}

/// Same for general df by integrating the density directly on [x, x + 200],
/// with the t = u^2 substitution near zero handled by splitting at x.
inline double oracle_chi2_sf(double x, double df) {
  const double k = df / 2.0;
  const double norm = 1.0 / (std::pow(2.0, k) * std::tgamma(k));
  auto dens = [&](double t) { return t <= 0 ? 0.0 : norm * std::pow(t, k - 1) * std::exp(-t / 2.0); };
  const double hi = x + 400.0;
  const int n = 400000;
  const double h = (hi - x) / n;
  double s = dens(x) + dens(hi);
  for (int i = 1; i < n; ++i) s += dens(x + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3.0;
}

/// Exact two-sided binomial p-value for McNemar's b, c.
inline double oracle_binom_two_sided(std::size_t b, std::size_t c) {
  const std::size_t n = b + c, k = std::min(b, c);
  double tail = 0;
  for (std::size_t i = 0; i <= k; ++i) {
    tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0));
  }
  return std::min(1.0, 2 * tail);
}

}  // namespace egr::test
