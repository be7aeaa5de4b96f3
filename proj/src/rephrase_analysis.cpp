#include "egr/rephrase_analysis.hpp"

#include <iomanip>
#include <sstream>

#include "egr/error.hpp"
#include "egr/parallel.hpp"

namespace egr {

std::string_view to_string(Motivation m) {
  switch (m) {
    case Motivation::NluError: return "nlu_error";
    case Motivation::LgLimitation: return "lg_limitation";
    case Motivation::UnsupportedIntent: return "unsupported_intent";
  }
  return "lg_limitation";
}

Motivation parse_motivation(std::string_view text) {
  for (auto m : kMotivations) {
    if (to_string(m) == text) return m;
  }
  throw ValidationError("unknown motivation '" + std::string(text) + "'");
}

RephraseMotivation classify_motivation(const Conversation& conv, const RephrasePair& pair,
                                       const EmbeddingStore& store, const PatternSet& not_trained,
                                       double threshold) {
  if (pair.first_turn_index >= conv.size() || pair.second_turn_index >= conv.size()) {
    throw ValidationError("rephrase pair index out of range");
  }
  const auto& turn = conv.turns[pair.first_turn_index];
  RephraseMotivation out{pair, Motivation::LgLimitation};
  if (not_trained.matches(turn.agent_text)) {
    out.motivation = Motivation::UnsupportedIntent;
  } else {
    const double sim = cosine_similarity(embed_text(turn.customer_text, store),
                                         embed_text(turn.agent_text, store));
    out.motivation = sim < threshold ? Motivation::NluError : Motivation::LgLimitation;
  }
  return out;
}

std::vector<RephraseMotivation> analyze_rephrases(const Conversation& conv, const Resources& res) {
  std::vector<RephraseMotivation> out;
  for (const auto& p : detect_customer_rephrases(conv, res)) {
    out.push_back(classify_motivation(conv, p, *res.embeddings, res.not_trained,
                                      res.config.similarity_threshold));
  }
  return out;
}

std::array<double, 3> MotivationCounts::percentages() const {
  std::array<double, 3> pct{};
  const auto n = total();
  if (n == 0) return pct;
  for (std::size_t i = 0; i < 3; ++i) pct[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(n);
  return pct;
}

MotivationDistribution motivation_distribution(std::span<const Conversation> convs,
                                               std::span<const Label> labels, const Resources& res,
                                               std::size_t jobs) {
  if (convs.size() != labels.size()) throw DimensionError("conversation and label counts differ");
  std::vector<std::vector<RephraseMotivation>> per(convs.size());
  parallel_for(convs.size(), jobs, [&](std::size_t i) { per[i] = analyze_rephrases(convs[i], res); });
  MotivationDistribution d;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    auto& c = is_egregious(labels[i]) ? d.egregious : d.non_egregious;
    for (const auto& r : per[i]) ++c[r.motivation];
  }
  return d;
}

MotivationDistribution motivation_distribution(std::span<const LabeledConversation> corpus,
                                               const Resources& res, std::size_t jobs) {
  std::vector<Conversation> convs;
  std::vector<Label> labels;
  for (const auto& lc : corpus) {
    convs.push_back(lc.conversation);
    labels.push_back(lc.label);
  }
  return motivation_distribution(convs, labels, res, jobs);
}

std::string format_motivation_table(const MotivationDistribution& d) {
  std::ostringstream s;
  s << std::left << std::setw(20) << "motivation" << std::right << std::setw(12) << "egregious"
    << std::setw(16) << "non-egregious" << '\n';
  const auto pe = d.egregious.percentages();
  const auto pn = d.non_egregious.percentages();
  auto cell = [](const MotivationCounts& c, double pct) {
    std::ostringstream o;
    if (c.empty()) o << "-";
    else o << std::fixed << std::setprecision(1) << pct << '%';
    return o.str();
  };
  for (std::size_t i = 0; i < 3; ++i) {
    s << std::left << std::setw(20) << to_string(kMotivations[i]) << std::right << std::setw(12)
      << cell(d.egregious, pe[i]) << std::setw(16) << cell(d.non_egregious, pn[i]) << '\n';
  }
  s << std::left << std::setw(20) << "pairs" << std::right << std::setw(12) << d.egregious.total()
    << std::setw(16) << d.non_egregious.total() << '\n';
  if (d.egregious.empty()) s << "egregious class: no rephrase pairs\n";
  if (d.non_egregious.empty()) s << "non-egregious class: no rephrase pairs\n";
  return s.str();
}

}  // namespace egr
