#include "egr/features.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "egr/error.hpp"
#include "egr/parallel.hpp"

namespace egr {

std::size_t group_dimension(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::Agent: return 2;
    case FeatureGroup::AgentCustomer: return 10;
    case FeatureGroup::All: return kFeatureCount;
  }
  return kFeatureCount;
}

std::string_view to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::Agent: return "agent";
    case FeatureGroup::AgentCustomer: return "agent+customer";
    case FeatureGroup::All: return "all";
  }
  return "all";
}

FeatureGroup parse_feature_group(std::string_view text) {
  if (text == "agent") return FeatureGroup::Agent;
  if (text == "agent+customer" || text == "+customer") return FeatureGroup::AgentCustomer;
  if (text == "all" || text == "+interaction" || text == "agent+customer+interaction") {
    return FeatureGroup::All;
  }
  throw ConfigError("unknown feature group '" + std::string(text) + "'");
}

NormalizationStats::NormalizationStats(std::size_t min_length, std::size_t max_length)
    : range_(std::make_pair(min_length, max_length)) {
  if (min_length > max_length) throw ValidationError("normalization min exceeds max");
}

std::size_t NormalizationStats::min_length() const {
  if (!range_) throw ConfigError("normalization stats are not fitted");
  return range_->first;
}

std::size_t NormalizationStats::max_length() const {
  if (!range_) throw ConfigError("normalization stats are not fitted");
  return range_->second;
}

double NormalizationStats::normalize_length(std::size_t turns) const {
  if (!range_) throw ConfigError("normalization stats are not fitted");
  const auto [lo, hi] = *range_;
  if (lo == hi) return 0.5;
  const double x = (static_cast<double>(turns) - static_cast<double>(lo)) /
                   static_cast<double>(hi - lo);
  return std::clamp(x, 0.0, 1.0);
}

NormalizationStats fit_normalizer_lengths(std::span<const std::size_t> lengths) {
  if (lengths.empty()) throw ValidationError("cannot fit normalizer on an empty training set");
  const auto [lo, hi] = std::minmax_element(lengths.begin(), lengths.end());
  return NormalizationStats(*lo, *hi);
}

NormalizationStats fit_normalizer(std::span<const Conversation> train) {
  std::vector<std::size_t> lengths;
  lengths.reserve(train.size());
  for (const auto& c : train) lengths.push_back(c.size());
  return fit_normalizer_lengths(lengths);
}

AgentFeatures agent_features(const ConversationAnalysis& analysis, const DetectorConfig&) {
  AgentFeatures f;
  const auto& t = analysis.turns;
  if (t.empty()) return f;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      f.agnt_rpt = std::max(f.agnt_rpt, cosine_similarity(t[i].agent_embedding, t[j].agent_embedding));
    }
  }
  const auto not_trained = std::count_if(t.begin(), t.end(),
                                         [](const TurnSignals& s) { return s.agent_not_trained; });
  f.n_agnt_not_trnd = static_cast<double>(not_trained) / static_cast<double>(t.size());
  return f;
}

CustomerFeatures customer_features(const ConversationAnalysis& analysis,
                                   const DetectorConfig& cfg) {
  CustomerFeatures f;
  const auto& t = analysis.turns;
  if (t.empty()) return f;
  const auto n = t.size();

  // Mean pairwise similarity inside every 3-turn window.
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const double s01 = cosine_similarity(t[i].customer_embedding, t[i + 1].customer_embedding);
    const double s02 = cosine_similarity(t[i].customer_embedding, t[i + 2].customer_embedding);
    const double s12 = cosine_similarity(t[i + 1].customer_embedding, t[i + 2].customer_embedding);
    f.max3_rphrs = std::max(f.max3_rphrs, (s01 + s02 + s12) / 3.0);
  }

  const auto pairs = detect_customer_rephrases(analysis, cfg.similarity_threshold);
  f.n_rphrs = std::min(1.0, static_cast<double>(pairs.size()) /
                                static_cast<double>(std::max<std::size_t>(1, n - 1)));

  f.max_neg_emo = analysis.affect.max_neg_emo;
  f.neg_sent = analysis.affect.avg_neg_sent;
  f.diff_neg_sent = analysis.affect.diff_neg_sent;

  if (!pairs.empty()) {
    std::size_t high = 0;
    for (const auto& p : pairs) {
      const double mean = 0.5 * (t[p.first_turn_index].affect.neg_sent +
                                 t[p.second_turn_index].affect.neg_sent);
      high += mean >= cfg.neg_sent_threshold ? 1 : 0;
    }
    f.rphrs_and_neg_sent = static_cast<double>(high) / static_cast<double>(pairs.size());
  }

  std::size_t one_word = 0;
  for (const auto& s : t) {
    if (s.human_request) f.hmn_agt_and_neg_sent = std::max(f.hmn_agt_and_neg_sent, s.affect.neg_sent);
    one_word += s.unigram ? 1 : 0;
  }
  f.n_one_word = static_cast<double>(one_word) / static_cast<double>(n);
  return f;
}

InteractionFeatures interaction_features(const ConversationAnalysis& analysis,
                                         const DetectorConfig& cfg,
                                         const NormalizationStats& stats) {
  InteractionFeatures f;
  const auto& t = analysis.turns;
  const auto n = t.size();
  f.conv_len = stats.normalize_length(n);
  if (n == 0) return f;

  std::size_t long_not_trained = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!t[i].agent_not_trained) continue;
    f.neg_sent_and_not_trnd = std::max(f.neg_sent_and_not_trnd, t[i].affect.neg_sent);
    if (t[i].human_request) f.hmn_agt_and_not_trnd = 1.0;
    long_not_trained += t[i].long_turn ? 1 : 0;
    if (i + 1 < n) {
      f.rphrs_and_not_trnd = std::max(
          f.rphrs_and_not_trnd, cosine_similarity(t[i].customer_embedding, t[i + 1].customer_embedding));
    }
  }
  f.lng_sntns_and_not_trnd = static_cast<double>(long_not_trained) / static_cast<double>(n);

  const auto pairs = detect_customer_rephrases(analysis, cfg.similarity_threshold);
  if (!pairs.empty()) {
    f.rphrs_and_smlr = 1.0;
    for (const auto& p : pairs) {
      const auto& first = t[p.first_turn_index];
      f.rphrs_and_smlr =
          std::min(f.rphrs_and_smlr, cosine_similarity(first.customer_embedding, first.agent_embedding));
    }
  }
  return f;
}

AgentFeatures agent_features(const Conversation& conv, const Resources& res) {
  return agent_features(analyze(conv, res), res.config);
}

CustomerFeatures customer_features(const Conversation& conv, const Resources& res) {
  return customer_features(analyze(conv, res), res.config);
}

InteractionFeatures interaction_features(const Conversation& conv, const Resources& res,
                                         const NormalizationStats& stats) {
  return interaction_features(analyze(conv, res), res.config, stats);
}

RawFeatures extract_raw(const Conversation& conv, const Resources& res) {
  const auto analysis = analyze(conv, res);
  const auto a = agent_features(analysis, res.config);
  const auto c = customer_features(analysis, res.config);
  // conv_len is filled in by finalize(); a degenerate range keeps this call cheap.
  const auto i = interaction_features(analysis, res.config, NormalizationStats(0, 0));

  RawFeatures raw;
  raw.total_turns = conv.size();
  auto& v = raw.values;
  v[Feature::AgntRpt] = a.agnt_rpt;
  v[Feature::NAgntNotTrnd] = a.n_agnt_not_trnd;
  v[Feature::Max3Rphrs] = c.max3_rphrs;
  v[Feature::NRphrs] = c.n_rphrs;
  v[Feature::MaxNegEmo] = c.max_neg_emo;
  v[Feature::NegSent] = c.neg_sent;
  v[Feature::DiffNegSent] = c.diff_neg_sent;
  v[Feature::RphrsAndNegSent] = c.rphrs_and_neg_sent;
  v[Feature::HmnAgtAndNegSent] = c.hmn_agt_and_neg_sent;
  v[Feature::NOneWord] = c.n_one_word;
  v[Feature::NegSentAndNotTrnd] = i.neg_sent_and_not_trnd;
  v[Feature::HmnAgtAndNotTrnd] = i.hmn_agt_and_not_trnd;
  v[Feature::LngSntnsAndNotTrnd] = i.lng_sntns_and_not_trnd;
  v[Feature::RphrsAndSmlr] = i.rphrs_and_smlr;
  v[Feature::RphrsAndNotTrnd] = i.rphrs_and_not_trnd;
  v[Feature::ConvLen] = 0.0;
  return raw;
}

FeatureVector finalize(const RawFeatures& raw, const NormalizationStats& stats) {
  FeatureVector v = raw.values;
  v[Feature::ConvLen] = stats.normalize_length(raw.total_turns);
  return v;
}

FeatureVector extract(const Conversation& conv, const Resources& res,
                      const NormalizationStats& stats) {
  if (!stats.fitted()) throw ConfigError("normalization stats are not fitted");
  return finalize(extract_raw(conv, res), stats);
}

std::vector<RawFeatures> featurize_corpus(std::span<const Conversation> convs,
                                          const Resources& res, std::size_t jobs) {
  std::vector<RawFeatures> out(convs.size());
  parallel_for(convs.size(), jobs, [&](std::size_t i) { out[i] = extract_raw(convs[i], res); });
  return out;
}

void write_feature_file(std::ostream& out, std::span<const FeatureRecord> records) {
  out << "conversation_id";
  for (auto name : kFeatureNames) out << '\t' << name;
  out << "\tlabel\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.conversation_id;
    for (double v : r.features.values) out << '\t' << v;
    out << '\t' << (r.label ? to_string(*r.label) : std::string_view("-")) << '\n';
  }
}

std::vector<FeatureRecord> read_feature_file(std::istream& in) {
  std::vector<FeatureRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("conversation_id", 0) == 0) continue;
    std::istringstream fields(line);
    FeatureRecord r;
    if (!(fields >> r.conversation_id)) throw ParseError(line_no, "missing conversation id");
    for (auto& v : r.features.values) {
      std::string tok;
      if (!(fields >> tok)) throw ParseError(line_no, "expected 16 feature values");
      try {
        v = std::stod(tok);
      } catch (const std::exception&) {
        throw ParseError(line_no, "bad feature value '" + tok + "'");
      }
      if (!(v >= 0.0 && v <= 1.0)) throw ParseError(line_no, "feature value outside [0,1]");
    }
    std::string label;
    if (fields >> label && label != "-") {
      try {
        r.label = parse_label(label);
      } catch (const ValidationError& e) {
        throw ParseError(line_no, e.what());
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace egr
