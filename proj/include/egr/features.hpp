#pragma once

// The sixteen agent / customer / interaction features, each in [0,1].

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egr/conversation.hpp"
#include "egr/detectors.hpp"

namespace egr {

enum class Feature : std::size_t {
  // agent
  AgntRpt,
  NAgntNotTrnd,
  // customer
  Max3Rphrs,
  NRphrs,
  MaxNegEmo,
  NegSent,
  DiffNegSent,
  RphrsAndNegSent,
  HmnAgtAndNegSent,
  NOneWord,
  // interaction
  NegSentAndNotTrnd,
  HmnAgtAndNotTrnd,
  LngSntnsAndNotTrnd,
  RphrsAndSmlr,
  RphrsAndNotTrnd,
  ConvLen,
};

inline constexpr std::size_t kFeatureCount = 16;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "agnt_rpt",          "n_agnt_not_trnd",       "max3_rphrs",       "n_rphrs",
    "max_neg_emo",       "neg_sent",              "diff_neg_sent",    "rphrs_and_neg_sent",
    "hmn_agt_and_neg_sent", "n_one_word",         "neg_sent_and_not_trnd",
    "hmn_agt_and_not_trnd", "lng_sntns_and_not_trnd", "rphrs_and_smlr",
    "rphrs_and_not_trnd", "conv_len"};

/// Incremental feature groups: agent, agent + customer, all three.
enum class FeatureGroup { Agent, AgentCustomer, All };

std::size_t group_dimension(FeatureGroup group);
std::string_view to_string(FeatureGroup group);
FeatureGroup parse_feature_group(std::string_view text);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }

  /// Leading slice for a feature group; groups are prefixes of the full order.
  std::span<const double> project(FeatureGroup group) const {
    return std::span<const double>(values).first(group_dimension(group));
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Min/max conversation length seen in training; only conv_len uses it.
class NormalizationStats {
 public:
  NormalizationStats() = default;
  NormalizationStats(std::size_t min_length, std::size_t max_length);

  bool fitted() const noexcept { return range_.has_value(); }
  std::size_t min_length() const;
  std::size_t max_length() const;

  /// Min-max scaled and clamped to [0,1]; a degenerate range maps to 0.5.
  /// Throws ConfigError when unfitted.
  double normalize_length(std::size_t turns) const;

 private:
  std::optional<std::pair<std::size_t, std::size_t>> range_;
};

NormalizationStats fit_normalizer(std::span<const Conversation> train);
NormalizationStats fit_normalizer_lengths(std::span<const std::size_t> lengths);

struct AgentFeatures {
  double agnt_rpt = 0.0;
  double n_agnt_not_trnd = 0.0;
};

struct CustomerFeatures {
  double max3_rphrs = 0.0;
  double n_rphrs = 0.0;
  double max_neg_emo = 0.0;
  double neg_sent = 0.0;
  double diff_neg_sent = 0.0;
  double rphrs_and_neg_sent = 0.0;
  double hmn_agt_and_neg_sent = 0.0;
  double n_one_word = 0.0;
};

struct InteractionFeatures {
  double neg_sent_and_not_trnd = 0.0;
  double hmn_agt_and_not_trnd = 0.0;
  double lng_sntns_and_not_trnd = 0.0;
  double rphrs_and_smlr = 1.0;
  double rphrs_and_not_trnd = 0.0;
  double conv_len = 0.0;
};

AgentFeatures agent_features(const ConversationAnalysis& analysis, const DetectorConfig& cfg);
CustomerFeatures customer_features(const ConversationAnalysis& analysis, const DetectorConfig& cfg);
InteractionFeatures interaction_features(const ConversationAnalysis& analysis,
                                         const DetectorConfig& cfg,
                                         const NormalizationStats& stats);

AgentFeatures agent_features(const Conversation& conv, const Resources& res);
CustomerFeatures customer_features(const Conversation& conv, const Resources& res);
InteractionFeatures interaction_features(const Conversation& conv, const Resources& res,
                                         const NormalizationStats& stats);

/// Every feature except conv_len, which needs corpus statistics. Lets a
/// corpus be featurized once and re-normalized per training split.
struct RawFeatures {
  FeatureVector values;  // conv_len left at 0
  std::size_t total_turns = 0;
};

RawFeatures extract_raw(const Conversation& conv, const Resources& res);
FeatureVector finalize(const RawFeatures& raw, const NormalizationStats& stats);

/// Throws ConfigError when `stats` is unfitted.
FeatureVector extract(const Conversation& conv, const Resources& res,
                      const NormalizationStats& stats);

/// Output order matches input order for any `jobs` value.
std::vector<RawFeatures> featurize_corpus(std::span<const Conversation> convs,
                                          const Resources& res, std::size_t jobs = 1);

/// Featurized corpus file: a header line, then per conversation the id, the
/// sixteen values in field order and an optional label, tab-separated.
struct FeatureRecord {
  std::string conversation_id;
  FeatureVector features;
  std::optional<Label> label;
};

void write_feature_file(std::ostream& out, std::span<const FeatureRecord> records);
std::vector<FeatureRecord> read_feature_file(std::istream& in);

}  // namespace egr
