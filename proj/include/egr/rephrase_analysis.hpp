#pragma once

// Why did the customer rephrase? Unsupported intent, NLU error or
// language-generation limitation.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egr/conversation.hpp"
#include "egr/detectors.hpp"

namespace egr {

enum class Motivation { NluError, LgLimitation, UnsupportedIntent };

inline constexpr std::array<Motivation, 3> kMotivations = {
    Motivation::NluError, Motivation::LgLimitation, Motivation::UnsupportedIntent};

std::string_view to_string(Motivation m);
Motivation parse_motivation(std::string_view text);

struct RephraseMotivation {
  RephrasePair pair;
  Motivation motivation = Motivation::LgLimitation;
};

/// Looks at the agent response to the pair's first customer turn: a
/// not-trained reply means an unsupported intent; otherwise a response
/// dissimilar to the customer turn (< threshold) is an NLU error and a
/// similar one an LG limitation. Throws ValidationError on bad indices.
RephraseMotivation classify_motivation(const Conversation& conv, const RephrasePair& pair,
                                       const EmbeddingStore& store, const PatternSet& not_trained,
                                       double threshold = kDefaultSimilarityThreshold);

/// All rephrase pairs of a conversation with their motivations.
std::vector<RephraseMotivation> analyze_rephrases(const Conversation& conv, const Resources& res);

struct MotivationCounts {
  std::array<std::size_t, 3> counts{};  // indexed like kMotivations

  std::size_t total() const noexcept { return counts[0] + counts[1] + counts[2]; }
  bool empty() const noexcept { return total() == 0; }
  /// Percentages summing to 100; all zero when empty.
  std::array<double, 3> percentages() const;
  std::size_t& operator[](Motivation m) { return counts[static_cast<std::size_t>(m)]; }
  std::size_t operator[](Motivation m) const { return counts[static_cast<std::size_t>(m)]; }
};

struct MotivationDistribution {
  MotivationCounts egregious;
  MotivationCounts non_egregious;

  const MotivationCounts& of(Label l) const { return is_egregious(l) ? egregious : non_egregious; }
};

MotivationDistribution motivation_distribution(std::span<const Conversation> convs,
                                               std::span<const Label> labels, const Resources& res,
                                               std::size_t jobs = 1);
MotivationDistribution motivation_distribution(std::span<const LabeledConversation> corpus,
                                               const Resources& res, std::size_t jobs = 1);

/// Rows are motivations, columns the two classes; empty classes are marked.
std::string format_motivation_table(const MotivationDistribution& d);

}  // namespace egr
