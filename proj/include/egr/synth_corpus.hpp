#pragma once

// Seeded synthetic corpora with planted failure signatures, power-law
// lengths and token-disjoint per-domain vocabularies.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egr/affect.hpp"
#include "egr/conversation.hpp"
#include "egr/detectors.hpp"
#include "egr/rephrase_analysis.hpp"
#include "egr/text_similarity.hpp"

namespace egr {

enum class Recipe {
  // egregious
  RephraseLoop,
  NotTrainedCascade,
  RepeatLoop,
  HumanRequestRejection,
  Mixed,
  // non-egregious
  Smooth,
  Clarify,
  BenignFallback,
  Venting,
  Handoff,
};

inline constexpr std::array<Recipe, 5> kEgregiousRecipes = {
    Recipe::RephraseLoop, Recipe::NotTrainedCascade, Recipe::RepeatLoop,
    Recipe::HumanRequestRejection, Recipe::Mixed};
inline constexpr std::array<Recipe, 5> kBenignRecipes = {
    Recipe::Smooth, Recipe::Clarify, Recipe::BenignFallback, Recipe::Venting, Recipe::Handoff};

std::string_view to_string(Recipe r);
Recipe parse_recipe(std::string_view text);
Label recipe_label(Recipe r);
/// Fewest turns the recipe needs; shorter targets are raised to this.
std::size_t recipe_min_length(Recipe r);

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t n_conversations = 1000;
  double egregious_rate = 0.086;
  double length_alpha = 1.6;
  std::size_t length_min = 2;
  std::size_t length_max = 60;
  std::string domain_tag = "A";
  /// "travel" or "software"; the two render to token-disjoint text.
  std::string vocabulary_id = "travel";
  /// Weights over kEgregiousRecipes.
  std::array<double, 5> recipe_mix{0.3, 0.2, 0.15, 0.15, 0.2};
  /// Weights over kBenignRecipes.
  std::array<double, 5> benign_mix{0.55, 0.2, 0.1, 0.1, 0.05};

  /// Throws ConfigError; length_min below 2 violates the minimum-turns rule.
  void validate() const;

  static GeneratorConfig domain_a(std::uint64_t seed = 1, std::size_t n = 2000);
  static GeneratorConfig domain_b(std::uint64_t seed = 2, std::size_t n = 500);
};

/// Small deterministic engine wrapper; independent of library distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n).
  std::size_t index(std::size_t n);
  /// Uniform in [0, 1).
  double uniform();
  bool chance(double p) { return uniform() < p; }
  std::size_t weighted(std::span<const double> weights);

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[index(v.size())];
  }

 private:
  std::mt19937_64 engine_;
};

/// Truncated discrete power law P(L) ~ L^-alpha on [length_min, length_max].
std::size_t sample_length(const GeneratorConfig& cfg, Rng& rng);

struct SynonymSet {
  std::vector<std::string> words;
};

/// Content concepts of a domain and how canonical words are rendered.
struct Vocabulary {
  std::string id;
  std::vector<SynonymSet> actions;
  std::vector<SynonymSet> objects;
  bool transformed = false;  // surface forms go through a token rewrite

  static Vocabulary travel();
  static Vocabulary software();
  static Vocabulary by_id(std::string_view id);

  /// Surface form of one canonical token.
  std::string render_token(std::string_view canonical) const;
  /// Renders a canonical space-separated phrase token by token.
  std::string render(std::string_view canonical) const;
};

/// Every canonical token a generated conversation can contain, for either
/// vocabulary (templates, concepts, lexicon and pattern phrases).
std::vector<std::string> canonical_tokens(const Vocabulary& vocab);

/// Deterministic embeddings for both vocabularies: synonyms of a concept are
/// near-parallel, function and affect words short and random.
std::shared_ptr<const EmbeddingStore> synthetic_embeddings(std::size_t dim = 50);
/// Built-in lexicon plus its rendering for the transformed vocabulary.
EmotionLexicon synthetic_lexicon();
/// Built-in patterns plus rendered literal phrases for the transformed
/// vocabulary; matches everything the generator plants in either domain.
PatternSet synthetic_not_trained();
PatternSet synthetic_human_request();
/// Everything the detectors need to process generated corpora.
Resources synthetic_resources(const DetectorConfig& cfg = {});

enum class EventType { Rephrase, NotTrained, AgentRepeat, NegativeEmotion, HumanRequest, Unigram };

std::string_view to_string(EventType t);

struct PlantedEvent {
  EventType type = EventType::Rephrase;
  std::size_t turn = 0;
  std::size_t other_turn = 0;  // first turn of a rephrase or repeat pair
};

struct PlantedRephrase {
  std::size_t first = 0;
  std::size_t second = 0;
  Motivation motivation = Motivation::LgLimitation;
};

struct GenerationTrace {
  std::string conversation_id;
  Recipe recipe = Recipe::Smooth;
  Label label = Label::NonEgregious;
  std::size_t length = 0;
  std::vector<PlantedEvent> events;
  std::vector<PlantedRephrase> rephrases;
};

struct GeneratedConversation {
  LabeledConversation conversation;
  GenerationTrace trace;
};

/// Builds one conversation of `target_len` turns (raised to the recipe's
/// minimum). `res` must be synthetic_resources(); it is used to reject
/// drafts that would blur the planted signals. Throws ConfigError when
/// target_len < 2.
GeneratedConversation generate_conversation(Recipe recipe, const Vocabulary& vocab,
                                            std::size_t target_len, Rng& rng,
                                            const Resources& res, std::string id = "c0",
                                            std::string domain_tag = {});

struct SyntheticCorpus {
  std::vector<LabeledConversation> conversations;
  std::vector<GenerationTrace> traces;
};

/// Exactly n_conversations, round(n * rate) of them egregious.
SyntheticCorpus generate_corpus(const GeneratorConfig& cfg);
SyntheticCorpus generate_corpus(const GeneratorConfig& cfg, const Resources& res);

/// JSON lines, one trace per conversation.
void write_traces(std::ostream& out, std::span<const GenerationTrace> traces);
std::vector<GenerationTrace> read_traces(std::istream& in);

/// Planted rephrase motivations per class, in the layout of
/// motivation_distribution.
MotivationDistribution planted_motivations(std::span<const GenerationTrace> traces);

}  // namespace egr
