#pragma once

// Tokenization, averaged word-vector sentence embeddings and clamped cosine
// similarity.

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace egr {

/// Lowercases and splits on whitespace and punctuation. An apostrophe is a
/// boundary ("I'm" -> "i", "m"). Non-ASCII letters are kept inside tokens;
/// Unicode punctuation (general punctuation block, Latin-1 symbols, CJK
/// punctuation) splits like ASCII punctuation.
std::vector<std::string> tokenize(std::string_view text);

class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension);

  /// Text format: one word per line followed by `dimension` reals. An
  /// optional first line "<vocab_size> <dimension>" is accepted.
  static EmbeddingStore load(std::istream& in);
  static EmbeddingStore load_file(const std::string& path);

  /// Adds or replaces a word (lowercased). Throws DimensionError on size
  /// mismatch.
  void add(std::string_view word, std::span<const double> vec);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return index_.size(); }
  bool empty() const noexcept { return index_.empty(); }

  /// Case-insensitive lookup; empty span when absent.
  std::span<const double> lookup(std::string_view word) const;
  bool contains(std::string_view word) const { return !lookup(word).empty(); }

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> words_;
  std::vector<double> data_;
};

struct SentenceEmbedding {
  std::vector<double> vector;
  std::size_t covered_tokens = 0;
  std::size_t total_tokens = 0;

  bool is_zero() const noexcept { return covered_tokens == 0; }
};

/// Mean of the in-vocabulary token vectors. Out-of-vocabulary tokens are
/// skipped; no coverage gives the zero vector.
SentenceEmbedding embed_sentence(std::span<const std::string> tokens, const EmbeddingStore& store);
SentenceEmbedding embed_text(std::string_view text, const EmbeddingStore& store);

/// Cosine in [0,1]: negative values clamp to 0 and a zero vector on either
/// side gives 0. Throws DimensionError when the sizes differ.
double cosine_similarity(const SentenceEmbedding& u, const SentenceEmbedding& v);
double cosine_similarity(std::span<const double> u, std::span<const double> v);

inline constexpr double kDefaultSimilarityThreshold = 0.8;

bool is_similar(std::string_view a, std::string_view b, const EmbeddingStore& store,
                double threshold = kDefaultSimilarityThreshold);

}  // namespace egr
