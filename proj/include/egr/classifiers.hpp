#pragma once

// Linear SVM (EGR), rule-based baseline and TF-IDF n-gram text baseline.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "egr/conversation.hpp"
#include "egr/detectors.hpp"
#include "egr/features.hpp"

namespace egr {

/// Margin > 0 means egregious.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t dimension() const noexcept { return weights.size(); }
};

struct SparseVector {
  std::vector<std::uint32_t> indices;  // ascending
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }
  static SparseVector from_dense(std::span<const double> dense);
};

enum class ClassWeighting { None, Balanced };

struct TrainConfig {
  /// C in the usual SVM form; the per-sample regularizer is 1 / (C n).
  double regularization_strength = 1.0;
  std::size_t epochs = 100;
  /// eta_t = learning_rate / (1 + decay * learning_rate * lambda * t)
  double learning_rate = 0.5;
  double decay = 1.0;
  ClassWeighting class_weighting = ClassWeighting::Balanced;
  std::uint64_t seed = 0;

  void validate() const;
};

std::string_view to_string(ClassWeighting w);
ClassWeighting parse_class_weighting(std::string_view text);

/// Loss weights for (non-egregious, egregious). Balanced weights are
/// n / (2 n_class).
std::pair<double, double> class_weights(std::span<const Label> y, ClassWeighting weighting);

/// L2-regularized hinge loss minimized by seeded stochastic subgradient
/// descent with iterate averaging. Throws DegenerateLabelsError for a single
/// class and DimensionError for ragged input.
LinearModel train_svm(std::span<const std::vector<double>> x, std::span<const Label> y,
                      const TrainConfig& cfg);
LinearModel train_svm_sparse(std::span<const SparseVector> x, std::size_t dimension,
                             std::span<const Label> y, const TrainConfig& cfg);

/// J(w, b) = lambda/2 |w|^2 + (1/n) sum_i c_i max(0, 1 - y_i (w.x_i + b)),
/// lambda = 1 / (C n): the objective the trainer minimizes.
double svm_objective(const LinearModel& model, std::span<const std::vector<double>> x,
                     std::span<const Label> y, const TrainConfig& cfg);
/// Subgradient of svm_objective (exact gradient away from margin == 1).
LinearModel svm_subgradient(const LinearModel& model, std::span<const std::vector<double>> x,
                            std::span<const Label> y, const TrainConfig& cfg);

struct Prediction {
  Label label = Label::NonEgregious;
  double margin = 0.0;
};

/// Ties at margin 0 are non-egregious.
Prediction predict(const LinearModel& model, std::span<const double> x);
Prediction predict(const LinearModel& model, const SparseVector& x);

/// Egregious iff some agent turn is "not trained" or some customer turn asks
/// for a human.
Label rule_based_predict(const Conversation& conv, const PatternSet& not_trained,
                         const PatternSet& human_request);

/// Trained EGR classifier with the corpus statistics it was fitted with.
struct EgrModel {
  LinearModel linear;
  NormalizationStats stats;
  FeatureGroup group = FeatureGroup::All;

  Prediction predict(const FeatureVector& features) const;
};

struct TextBaselineConfig {
  std::size_t max_ngram = 2;
  std::size_t min_document_frequency = 1;
};

/// Word n-gram TF-IDF vectors (L2-normalized) over all customer and agent
/// text, classified by the same linear SVM.
class TextModel {
 public:
  TextModel() = default;

  static TextModel train(std::span<const Conversation> convs, std::span<const Label> y,
                         const TrainConfig& cfg, const TextBaselineConfig& text_cfg = {});

  /// Unknown n-grams are ignored.
  SparseVector vectorize(const Conversation& conv) const;
  Prediction predict(const Conversation& conv) const;

  const std::vector<std::string>& vocabulary() const noexcept { return terms_; }
  const std::vector<double>& idf() const noexcept { return idf_; }
  const LinearModel& linear() const noexcept { return linear_; }
  std::size_t max_ngram() const noexcept { return max_ngram_; }

  static TextModel from_parts(std::vector<std::string> terms, std::vector<double> idf,
                              LinearModel linear, std::size_t max_ngram);

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<double> idf_;
  LinearModel linear_;
  std::size_t max_ngram_ = 2;
};

/// All customer and agent text of a conversation, in turn order.
std::string conversation_text(const Conversation& conv);
/// Word 1..max_ngram grams of the tokenized text; n-grams joined by a space.
std::vector<std::string> extract_ngrams(std::string_view text, std::size_t max_ngram);

TextModel train_text_baseline(std::span<const Conversation> convs, std::span<const Label> y,
                              const TrainConfig& cfg);

/// Versioned JSON model files.
using AnyModel = std::variant<EgrModel, TextModel>;
void save_model(std::ostream& out, const AnyModel& model);
void save_model_file(const std::string& path, const AnyModel& model);
AnyModel load_model(std::istream& in);
AnyModel load_model_file(const std::string& path);

}  // namespace egr
