#pragma once

// Cross-validation, per-class metrics, McNemar's test and cross-domain
// transfer.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "egr/classifiers.hpp"
#include "egr/conversation.hpp"
#include "egr/detectors.hpp"
#include "egr/features.hpp"

namespace egr {

/// A labeled corpus with its raw features computed once.
struct Dataset {
  std::vector<Conversation> conversations;
  std::vector<Label> labels;
  std::vector<RawFeatures> raw;

  std::size_t size() const noexcept { return conversations.size(); }
};

Dataset make_dataset(std::vector<Conversation> convs, std::vector<Label> labels,
                     const Resources& res, std::size_t jobs = 1);
Dataset make_dataset(std::span<const LabeledConversation> corpus, const Resources& res,
                     std::size_t jobs = 1);

enum class ModelKind { Rule, Text, Egr };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelSpec {
  ModelKind kind = ModelKind::Egr;
  FeatureGroup group = FeatureGroup::All;
  TrainConfig train;
  TextBaselineConfig text;

  /// "rule", "text", "egr" or "egr[agent]" style names for ablations.
  std::string name() const;
};

/// A model fitted on some subset of a dataset.
struct TrainedModel {
  ModelSpec spec;
  std::optional<EgrModel> egr;
  std::optional<TextModel> text;
};

TrainedModel fit_model(const Dataset& data, std::span<const std::size_t> train_idx,
                       const ModelSpec& spec);
std::vector<Prediction> predict_indices(const TrainedModel& model, const Dataset& data,
                                        std::span<const std::size_t> idx, const Resources& res);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Confusion confusion(std::span<const Label> y_true, std::span<const Label> y_pred,
                    Label positive = Label::Egregious);
Prf prf(const Confusion& c);
/// Zero denominators give 0. Throws DimensionError on unequal or empty input.
Prf prf(std::span<const Label> y_true, std::span<const Label> y_pred,
        Label positive = Label::Egregious);

struct EvalReport {
  std::string model;
  std::string fold;  // fold index or "aggregate"
  Confusion counts;  // egregious is the positive class
  Prf egregious;
  Prf non_egregious;
};

EvalReport make_report(std::string model, std::string fold, std::span<const Label> y_true,
                       std::span<const Label> y_pred);

/// Fold id per sample. Each class is shuffled by seed and dealt round-robin,
/// continuing the deal across classes. Throws ValidationError
/// "insufficient minority samples" when k exceeds the minority count.
std::vector<std::size_t> stratified_kfold(std::span<const Label> y, std::size_t k,
                                          std::uint64_t seed);
/// Unstratified variant: a seeded shuffle dealt round-robin.
std::vector<std::size_t> plain_kfold(std::size_t n, std::size_t k, std::uint64_t seed);

/// Regularized upper incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);
/// Survival function of the chi-square distribution.
double chi_square_sf(double x, double df);

struct McNemarResult {
  std::size_t discordant_b = 0;  // a right, b wrong
  std::size_t discordant_c = 0;  // a wrong, b right
  double statistic = 0.0;
  double p_value = 1.0;
  /// Two-sided exact binomial p-value, reported when b + c < 25.
  std::optional<double> exact_p_value;
  bool no_discordant_pairs = false;
};

McNemarResult mcnemar_counts(std::size_t b, std::size_t c);
McNemarResult mcnemar(std::span<const Label> pred_a, std::span<const Label> pred_b,
                      std::span<const Label> y_true);

struct CvResult {
  std::vector<EvalReport> folds;
  EvalReport aggregate;
  std::vector<Label> predictions;  // pooled, in sample order
  std::vector<double> margins;
  std::vector<std::size_t> fold_of;
};

struct CvOptions {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  bool stratified = true;
  std::size_t jobs = 1;
};

CvResult cross_validate(const Dataset& data, const ModelSpec& spec, const Resources& res,
                        const CvOptions& opts = {});
CvResult cross_validate(const Dataset& data, const ModelSpec& spec, const Resources& res,
                        std::span<const std::size_t> fold_of, std::size_t k, std::size_t jobs = 1);

struct CrossDomainResult {
  EvalReport report;
  std::vector<Label> predictions;
};

/// Fits on all of `train` and evaluates on all of `test`.
CrossDomainResult cross_domain_eval(const Dataset& train, const Dataset& test,
                                    const ModelSpec& spec, const Resources& res);

/// One line per model x fold x class.
void write_report_tsv(std::ostream& out, std::span<const EvalReport> reports);
/// Aligned table: one row per report, P/R/F for each class.
std::string format_report_table(std::span<const EvalReport> reports);

}  // namespace egr
