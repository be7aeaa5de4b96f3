#include "egr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "egr/error.hpp"
#include "egr/parallel.hpp"

namespace egr {

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

std::vector<Label> labels_at(const Dataset& data, std::span<const std::size_t> idx) {
  std::vector<Label> y;
  y.reserve(idx.size());
  for (auto i : idx) y.push_back(data.labels[i]);
  return y;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3) << v;
  return s.str();
}

// ln of the binomial pmf at p = 1/2.
double log_half_binom(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1) - static_cast<double>(n) * std::log(2.0);
}

}  // namespace

Dataset make_dataset(std::vector<Conversation> convs, std::vector<Label> labels,
                     const Resources& res, std::size_t jobs) {
  if (convs.size() != labels.size()) {
    throw DimensionError("conversation and label counts differ");
  }
  Dataset d;
  d.raw = featurize_corpus(convs, res, jobs);
  d.conversations = std::move(convs);
  d.labels = std::move(labels);
  return d;
}

Dataset make_dataset(std::span<const LabeledConversation> corpus, const Resources& res,
                     std::size_t jobs) {
  std::vector<Conversation> convs;
  std::vector<Label> labels;
  convs.reserve(corpus.size());
  labels.reserve(corpus.size());
  for (const auto& lc : corpus) {
    convs.push_back(lc.conversation);
    labels.push_back(lc.label);
  }
  return make_dataset(std::move(convs), std::move(labels), res, jobs);
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Rule: return "rule";
    case ModelKind::Text: return "text";
    case ModelKind::Egr: return "egr";
  }
  return "egr";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "rule") return ModelKind::Rule;
  if (text == "text") return ModelKind::Text;
  if (text == "egr") return ModelKind::Egr;
  throw ConfigError("unknown model '" + std::string(text) + "' (expected rule, text or egr)");
}

std::string ModelSpec::name() const {
  std::string n(to_string(kind));
  if (kind == ModelKind::Egr && group != FeatureGroup::All) {
    n += '[';
    n += to_string(group);
    n += ']';
  }
  return n;
}

TrainedModel fit_model(const Dataset& data, std::span<const std::size_t> train_idx,
                       const ModelSpec& spec) {
  TrainedModel m;
  m.spec = spec;
  switch (spec.kind) {
    case ModelKind::Rule:
      break;
    case ModelKind::Text: {
      std::vector<Conversation> convs;
      convs.reserve(train_idx.size());
      for (auto i : train_idx) convs.push_back(data.conversations[i]);
      const auto y = labels_at(data, train_idx);
      m.text = TextModel::train(convs, y, spec.train, spec.text);
      break;
    }
    case ModelKind::Egr: {
      std::vector<std::size_t> lengths;
      lengths.reserve(train_idx.size());
      for (auto i : train_idx) lengths.push_back(data.raw[i].total_turns);
      EgrModel egr;
      egr.group = spec.group;
      egr.stats = fit_normalizer_lengths(lengths);
      std::vector<std::vector<double>> x;
      x.reserve(train_idx.size());
      for (auto i : train_idx) {
        const auto fv = finalize(data.raw[i], egr.stats);
        const auto p = fv.project(spec.group);
        x.emplace_back(p.begin(), p.end());
      }
      const auto y = labels_at(data, train_idx);
      egr.linear = train_svm(x, y, spec.train);
      m.egr = std::move(egr);
      break;
    }
  }
  return m;
}

std::vector<Prediction> predict_indices(const TrainedModel& model, const Dataset& data,
                                        std::span<const std::size_t> idx, const Resources& res) {
  std::vector<Prediction> out;
  out.reserve(idx.size());
  for (auto i : idx) {
    switch (model.spec.kind) {
      case ModelKind::Rule: {
        const auto l = rule_based_predict(data.conversations[i], res.not_trained, res.human_request);
        out.push_back({l, is_egregious(l) ? 1.0 : -1.0});
        break;
      }
      case ModelKind::Text:
        out.push_back(model.text->predict(data.conversations[i]));
        break;
      case ModelKind::Egr:
        out.push_back(model.egr->predict(finalize(data.raw[i], model.egr->stats)));
        break;
    }
  }
  return out;
}

Confusion confusion(std::span<const Label> y_true, std::span<const Label> y_pred, Label positive) {
  if (y_true.size() != y_pred.size()) throw DimensionError("label vectors differ in length");
  if (y_true.empty()) throw DimensionError("empty label vectors");
  Confusion c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == positive;
    const bool p = y_pred[i] == positive;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (t && !p) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Prf prf(const Confusion& c) {
  Prf r;
  const auto tp = static_cast<double>(c.tp);
  if (c.tp + c.fp > 0) r.precision = tp / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = tp / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

Prf prf(std::span<const Label> y_true, std::span<const Label> y_pred, Label positive) {
  return prf(confusion(y_true, y_pred, positive));
}

EvalReport make_report(std::string model, std::string fold, std::span<const Label> y_true,
                       std::span<const Label> y_pred) {
  EvalReport r;
  r.model = std::move(model);
  r.fold = std::move(fold);
  r.counts = confusion(y_true, y_pred, Label::Egregious);
  r.egregious = prf(r.counts);
  r.non_egregious = prf(Confusion{r.counts.tn, r.counts.fn, r.counts.tp, r.counts.fp});
  return r;
}

std::vector<std::size_t> stratified_kfold(std::span<const Label> y, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (is_egregious(y[i]) ? pos : neg).push_back(i);
  if (k > std::min(pos.size(), neg.size())) {
    throw ValidationError("insufficient minority samples: k=" + std::to_string(k) + " but minority class has " +
                          std::to_string(std::min(pos.size(), neg.size())));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(y.size(), 0);
  std::size_t next = 0;
  for (auto* cls : {&pos, &neg}) {
    shuffle_indices(*cls, rng);
    for (auto i : *cls) {
      fold[i] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

std::vector<std::size_t> plain_kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be >= 2");
  if (k > n) throw ValidationError("more folds than samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  shuffle_indices(order, rng);
  std::vector<std::size_t> fold(n);
  for (std::size_t r = 0; r < n; ++r) fold[order[r]] = r % k;
  return fold;
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0)) throw ConfigError("gamma shape must be positive");
  if (x < 0) throw ConfigError("gamma argument must be non-negative");
  if (x == 0) return 1.0;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  constexpr double eps = 1e-16;
  constexpr int max_iter = 10000;
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < max_iter; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * eps) break;
    }
    return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
  }
  // Modified Lentz evaluation of the continued fraction.
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

double chi_square_sf(double x, double df) {
  if (!(df > 0)) throw ConfigError("degrees of freedom must be positive");
  if (x <= 0) return 1.0;
  return regularized_gamma_q(df / 2.0, x / 2.0);
}

McNemarResult mcnemar_counts(std::size_t b, std::size_t c) {
  McNemarResult r;
  r.discordant_b = b;
  r.discordant_c = c;
  const std::size_t n = b + c;
  if (n == 0) {
    r.no_discordant_pairs = true;
    r.exact_p_value = 1.0;
    return r;
  }
  const double diff = std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0;
  r.statistic = diff * diff / static_cast<double>(n);
  r.p_value = chi_square_sf(r.statistic, 1.0);
  if (n < 25) {
    double tail = 0.0;
    for (std::size_t i = 0; i <= std::min(b, c); ++i) tail += std::exp(log_half_binom(n, i));
    r.exact_p_value = std::min(1.0, 2.0 * tail);
  }
  return r;
}

McNemarResult mcnemar(std::span<const Label> pred_a, std::span<const Label> pred_b,
                      std::span<const Label> y_true) {
  if (pred_a.size() != y_true.size() || pred_b.size() != y_true.size()) {
    throw DimensionError("prediction vectors and truth differ in length");
  }
  std::size_t b = 0, c = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool a_ok = pred_a[i] == y_true[i];
    const bool b_ok = pred_b[i] == y_true[i];
    if (a_ok && !b_ok) ++b;
    if (!a_ok && b_ok) ++c;
  }
  return mcnemar_counts(b, c);
}

CvResult cross_validate(const Dataset& data, const ModelSpec& spec, const Resources& res,
                        std::span<const std::size_t> fold_of, std::size_t k, std::size_t jobs) {
  if (fold_of.size() != data.size()) throw DimensionError("fold assignment length differs from dataset");
  std::vector<std::vector<std::size_t>> test(k), train(k);
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] >= k) throw ValidationError("fold index out of range");
    for (std::size_t f = 0; f < k; ++f) (f == fold_of[i] ? test[f] : train[f]).push_back(i);
  }

  std::vector<std::vector<Prediction>> fold_preds(k);
  parallel_for(k, jobs, [&](std::size_t f) {
    if (test[f].empty()) return;
    const auto model = fit_model(data, train[f], spec);
    fold_preds[f] = predict_indices(model, data, test[f], res);
  });

  CvResult out;
  out.predictions.assign(data.size(), Label::NonEgregious);
  out.margins.assign(data.size(), 0.0);
  out.fold_of.assign(fold_of.begin(), fold_of.end());
  const auto name = spec.name();
  for (std::size_t f = 0; f < k; ++f) {
    if (test[f].empty()) continue;
    std::vector<Label> pred;
    for (std::size_t j = 0; j < test[f].size(); ++j) {
      out.predictions[test[f][j]] = fold_preds[f][j].label;
      out.margins[test[f][j]] = fold_preds[f][j].margin;
      pred.push_back(fold_preds[f][j].label);
    }
    out.folds.push_back(make_report(name, std::to_string(f), labels_at(data, test[f]), pred));
  }
  out.aggregate = make_report(name, "aggregate", data.labels, out.predictions);
  return out;
}

CvResult cross_validate(const Dataset& data, const ModelSpec& spec, const Resources& res,
                        const CvOptions& opts) {
  const auto folds = opts.stratified ? stratified_kfold(data.labels, opts.k, opts.seed)
                                     : plain_kfold(data.size(), opts.k, opts.seed);
  return cross_validate(data, spec, res, folds, opts.k, opts.jobs);
}

CrossDomainResult cross_domain_eval(const Dataset& train, const Dataset& test,
                                    const ModelSpec& spec, const Resources& res) {
  std::vector<std::size_t> train_idx(train.size()), test_idx(test.size());
  std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  std::iota(test_idx.begin(), test_idx.end(), std::size_t{0});
  const auto model = fit_model(train, train_idx, spec);
  const auto preds = predict_indices(model, test, test_idx, res);
  CrossDomainResult out;
  for (const auto& p : preds) out.predictions.push_back(p.label);
  out.report = make_report(spec.name(), "aggregate", test.labels, out.predictions);
  return out;
}

void write_report_tsv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "model\tfold\tclass\tprecision\trecall\tf1\ttp\tfp\ttn\tfn\n";
  out << std::setprecision(6);
  for (const auto& r : reports) {
    for (auto cls : {Label::Egregious, Label::NonEgregious}) {
      const auto& m = is_egregious(cls) ? r.egregious : r.non_egregious;
      out << r.model << '\t' << r.fold << '\t' << to_string(cls) << '\t' << m.precision << '\t'
          << m.recall << '\t' << m.f1 << '\t' << r.counts.tp << '\t' << r.counts.fp << '\t'
          << r.counts.tn << '\t' << r.counts.fn << '\n';
    }
  }
}

std::string format_report_table(std::span<const EvalReport> reports) {
  std::size_t width = 5;
  for (const auto& r : reports) width = std::max(width, r.model.size() + (r.fold == "aggregate" ? 0 : r.fold.size() + 3));
  std::ostringstream s;
  s << std::left << std::setw(static_cast<int>(width)) << "model"
    << "  | egregious             | non-egregious\n";
  s << std::setw(static_cast<int>(width)) << ""
    << "  |  P      R      F      |  P      R      F\n";
  for (const auto& r : reports) {
    std::string label = r.model;
    if (r.fold != "aggregate") label += " #" + r.fold;
    s << std::setw(static_cast<int>(width)) << label << "  |  " << fmt(r.egregious.precision) << "  "
      << fmt(r.egregious.recall) << "  " << fmt(r.egregious.f1) << "  |  "
      << fmt(r.non_egregious.precision) << "  " << fmt(r.non_egregious.recall) << "  "
      << fmt(r.non_egregious.f1) << '\n';
  }
  return s.str();
}

}  // namespace egr
