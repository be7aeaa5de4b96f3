#include "egr/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "egr/error.hpp"
#include "json.hpp"

namespace egr {

namespace {

using json = nlohmann::ordered_json;

constexpr int kModelFormatVersion = 1;

double sign(Label l) { return is_egregious(l) ? 1.0 : -1.0; }

void check_labels(std::size_t n_rows, std::span<const Label> y) {
  if (n_rows != y.size()) {
    throw DimensionError("got " + std::to_string(n_rows) + " samples but " +
                         std::to_string(y.size()) + " labels");
  }
  const bool has_pos = std::any_of(y.begin(), y.end(), is_egregious);
  const bool has_neg = std::any_of(y.begin(), y.end(), [](Label l) { return !is_egregious(l); });
  if (!has_pos || !has_neg) throw DegenerateLabelsError();
}

double sparse_dot(std::span<const double> w, const SparseVector& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.indices.size(); ++k) s += w[x.indices[k]] * x.values[k];
  return s;
}

// Fisher-Yates driven directly by the engine so the permutation does not
// depend on the standard library's distribution implementations.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

// Averaged stochastic subgradient descent. The iterate is w = v / w_div and
// the running average is (acc + w_frac * v) / a_div, so the per-step decay
// and averaging are O(1) and only the nonzeros of x are touched.
LinearModel asgd(std::span<const SparseVector> x, std::size_t dim, std::span<const Label> y,
                 const TrainConfig& cfg) {
  cfg.validate();
  check_labels(x.size(), y);
  for (const auto& row : x) {
    if (!row.indices.empty() && row.indices.back() >= dim) {
      throw DimensionError("feature index exceeds model dimension");
    }
  }

  const std::size_t n = x.size();
  const auto [w_neg, w_pos] = class_weights(y, cfg.class_weighting);
  const double lambda = 1.0 / (cfg.regularization_strength * static_cast<double>(n));

  std::vector<double> v(dim, 0.0), acc(dim, 0.0);
  double w_div = 1.0, a_div = 1.0, w_frac = 0.0;
  double bias = 0.0, bias_avg = 0.0;
  bool averaging = false;

  const std::size_t total_steps = cfg.epochs * n;
  const std::size_t average_from = cfg.epochs > 1 ? n : 0;

  auto renormalize = [&] {
    for (std::size_t d = 0; d < dim; ++d) {
      const double avg = averaging ? (acc[d] + w_frac * v[d]) / a_div : 0.0;
      v[d] /= w_div;
      acc[d] = avg;
    }
    w_div = 1.0;
    a_div = 1.0;
    w_frac = 0.0;
  };

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    for (std::size_t i : order) {
      const double eta =
          cfg.learning_rate / (1.0 + cfg.decay * cfg.learning_rate * lambda * static_cast<double>(t));
      const double yi = sign(y[i]);
      const double ci = is_egregious(y[i]) ? w_pos : w_neg;
      const double margin = yi * (sparse_dot(v, x[i]) / w_div + bias);

      w_div /= std::max(1e-12, 1.0 - eta * lambda);
      if (margin < 1.0) {
        const double g = eta * ci * yi;
        const double scaled = g * w_div;
        const auto& row = x[i];
        for (std::size_t k = 0; k < row.indices.size(); ++k) {
          const auto d = row.indices[k];
          v[d] += scaled * row.values[k];
          if (averaging) acc[d] -= w_frac * scaled * row.values[k];
        }
        bias += g;
      }

      if (t == average_from) {
        averaging = true;
        std::fill(acc.begin(), acc.end(), 0.0);
        a_div = w_div;
        w_frac = 1.0;
        bias_avg = bias;
      } else if (averaging) {
        const double mu = 1.0 / static_cast<double>(t - average_from + 1);
        a_div /= (1.0 - mu);
        w_frac += mu * a_div / w_div;
        bias_avg += mu * (bias - bias_avg);
      }

      if (w_div > 1e5 || a_div > 1e5) renormalize();
      ++t;
    }
  }
  (void)total_steps;

  LinearModel model;
  model.weights.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) model.weights[d] = (acc[d] + w_frac * v[d]) / a_div;
  model.bias = bias_avg;
  return model;
}

std::vector<SparseVector> to_sparse(std::span<const std::vector<double>> x, std::size_t& dim) {
  dim = x.empty() ? 0 : x.front().size();
  std::vector<SparseVector> rows;
  rows.reserve(x.size());
  for (const auto& row : x) {
    if (row.size() != dim) throw DimensionError("ragged feature matrix");
    rows.push_back(SparseVector::from_dense(row));
  }
  return rows;
}

}  // namespace

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector s;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      s.indices.push_back(static_cast<std::uint32_t>(i));
      s.values.push_back(dense[i]);
    }
  }
  return s;
}

void TrainConfig::validate() const {
  if (!(regularization_strength > 0)) throw ConfigError("regularization_strength must be positive");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (!(decay > 0)) throw ConfigError("decay must be positive");
}

std::string_view to_string(ClassWeighting w) {
  return w == ClassWeighting::Balanced ? "balanced" : "none";
}

ClassWeighting parse_class_weighting(std::string_view text) {
  if (text == "balanced") return ClassWeighting::Balanced;
  if (text == "none") return ClassWeighting::None;
  throw ConfigError("unknown class weighting '" + std::string(text) + "'");
}

std::pair<double, double> class_weights(std::span<const Label> y, ClassWeighting weighting) {
  if (weighting == ClassWeighting::None || y.empty()) return {1.0, 1.0};
  const auto pos = static_cast<double>(std::count_if(y.begin(), y.end(), is_egregious));
  const auto n = static_cast<double>(y.size());
  const double neg = n - pos;
  return {neg > 0 ? n / (2.0 * neg) : 1.0, pos > 0 ? n / (2.0 * pos) : 1.0};
}

LinearModel train_svm(std::span<const std::vector<double>> x, std::span<const Label> y,
                      const TrainConfig& cfg) {
  std::size_t dim = 0;
  const auto rows = to_sparse(x, dim);
  return asgd(rows, dim, y, cfg);
}

LinearModel train_svm_sparse(std::span<const SparseVector> x, std::size_t dimension,
                             std::span<const Label> y, const TrainConfig& cfg) {
  return asgd(x, dimension, y, cfg);
}

double svm_objective(const LinearModel& model, std::span<const std::vector<double>> x,
                     std::span<const Label> y, const TrainConfig& cfg) {
  if (x.size() != y.size() || x.empty()) throw DimensionError("objective needs matching x and y");
  const auto [w_neg, w_pos] = class_weights(y, cfg.class_weighting);
  const double n = static_cast<double>(x.size());
  const double lambda = 1.0 / (cfg.regularization_strength * n);
  double reg = 0.0;
  for (double w : model.weights) reg += w * w;
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = sign(y[i]) * (predict(model, x[i]).margin);
    loss += (is_egregious(y[i]) ? w_pos : w_neg) * std::max(0.0, 1.0 - m);
  }
  return 0.5 * lambda * reg + loss / n;
}

LinearModel svm_subgradient(const LinearModel& model, std::span<const std::vector<double>> x,
                            std::span<const Label> y, const TrainConfig& cfg) {
  if (x.size() != y.size() || x.empty()) throw DimensionError("subgradient needs matching x and y");
  const auto [w_neg, w_pos] = class_weights(y, cfg.class_weighting);
  const double n = static_cast<double>(x.size());
  const double lambda = 1.0 / (cfg.regularization_strength * n);
  LinearModel g;
  g.weights.resize(model.dimension());
  for (std::size_t d = 0; d < g.weights.size(); ++d) g.weights[d] = lambda * model.weights[d];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double yi = sign(y[i]);
    if (yi * predict(model, x[i]).margin < 1.0) {
      const double c = (is_egregious(y[i]) ? w_pos : w_neg) / n;
      for (std::size_t d = 0; d < g.weights.size(); ++d) g.weights[d] -= c * yi * x[i][d];
      g.bias -= c * yi;
    }
  }
  return g;
}

Prediction predict(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.dimension()) {
    throw DimensionError("model expects " + std::to_string(model.dimension()) +
                         " features, got " + std::to_string(x.size()));
  }
  double m = model.bias;
  for (std::size_t d = 0; d < x.size(); ++d) m += model.weights[d] * x[d];
  return {m > 0.0 ? Label::Egregious : Label::NonEgregious, m};
}

Prediction predict(const LinearModel& model, const SparseVector& x) {
  if (!x.indices.empty() && x.indices.back() >= model.dimension()) {
    throw DimensionError("sparse vector index exceeds model dimension");
  }
  const double m = sparse_dot(model.weights, x) + model.bias;
  return {m > 0.0 ? Label::Egregious : Label::NonEgregious, m};
}

Label rule_based_predict(const Conversation& conv, const PatternSet& not_trained,
                         const PatternSet& human_request) {
  for (const auto& turn : conv.turns) {
    if (not_trained.matches(turn.agent_text) || human_request.matches(turn.customer_text)) {
      return Label::Egregious;
    }
  }
  return Label::NonEgregious;
}

Prediction EgrModel::predict(const FeatureVector& features) const {
  return egr::predict(linear, features.project(group));
}

std::string conversation_text(const Conversation& conv) {
  std::string text;
  for (const auto& turn : conv.turns) {
    text += turn.customer_text;
    text += '\n';
    text += turn.agent_text;
    text += '\n';
  }
  return text;
}

std::vector<std::string> extract_ngrams(std::string_view text, std::size_t max_ngram) {
  const auto tokens = tokenize(text);
  std::vector<std::string> grams;
  for (std::size_t n = 1; n <= max_ngram; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < n; ++k) {
        g += ' ';
        g += tokens[i + k];
      }
      grams.push_back(std::move(g));
    }
  }
  return grams;
}

TextModel TextModel::from_parts(std::vector<std::string> terms, std::vector<double> idf,
                                LinearModel linear, std::size_t max_ngram) {
  if (terms.size() != idf.size()) throw ValidationError("idf length differs from vocabulary size");
  if (linear.dimension() != terms.size()) throw ValidationError("text model weight dimension mismatch");
  if (max_ngram < 1) throw ValidationError("max_ngram must be >= 1");
  TextModel m;
  m.terms_ = std::move(terms);
  m.idf_ = std::move(idf);
  m.linear_ = std::move(linear);
  m.max_ngram_ = max_ngram;
  for (std::size_t i = 0; i < m.terms_.size(); ++i) {
    m.index_.emplace(m.terms_[i], static_cast<std::uint32_t>(i));
  }
  return m;
}

SparseVector TextModel::vectorize(const Conversation& conv) const {
  std::map<std::uint32_t, double> tf;
  for (const auto& g : extract_ngrams(conversation_text(conv), max_ngram_)) {
    auto it = index_.find(g);
    if (it != index_.end()) tf[it->second] += 1.0;
  }
  SparseVector v;
  double norm = 0.0;
  for (const auto& [idx, count] : tf) {
    const double w = count * idf_[idx];
    v.indices.push_back(idx);
    v.values.push_back(w);
    norm += w * w;
  }
  if (norm > 0) {
    const double inv = 1.0 / std::sqrt(norm);
    for (auto& x : v.values) x *= inv;
  }
  return v;
}

Prediction TextModel::predict(const Conversation& conv) const {
  return egr::predict(linear_, vectorize(conv));
}

TextModel TextModel::train(std::span<const Conversation> convs, std::span<const Label> y,
                           const TrainConfig& cfg, const TextBaselineConfig& text_cfg) {
  check_labels(convs.size(), y);
  if (text_cfg.max_ngram < 1) throw ConfigError("max_ngram must be >= 1");

  std::map<std::string, std::size_t> df;
  for (const auto& conv : convs) {
    auto grams = extract_ngrams(conversation_text(conv), text_cfg.max_ngram);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[g];
  }

  std::vector<std::string> terms;
  std::vector<double> idf;
  const double n = static_cast<double>(convs.size());
  for (const auto& [gram, count] : df) {
    if (count < text_cfg.min_document_frequency) continue;
    terms.push_back(gram);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }

  LinearModel empty;
  empty.weights.assign(terms.size(), 0.0);
  auto model = from_parts(std::move(terms), std::move(idf), std::move(empty), text_cfg.max_ngram);

  std::vector<SparseVector> rows;
  rows.reserve(convs.size());
  for (const auto& conv : convs) rows.push_back(model.vectorize(conv));
  model.linear_ = train_svm_sparse(rows, model.terms_.size(), y, cfg);
  return model;
}

TextModel train_text_baseline(std::span<const Conversation> convs, std::span<const Label> y,
                              const TrainConfig& cfg) {
  return TextModel::train(convs, y, cfg);
}

void save_model(std::ostream& out, const AnyModel& model) {
  json j;
  j["format"] = "egr-model";
  j["version"] = kModelFormatVersion;
  if (const auto* egr = std::get_if<EgrModel>(&model)) {
    j["kind"] = "egr";
    j["feature_group"] = std::string(to_string(egr->group));
    std::vector<std::string> fields(kFeatureNames.begin(),
                                    kFeatureNames.begin() + static_cast<std::ptrdiff_t>(group_dimension(egr->group)));
    j["fields"] = fields;
    j["weights"] = egr->linear.weights;
    j["bias"] = egr->linear.bias;
    j["normalization"] = {{"min_length", egr->stats.min_length()},
                          {"max_length", egr->stats.max_length()}};
  } else {
    const auto& text = std::get<TextModel>(model);
    j["kind"] = "text";
    j["max_ngram"] = text.max_ngram();
    j["vocabulary"] = text.vocabulary();
    j["idf"] = text.idf();
    j["weights"] = text.linear().weights;
    j["bias"] = text.linear().bias;
  }
  out << j.dump(1) << '\n';
}

void save_model_file(const std::string& path, const AnyModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model '" + path + "'");
  save_model(out, model);
}

AnyModel load_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "egr-model") throw ValidationError("not an egr model file");
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw ValidationError("unsupported model version " + j.at("version").dump());
    }
    LinearModel linear{j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()};
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "egr") {
      EgrModel m;
      m.group = parse_feature_group(j.at("feature_group").get<std::string>());
      const auto fields = j.at("fields").get<std::vector<std::string>>();
      if (fields.size() != group_dimension(m.group) || linear.dimension() != fields.size()) {
        throw ValidationError("model field list does not match its feature group");
      }
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] != kFeatureNames[i]) throw ValidationError("unexpected field '" + fields[i] + "'");
      }
      const auto& norm = j.at("normalization");
      m.stats = NormalizationStats(norm.at("min_length").get<std::size_t>(),
                                   norm.at("max_length").get<std::size_t>());
      m.linear = std::move(linear);
      return m;
    }
    if (kind == "text") {
      return TextModel::from_parts(j.at("vocabulary").get<std::vector<std::string>>(),
                                   j.at("idf").get<std::vector<double>>(), std::move(linear),
                                   j.at("max_ngram").get<std::size_t>());
    }
    throw ValidationError("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

AnyModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model '" + path + "'");
  return load_model(in);
}

}  // namespace egr
