#include "egr/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "egr/conversation.hpp"
#include "egr/error.hpp"
#include "egr/evaluation.hpp"
#include "egr/rephrase_analysis.hpp"
#include "json.hpp"

namespace egr {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError("unknown config key '" + where + (where.empty() ? "" : ".") + k + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

std::vector<double> to_vector(const std::array<double, 5>& a) { return {a.begin(), a.end()}; }

std::array<double, 5> to_mix(const json& j, const char* what) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 5) throw ConfigError(std::string(what) + " needs 5 weights");
  return {v[0], v[1], v[2], v[3], v[4]};
}

}  // namespace

void RunConfig::validate() const {
  detector.validate();
  train.validate();
  if (min_turns < 1) throw ConfigError("min_turns must be >= 1");
  if (folds < 2) throw ConfigError("folds must be >= 2");
  generator.validate();
}

void RunConfig::check_files() const {
  for (const auto* p : {&paths.embeddings, &paths.lexicon, &paths.not_trained, &paths.human_request}) {
    if (!p->empty() && !fs::exists(*p)) throw IoError("configured file '" + *p + "' does not exist");
  }
}

std::string RunConfig::to_json() const {
  json j;
  j["paths"] = {{"embeddings", paths.embeddings}, {"lexicon", paths.lexicon},
                {"not_trained", paths.not_trained}, {"human_request", paths.human_request},
                {"corpus", paths.corpus},           {"labels", paths.labels},
                {"test_corpus", paths.test_corpus}, {"test_labels", paths.test_labels},
                {"model", paths.model},             {"output", paths.output}};
  j["thresholds"] = {{"similarity", detector.similarity_threshold},
                     {"positive", detector.positive_threshold},
                     {"neg_sent", detector.neg_sent_threshold},
                     {"long_turn", detector.long_turn_tokens},
                     {"min_turns", min_turns}};
  j["training"] = {{"C", train.regularization_strength},
                   {"epochs", train.epochs},
                   {"learning_rate", train.learning_rate},
                   {"decay", train.decay},
                   {"class_weighting", std::string(to_string(train.class_weighting))}};
  j["evaluation"] = {{"folds", folds}, {"stratified", stratified}};
  j["seed"] = seed;
  j["feature_group"] = std::string(to_string(group));
  j["jobs"] = jobs;
  j["generator"] = {{"seed", generator.seed},
                    {"n_conversations", generator.n_conversations},
                    {"egregious_rate", generator.egregious_rate},
                    {"length_alpha", generator.length_alpha},
                    {"length_min", generator.length_min},
                    {"length_max", generator.length_max},
                    {"domain_tag", generator.domain_tag},
                    {"vocabulary_id", generator.vocabulary_id},
                    {"recipe_mix", to_vector(generator.recipe_mix)},
                    {"benign_mix", to_vector(generator.benign_mix)}};
  return j.dump(2);
}

RunConfig RunConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  try {
    reject_unknown(j, {"paths", "thresholds", "training", "evaluation", "seed", "feature_group", "jobs",
                       "generator"},
                   "");
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      reject_unknown(p, {"embeddings", "lexicon", "not_trained", "human_request", "corpus", "labels",
                         "test_corpus", "test_labels", "model", "output"},
                     "paths");
      read(p, "embeddings", c.paths.embeddings);
      read(p, "lexicon", c.paths.lexicon);
      read(p, "not_trained", c.paths.not_trained);
      read(p, "human_request", c.paths.human_request);
      read(p, "corpus", c.paths.corpus);
      read(p, "labels", c.paths.labels);
      read(p, "test_corpus", c.paths.test_corpus);
      read(p, "test_labels", c.paths.test_labels);
      read(p, "model", c.paths.model);
      read(p, "output", c.paths.output);
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      reject_unknown(t, {"similarity", "positive", "neg_sent", "long_turn", "min_turns"}, "thresholds");
      read(t, "similarity", c.detector.similarity_threshold);
      read(t, "positive", c.detector.positive_threshold);
      read(t, "neg_sent", c.detector.neg_sent_threshold);
      read(t, "long_turn", c.detector.long_turn_tokens);
      read(t, "min_turns", c.min_turns);
    }
    if (j.contains("training")) {
      const auto& t = j["training"];
      reject_unknown(t, {"C", "epochs", "learning_rate", "decay", "class_weighting"}, "training");
      read(t, "C", c.train.regularization_strength);
      read(t, "epochs", c.train.epochs);
      read(t, "learning_rate", c.train.learning_rate);
      read(t, "decay", c.train.decay);
      if (t.contains("class_weighting")) {
        c.train.class_weighting = parse_class_weighting(t["class_weighting"].get<std::string>());
      }
    }
    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      reject_unknown(e, {"folds", "stratified"}, "evaluation");
      read(e, "folds", c.folds);
      read(e, "stratified", c.stratified);
    }
    read(j, "seed", c.seed);
    read(j, "jobs", c.jobs);
    if (j.contains("feature_group")) c.group = parse_feature_group(j["feature_group"].get<std::string>());
    if (j.contains("generator")) {
      const auto& g = j["generator"];
      reject_unknown(g, {"seed", "n_conversations", "egregious_rate", "length_alpha", "length_min",
                         "length_max", "domain_tag", "vocabulary_id", "recipe_mix", "benign_mix"},
                     "generator");
      read(g, "seed", c.generator.seed);
      read(g, "n_conversations", c.generator.n_conversations);
      read(g, "egregious_rate", c.generator.egregious_rate);
      read(g, "length_alpha", c.generator.length_alpha);
      read(g, "length_min", c.generator.length_min);
      read(g, "length_max", c.generator.length_max);
      read(g, "domain_tag", c.generator.domain_tag);
      read(g, "vocabulary_id", c.generator.vocabulary_id);
      if (g.contains("recipe_mix")) c.generator.recipe_mix = to_mix(g["recipe_mix"], "recipe_mix");
      if (g.contains("benign_mix")) c.generator.benign_mix = to_mix(g["benign_mix"], "benign_mix");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_json() == b.to_json(); }

Resources load_resources(const RunConfig& cfg) {
  cfg.check_files();
  Resources r;
  if (cfg.paths.embeddings.empty()) {
    r.embeddings = synthetic_embeddings();
  } else {
    r.embeddings = std::make_shared<const EmbeddingStore>(EmbeddingStore::load_file(cfg.paths.embeddings));
  }
  r.affect = std::make_shared<LexiconScorer>(cfg.paths.lexicon.empty() ? synthetic_lexicon()
                                                                        : EmotionLexicon::load_file(cfg.paths.lexicon));
  r.not_trained = cfg.paths.not_trained.empty() ? synthetic_not_trained()
                                                : PatternSet::load_file("not_trained", cfg.paths.not_trained);
  r.human_request = cfg.paths.human_request.empty()
                        ? synthetic_human_request()
                        : PatternSet::load_file("human_request", cfg.paths.human_request);
  r.config = cfg.detector;
  r.validate();
  return r;
}

namespace {

// ---------------------------------------------------------------------------
// Flag plumbing: options bind to optionals and only override the config
// when given.

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> embeddings, lexicon, not_trained, human_request;
  std::optional<std::string> corpus, labels, test_corpus, test_labels, model, output;
  std::optional<double> similarity, positive, neg_sent;
  std::optional<std::size_t> long_turn, min_turns;
  std::optional<double> c, learning_rate, decay;
  std::optional<std::size_t> epochs, folds;
  std::optional<std::string> class_weighting, group;
  bool plain_kfold = false;
  // generate
  std::optional<std::size_t> n;
  std::optional<double> rate, alpha;
  std::optional<std::size_t> length_min, length_max;
  std::optional<std::string> domain_tag, vocabulary;
  std::optional<std::string> emit_resources;
};

template <typename T>
void apply(const std::optional<T>& v, T& target) {
  if (v) target = *v;
}

RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg;
  std::string path;
  if (o.config) path = *o.config;
  else if (const char* env = std::getenv(kConfigEnvVar); env && *env) path = env;
  if (!path.empty()) cfg = RunConfig::load_file(path);

  apply(o.jobs, cfg.jobs);
  apply(o.seed, cfg.seed);
  apply(o.embeddings, cfg.paths.embeddings);
  apply(o.lexicon, cfg.paths.lexicon);
  apply(o.not_trained, cfg.paths.not_trained);
  apply(o.human_request, cfg.paths.human_request);
  apply(o.corpus, cfg.paths.corpus);
  apply(o.labels, cfg.paths.labels);
  apply(o.test_corpus, cfg.paths.test_corpus);
  apply(o.test_labels, cfg.paths.test_labels);
  apply(o.model, cfg.paths.model);
  apply(o.output, cfg.paths.output);
  apply(o.similarity, cfg.detector.similarity_threshold);
  apply(o.positive, cfg.detector.positive_threshold);
  apply(o.neg_sent, cfg.detector.neg_sent_threshold);
  apply(o.long_turn, cfg.detector.long_turn_tokens);
  apply(o.min_turns, cfg.min_turns);
  apply(o.c, cfg.train.regularization_strength);
  apply(o.learning_rate, cfg.train.learning_rate);
  apply(o.decay, cfg.train.decay);
  apply(o.epochs, cfg.train.epochs);
  apply(o.folds, cfg.folds);
  if (o.class_weighting) cfg.train.class_weighting = parse_class_weighting(*o.class_weighting);
  if (o.group) cfg.group = parse_feature_group(*o.group);
  if (o.plain_kfold) cfg.stratified = false;
  apply(o.n, cfg.generator.n_conversations);
  apply(o.rate, cfg.generator.egregious_rate);
  apply(o.alpha, cfg.generator.length_alpha);
  apply(o.length_min, cfg.generator.length_min);
  apply(o.length_max, cfg.generator.length_max);
  apply(o.domain_tag, cfg.generator.domain_tag);
  apply(o.vocabulary, cfg.generator.vocabulary_id);
  if (o.seed) cfg.generator.seed = *o.seed;
  cfg.train.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Command helpers.

const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required input: ") + flag);
  return value;
}

std::vector<Conversation> load_corpus(const std::string& path, const RunConfig& cfg, std::ostream& err,
                                      std::string_view tag = {}) {
  auto convs = parse_log_file(path, tag);
  auto kept = filter_short(convs, cfg.min_turns);
  if (kept.size() != convs.size()) {
    err << "note: dropped " << (convs.size() - kept.size()) << " conversation(s) shorter than "
        << cfg.min_turns << " turns from " << path << '\n';
  }
  return kept;
}

Dataset load_dataset(const std::string& corpus, const std::string& labels, const RunConfig& cfg,
                     const Resources& res, std::ostream& err) {
  const auto convs = load_corpus(require(corpus, "--corpus"), cfg, err);
  const auto lab = read_labels_file(require(labels, "--labels"));
  return make_dataset(attach_labels(convs, lab), res, cfg.jobs);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

// Writes to the named file, or to `out` when the path is empty.
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty()) {
    fn(out);
  } else {
    auto f = open_out(path);
    fn(f);
  }
}

void header(std::ostream& out, const std::string& command, const RunConfig& cfg) {
  out << "# " << command << " seed=" << cfg.seed << " folds=" << cfg.folds
      << " stratified=" << (cfg.stratified ? "yes" : "no") << " C=" << cfg.train.regularization_strength
      << " epochs=" << cfg.train.epochs << " class_weighting=" << to_string(cfg.train.class_weighting)
      << '\n';
}

ModelSpec spec_for(ModelKind kind, const RunConfig& cfg, FeatureGroup group) {
  ModelSpec s;
  s.kind = kind;
  s.group = group;
  s.train = cfg.train;
  return s;
}

std::vector<ModelKind> parse_models(const std::string& list) {
  std::vector<ModelKind> kinds;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) kinds.push_back(parse_model_kind(item));
  }
  if (kinds.empty()) throw ConfigError("no models given");
  return kinds;
}

std::vector<IdLabel> to_id_labels(const Dataset& d, std::span<const Label> pred) {
  std::vector<IdLabel> out;
  for (std::size_t i = 0; i < d.size(); ++i) out.push_back({d.conversations[i].id, pred[i]});
  return out;
}

void print_mcnemar(std::ostream& out, const std::string& a, const std::string& b, const McNemarResult& r) {
  out << "mcnemar " << a << " vs " << b << ": b=" << r.discordant_b << " c=" << r.discordant_c
      << " statistic=" << std::setprecision(6) << r.statistic << " p=" << r.p_value;
  if (r.exact_p_value) out << " exact_p=" << *r.exact_p_value;
  if (r.no_discordant_pairs) out << " (no discordant pairs)";
  out << '\n';
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_generate(const RunConfig& cfg, const Overrides& o, std::ostream& out) {
  const auto& dir = require(cfg.paths.output, "--output (directory)");
  fs::create_directories(dir);
  const auto res = synthetic_resources(cfg.detector);
  const auto corpus = generate_corpus(cfg.generator, res);
  std::vector<Conversation> convs;
  std::vector<IdLabel> labels;
  for (const auto& lc : corpus.conversations) {
    convs.push_back(lc.conversation);
    labels.push_back({lc.conversation.id, lc.label});
  }
  const fs::path base(dir);
  write_log_file((base / "conversations.jsonl").string(), convs);
  write_labels_file((base / "labels.tsv").string(), labels);
  {
    auto f = open_out((base / "traces.jsonl").string());
    write_traces(f, corpus.traces);
  }
  if (o.emit_resources) {
    const fs::path rdir(*o.emit_resources);
    fs::create_directories(rdir);
    res.embeddings->save_file((rdir / "embeddings.txt").string());
    {
      auto f = open_out((rdir / "lexicon.csv").string());
      f << "# word,emotion,weight\n";
      for (const auto& [word, emotions] : synthetic_lexicon().entries) {
        for (const auto& [emotion, w] : emotions) f << word << ',' << emotion << ',' << w << '\n';
      }
    }
    for (const auto& [name, set] : {std::pair{"not_trained.txt", res.not_trained},
                                    std::pair{"human_request.txt", res.human_request}}) {
      auto f = open_out((rdir / name).string());
      for (const auto& s : set.sources()) f << s << '\n';
    }
  }
  std::size_t n_egr = 0;
  for (const auto& l : labels) n_egr += is_egregious(l.label) ? 1 : 0;
  out << "generated " << convs.size() << " conversations (" << n_egr << " egregious) seed="
      << cfg.generator.seed << " in " << dir << '\n';
  return kExitOk;
}

int cmd_featurize(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto res = load_resources(cfg);
  const auto convs = load_corpus(require(cfg.paths.corpus, "--corpus"), cfg, err);
  std::map<std::string, Label> label_of;
  if (!cfg.paths.labels.empty()) {
    for (const auto& l : read_labels_file(cfg.paths.labels)) label_of[l.conversation_id] = l.label;
  }
  NormalizationStats stats;
  if (!cfg.paths.model.empty()) {
    const auto model = load_model_file(cfg.paths.model);
    const auto* egr = std::get_if<EgrModel>(&model);
    if (!egr) throw ValidationError("featurize needs an egr model for its normalization stats");
    stats = egr->stats;
  } else {
    stats = fit_normalizer(convs);
  }
  const auto raw = featurize_corpus(convs, res, cfg.jobs);
  std::vector<FeatureRecord> records;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    FeatureRecord r{convs[i].id, finalize(raw[i], stats), std::nullopt};
    if (auto it = label_of.find(convs[i].id); it != label_of.end()) r.label = it->second;
    records.push_back(std::move(r));
  }
  emit(cfg.paths.output, out, [&](std::ostream& s) { write_feature_file(s, records); });
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, const std::string& kind_name, std::ostream& out, std::ostream& err) {
  const auto kind = parse_model_kind(kind_name);
  if (kind == ModelKind::Rule) throw ConfigError("the rule baseline has no trainable model");
  const auto res = load_resources(cfg);
  const auto data = load_dataset(cfg.paths.corpus, cfg.paths.labels, cfg, res, err);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto trained = fit_model(data, all, spec_for(kind, cfg, cfg.group));
  const auto& path = require(cfg.paths.output, "--output");
  if (trained.egr) save_model_file(path, *trained.egr);
  else save_model_file(path, *trained.text);
  out << "trained " << kind_name << " on " << data.size() << " conversations seed=" << cfg.seed << " -> "
      << path << '\n';
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& predictions, std::ostream& out,
                 std::ostream& err) {
  const auto res = load_resources(cfg);
  const auto data = load_dataset(cfg.paths.corpus, cfg.paths.labels, cfg, res, err);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  TrainedModel model;
  std::string name;
  if (cfg.paths.model.empty() || cfg.paths.model == "rule") {
    model.spec.kind = ModelKind::Rule;
    name = "rule";
  } else {
    auto loaded = load_model_file(cfg.paths.model);
    if (auto* egr = std::get_if<EgrModel>(&loaded)) {
      model.spec.kind = ModelKind::Egr;
      model.spec.group = egr->group;
      model.egr = std::move(*egr);
    } else {
      model.spec.kind = ModelKind::Text;
      model.text = std::get<TextModel>(std::move(loaded));
    }
    name = model.spec.name();
  }
  const auto preds = predict_indices(model, data, all, res);
  std::vector<Label> labels;
  for (const auto& p : preds) labels.push_back(p.label);
  const auto report = make_report(name, "aggregate", data.labels, labels);
  out << format_report_table(std::span(&report, 1));
  if (!cfg.paths.output.empty()) {
    auto f = open_out(cfg.paths.output);
    write_report_tsv(f, std::span(&report, 1));
  }
  if (!predictions.empty()) write_labels_file(predictions, to_id_labels(data, labels));
  return kExitOk;
}

int cmd_cv(const RunConfig& cfg, const std::string& models, const std::string& pred_dir,
           bool per_fold, std::ostream& out, std::ostream& err) {
  const auto res = load_resources(cfg);
  const auto data = load_dataset(cfg.paths.corpus, cfg.paths.labels, cfg, res, err);
  const CvOptions opts{cfg.folds, cfg.seed, cfg.stratified, cfg.jobs};
  std::vector<EvalReport> table, all;
  std::map<std::string, std::vector<Label>> pooled;
  for (auto kind : parse_models(models)) {
    const auto spec = spec_for(kind, cfg, cfg.group);
    const auto r = cross_validate(data, spec, res, opts);
    table.push_back(r.aggregate);
    all.insert(all.end(), r.folds.begin(), r.folds.end());
    all.push_back(r.aggregate);
    pooled[spec.name()] = r.predictions;
  }
  header(out, "cv", cfg);
  out << format_report_table(per_fold ? std::span<const EvalReport>(all) : std::span<const EvalReport>(table));
  if (pooled.count("egr") && pooled.count("text")) {
    print_mcnemar(out, "egr", "text", mcnemar(pooled["egr"], pooled["text"], data.labels));
  }
  if (pooled.count("egr") && pooled.count("rule")) {
    print_mcnemar(out, "egr", "rule", mcnemar(pooled["egr"], pooled["rule"], data.labels));
  }
  if (!cfg.paths.output.empty()) {
    auto f = open_out(cfg.paths.output);
    header(f, "cv", cfg);
    write_report_tsv(f, all);
  }
  if (!pred_dir.empty()) {
    fs::create_directories(pred_dir);
    for (const auto& [name, pred] : pooled) {
      write_labels_file((fs::path(pred_dir) / (name + ".tsv")).string(), to_id_labels(data, pred));
    }
  }
  return kExitOk;
}

int cmd_crossdomain(const RunConfig& cfg, const std::string& models, std::ostream& out, std::ostream& err) {
  const auto res = load_resources(cfg);
  const auto train = load_dataset(cfg.paths.corpus, cfg.paths.labels, cfg, res, err);
  const auto test = load_dataset(cfg.paths.test_corpus, cfg.paths.test_labels, cfg, res, err);
  std::vector<EvalReport> reports;
  std::map<std::string, std::vector<Label>> preds;
  for (auto kind : parse_models(models)) {
    const auto spec = spec_for(kind, cfg, cfg.group);
    auto r = cross_domain_eval(train, test, spec, res);
    reports.push_back(r.report);
    preds[spec.name()] = std::move(r.predictions);
  }
  header(out, "crossdomain", cfg);
  out << format_report_table(reports);
  if (preds.count("egr") && preds.count("text")) {
    print_mcnemar(out, "egr", "text", mcnemar(preds["egr"], preds["text"], test.labels));
  }
  if (!cfg.paths.output.empty()) {
    auto f = open_out(cfg.paths.output);
    header(f, "crossdomain", cfg);
    write_report_tsv(f, reports);
  }
  return kExitOk;
}

int cmd_rephrase_report(const RunConfig& cfg, const std::string& traces, std::ostream& out,
                        std::ostream& err) {
  const auto res = load_resources(cfg);
  const auto convs = load_corpus(require(cfg.paths.corpus, "--corpus"), cfg, err);
  const auto labeled = attach_labels(convs, read_labels_file(require(cfg.paths.labels, "--labels")));
  const auto d = motivation_distribution(labeled, res, cfg.jobs);
  out << format_motivation_table(d);
  if (!traces.empty()) {
    std::ifstream in(traces);
    if (!in) throw IoError("cannot open traces '" + traces + "'");
    out << "planted:\n" << format_motivation_table(planted_motivations(read_traces(in)));
  }
  if (!cfg.paths.output.empty()) {
    auto f = open_out(cfg.paths.output);
    f << "class\tmotivation\tcount\tpercent\n";
    for (auto cls : {Label::Egregious, Label::NonEgregious}) {
      const auto& c = d.of(cls);
      const auto pct = c.percentages();
      for (std::size_t i = 0; i < 3; ++i) {
        f << to_string(cls) << '\t' << to_string(kMotivations[i]) << '\t' << c.counts[i] << '\t' << pct[i] << '\n';
      }
    }
  }
  return kExitOk;
}

int cmd_mcnemar(const std::string& a, const std::string& b, const std::string& truth, std::ostream& out) {
  const auto pa = read_labels_file(require(a, "--a"));
  const auto pb = read_labels_file(require(b, "--b"));
  const auto yt = read_labels_file(require(truth, "--truth"));
  std::map<std::string, Label> ma, mb;
  for (const auto& x : pa) ma[x.conversation_id] = x.label;
  for (const auto& x : pb) mb[x.conversation_id] = x.label;
  std::vector<Label> va, vb, vt;
  for (const auto& x : yt) {
    const auto ia = ma.find(x.conversation_id);
    const auto ib = mb.find(x.conversation_id);
    if (ia == ma.end() || ib == mb.end()) {
      throw ValidationError("no prediction for conversation '" + x.conversation_id + "'");
    }
    va.push_back(ia->second);
    vb.push_back(ib->second);
    vt.push_back(x.label);
  }
  print_mcnemar(out, a, b, mcnemar(va, vb, vt));
  return kExitOk;
}

int cmd_ablation(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto res = load_resources(cfg);
  const auto data = load_dataset(cfg.paths.corpus, cfg.paths.labels, cfg, res, err);
  const CvOptions opts{cfg.folds, cfg.seed, cfg.stratified, cfg.jobs};
  std::vector<EvalReport> reports;
  for (auto g : {FeatureGroup::Agent, FeatureGroup::AgentCustomer, FeatureGroup::All}) {
    reports.push_back(cross_validate(data, spec_for(ModelKind::Egr, cfg, g), res, opts).aggregate);
  }
  header(out, "ablation", cfg);
  out << format_report_table(reports);
  emit(cfg.paths.output, out, [&](std::ostream& s) {
    s << "group\tprecision\trecall\tf1\n";
    const char* names[] = {"agent", "agent+customer", "agent+customer+interaction"};
    for (std::size_t i = 0; i < reports.size(); ++i) {
      s << names[i] << '\t' << reports[i].egregious.precision << '\t' << reports[i].egregious.recall << '\t'
        << reports[i].egregious.f1 << '\n';
    }
  });
  return kExitOk;
}

int cmd_stats(const RunConfig& cfg, const std::string& judgments, std::size_t quorum,
              const std::string& labels_out, std::ostream& out, std::ostream& err) {
  if (!cfg.paths.corpus.empty()) {
    const auto all = parse_log_file(cfg.paths.corpus);
    const auto kept = filter_short(all, cfg.min_turns);
    const auto h = length_histogram(kept);
    out << "conversations " << all.size() << " kept " << kept.size() << " (min_turns=" << cfg.min_turns << ")\n";
    if (h.mean_length) out << "mean_length " << std::setprecision(4) << *h.mean_length << '\n';
    out << "length\tfrequency\n";
    for (const auto& b : h.bins) out << b.length << '\t' << b.frequency << '\n';
    if (!cfg.paths.labels.empty()) {
      const auto labeled = attach_labels(kept, read_labels_file(cfg.paths.labels));
      std::size_t n_egr = 0;
      for (const auto& lc : labeled) n_egr += is_egregious(lc.label) ? 1 : 0;
      out << "egregious " << n_egr << " of " << labeled.size() << '\n';
    }
  }
  if (!judgments.empty()) {
    const auto sets = read_judgments_file(judgments);
    if (sets.empty()) throw ValidationError("judgments file is empty");
    const auto judges = sets.front().judgments.size();
    std::vector<std::vector<bool>> raters(judges);
    std::vector<IdLabel> labels;
    for (const auto& s : sets) {
      if (s.judgments.size() != judges) throw ValidationError("judge count differs for '" + s.conversation_id + "'");
      for (std::size_t j = 0; j < judges; ++j) raters[j].push_back(s.judgments[j]);
      labels.push_back({s.conversation_id, aggregate_judgments(s, quorum)});
    }
    std::size_t n_egr = 0;
    for (const auto& l : labels) n_egr += is_egregious(l.label) ? 1 : 0;
    out << "judges " << judges << " quorum " << quorum << " egregious " << n_egr << " of " << labels.size() << '\n';
    if (judges >= 2) out << "mean_pairwise_kappa " << std::setprecision(4) << mean_pairwise_kappa(raters) << '\n';
    if (!labels_out.empty()) write_labels_file(labels_out, labels);
  }
  if (cfg.paths.corpus.empty() && judgments.empty()) {
    err << "stats: nothing to do (give --corpus and/or --judgments)\n";
    return kExitUsage;
  }
  return kExitOk;
}

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config, "JSON run configuration (default: $EGR_CONFIG)");
  app.add_option("--jobs,-j", o.jobs, "worker threads (0 = all cores)");
  app.add_option("--seed", o.seed, "seed for every randomized step");
  app.add_option("--embeddings", o.embeddings, "word vector file");
  app.add_option("--lexicon", o.lexicon, "emotion lexicon (word,emotion,weight)");
  app.add_option("--not-trained", o.not_trained, "not-trained reply patterns");
  app.add_option("--human-request", o.human_request, "human-request patterns");
  app.add_option("--similarity-threshold", o.similarity, "rephrase / repeat cosine threshold");
  app.add_option("--positive-threshold", o.positive, "positive-turn filter threshold");
  app.add_option("--neg-sent-threshold", o.neg_sent, "negative sentiment threshold");
  app.add_option("--long-turn", o.long_turn, "tokens for a long customer turn");
  app.add_option("--min-turns", o.min_turns, "drop shorter conversations on ingestion");
  app.add_option("--C", o.c, "SVM regularization strength");
  app.add_option("--epochs", o.epochs, "SVM epochs");
  app.add_option("--learning-rate", o.learning_rate, "initial SVM step size");
  app.add_option("--decay", o.decay, "step size decay");
  app.add_option("--class-weighting", o.class_weighting, "balanced | none");
  app.add_option("--group", o.group, "feature group: agent | agent+customer | all");
  app.add_option("--folds,-k", o.folds, "cross-validation folds");
  app.add_flag("--plain-kfold", o.plain_kfold, "unstratified folds");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DegenerateLabelsError*>(&e)) return kExitDegenerate;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e)) {
    return kExitSchema;
  }
  return kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detect egregious customer / virtual-agent conversations", "egr"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  add_common(app, o);

  std::string models = "rule,text,egr", model_kind = "egr", predictions, pred_dir, traces;
  std::string pa, pb, truth, judgments, labels_out;
  std::size_t quorum = 3;
  bool per_fold = false;

  auto* gen = app.add_subcommand("generate", "write a synthetic labeled corpus");
  gen->add_option("--output,-o,--out-dir", o.output, "output directory");
  gen->add_option("--n", o.n, "number of conversations");
  gen->add_option("--rate", o.rate, "egregious fraction");
  gen->add_option("--alpha", o.alpha, "power-law exponent of lengths");
  gen->add_option("--length-min", o.length_min, "shortest conversation");
  gen->add_option("--length-max", o.length_max, "longest conversation");
  gen->add_option("--domain-tag", o.domain_tag, "domain tag and id prefix");
  gen->add_option("--vocabulary", o.vocabulary, "travel | software");
  gen->add_option("--emit-resources", o.emit_resources, "also write the matching resource files here");

  auto* feat = app.add_subcommand("featurize", "write the 16 features per conversation");
  feat->add_option("--corpus", o.corpus, "conversations (JSON lines)");
  feat->add_option("--labels", o.labels, "optional labels to carry along");
  feat->add_option("--model", o.model, "take normalization stats from this egr model");
  feat->add_option("--output,-o", o.output, "feature file (default stdout)");

  auto* train = app.add_subcommand("train", "train a model file");
  train->add_option("--corpus", o.corpus, "conversations");
  train->add_option("--labels", o.labels, "labels");
  train->add_option("--model-kind", model_kind, "egr | text");
  train->add_option("--output,-o", o.output, "model file");

  auto* eval = app.add_subcommand("evaluate", "evaluate a model file (or 'rule')");
  eval->add_option("--corpus", o.corpus, "conversations");
  eval->add_option("--labels", o.labels, "labels");
  eval->add_option("--model", o.model, "model file or 'rule'");
  eval->add_option("--output,-o", o.output, "report TSV");
  eval->add_option("--predictions", predictions, "write predictions in labels format");

  auto* cv = app.add_subcommand("cv", "k-fold cross-validation of several models");
  cv->add_option("--corpus", o.corpus, "conversations");
  cv->add_option("--labels", o.labels, "labels");
  cv->add_option("--models", models, "comma-separated: rule,text,egr");
  cv->add_option("--output,-o", o.output, "report TSV");
  cv->add_option("--predictions-dir", pred_dir, "write pooled predictions per model");
  cv->add_flag("--per-fold", per_fold, "show every fold in the table");

  auto* xd = app.add_subcommand("crossdomain", "train on one corpus, test on another");
  xd->add_option("--corpus,--train-corpus", o.corpus, "training conversations");
  xd->add_option("--labels,--train-labels", o.labels, "training labels");
  xd->add_option("--test-corpus", o.test_corpus, "test conversations");
  xd->add_option("--test-labels", o.test_labels, "test labels");
  xd->add_option("--models", models, "comma-separated: rule,text,egr");
  xd->add_option("--output,-o", o.output, "report TSV");

  auto* reph = app.add_subcommand("rephrase-report", "rephrase motivations per class");
  reph->add_option("--corpus", o.corpus, "conversations");
  reph->add_option("--labels", o.labels, "labels");
  reph->add_option("--traces", traces, "generator traces to compare with");
  reph->add_option("--output,-o", o.output, "report TSV");

  auto* mc = app.add_subcommand("mcnemar", "paired test of two prediction files");
  mc->add_option("--a", pa, "predictions of model A (labels format)")->required();
  mc->add_option("--b", pb, "predictions of model B")->required();
  mc->add_option("--truth", truth, "true labels")->required();

  auto* abl = app.add_subcommand("ablation", "cross-validate the three feature groups");
  abl->add_option("--corpus", o.corpus, "conversations");
  abl->add_option("--labels", o.labels, "labels");
  abl->add_option("--output,-o", o.output, "data series TSV (default stdout)");

  auto* st = app.add_subcommand("stats", "length histogram and judge agreement");
  st->add_option("--corpus", o.corpus, "conversations");
  st->add_option("--labels", o.labels, "labels");
  st->add_option("--judgments", judgments, "judge flags per conversation");
  st->add_option("--quorum", quorum, "judges needed for egregious");
  st->add_option("--labels-out", labels_out, "write aggregated labels");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto cfg = resolve_config(o);
    if (gen->parsed()) return cmd_generate(cfg, o, out);
    if (feat->parsed()) return cmd_featurize(cfg, out, err);
    if (train->parsed()) return cmd_train(cfg, model_kind, out, err);
    if (eval->parsed()) return cmd_evaluate(cfg, predictions, out, err);
    if (cv->parsed()) return cmd_cv(cfg, models, pred_dir, per_fold, out, err);
    if (xd->parsed()) return cmd_crossdomain(cfg, models, out, err);
    if (reph->parsed()) return cmd_rephrase_report(cfg, traces, out, err);
    if (mc->parsed()) return cmd_mcnemar(pa, pb, truth, out);
    if (abl->parsed()) return cmd_ablation(cfg, out, err);
    if (st->parsed()) return cmd_stats(cfg, judgments, quorum, labels_out, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace egr
