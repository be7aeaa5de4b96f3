// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "egr/classifiers.hpp"
#include "egr/error.hpp"
#include "egr/evaluation.hpp"
#include "egr/features.hpp"
#include "egr/rephrase_analysis.hpp"
#include "support.hpp"

#ifndef EGR_PROPERTY_TESTS
#error "EGR_PROPERTY_TESTS must name the property test binary"
#endif

using namespace egr;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and limits.
constexpr double kPropertySeconds = 120.0;
constexpr double kExactTol = 1e-9;
constexpr double kChiSquareTol = 1e-6;
constexpr std::size_t kFuzzConversations = 10000;
constexpr std::size_t kFuzzJobs = 8;
constexpr std::size_t kInDomainN = 2000;
constexpr double kInDomainRate = 0.086;
constexpr std::uint64_t kSeedA = 7;
constexpr std::uint64_t kSeedB = 107;
constexpr std::size_t kFolds = 10;
constexpr double kEgrMinF1 = 0.80;
constexpr double kInDomainSeconds = 300.0;
constexpr std::size_t kCrossDomainN = 500;
constexpr double kMaxRelativeDrop = 0.15;
constexpr double kTextCrossMaxF1 = 0.2;
constexpr double kMcNemarAlpha = 0.01;
constexpr double kMotivationPoints = 5.0;
constexpr double kGradTol = 1e-4;
constexpr double kFiniteStep = 1e-6;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s %d %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ModelSpec spec(ModelKind kind, FeatureGroup group = FeatureGroup::All) {
  ModelSpec s;
  s.kind = kind;
  s.group = group;
  s.train.seed = kSeedA;
  return s;
}

void property_suite() {
  const auto t0 = Clock::now();
  const int status = std::system(EGR_PROPERTY_TESTS " > /dev/null 2>&1");
  const double secs = seconds_since(t0);
  const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  report(1, code == 0 && secs < kPropertySeconds,
         fmt("property suite: exit=%d in %.1fs (limit %.0fs)", code, secs, kPropertySeconds));
}

void oracle_equivalences() {
  test::Gen g(2024);
  double worst_exact = 0.0, worst_chi = 0.0;
  bool shape_ok = true;
  const auto note = [&](double got, double want) { worst_exact = std::max(worst_exact, std::abs(got - want)); };

  for (int n = 0; n < 1000; ++n) {
    const auto len = g.size(1, 80);
    const auto t = g.labels(len, g.real(0, 1)), p = g.labels(len, g.real(0, 1));
    for (auto pos : {Label::Egregious, Label::NonEgregious}) {
      const auto a = prf(t, p, pos);
      const auto b = test::oracle_prf(t, p, pos);
      note(a.precision, b.p);
      note(a.recall, b.r);
      note(a.f1, b.f);
    }
  }

  const auto& res = test::synth_res();
  for (int n = 0; n < 1000; ++n) {
    const auto conv = test::fuzz_conversation(g);
    const auto got = detect_agent_repeats(conv, res);
    const auto want = test::oracle_agent_repeats(conv, *res.embeddings, res.config.similarity_threshold);
    if (got.size() != want.size()) {
      shape_ok = false;
      continue;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      shape_ok = shape_ok && got[i].first_turn_index == want[i].i && got[i].second_turn_index == want[i].j;
      note(got[i].similarity, want[i].sim);
    }
  }

  note(cohens_kappa({true, false, true}, {true, false, true}), 1.0);
  note(cohens_kappa({true, true, false, false}, {true, false, false, true}), 0.0);
  note(cohens_kappa({true, false}, {false, true}), -1.0);
  for (int n = 0; n < 1000; ++n) {
    auto a = g.bits(g.size(2, 40));
    auto b = g.bits(a.size());
    a[0] = b[1] = true;
    a[1] = b[0] = false;
    note(cohens_kappa(a, b), test::oracle_kappa(a, b));
  }

  const auto m = mcnemar_counts(10, 2);
  note(m.statistic, 49.0 / 12.0);
  note(*m.exact_p_value, test::oracle_binom_two_sided(10, 2));
  note(mcnemar_counts(5, 5).statistic, 0.1);
  worst_chi = std::max(worst_chi, std::abs(m.p_value - test::oracle_chi2_sf_df1(49.0 / 12.0)));
  for (double x : {0.1, 1.0, 4.0, 10.0}) {
    worst_chi = std::max(worst_chi, std::abs(chi_square_sf(x, 1) - test::oracle_chi2_sf_df1(x)));
  }

  report(2, shape_ok && worst_exact <= kExactTol && worst_chi <= kChiSquareTol,
         fmt("oracle equivalences: max exact err %.2e (tol %.0e), max chi-square err %.2e (tol %.0e)", worst_exact,
             kExactTol, worst_chi, kChiSquareTol));
}

void feature_contract() {
  test::Gen g(31337);
  std::vector<Conversation> convs;
  convs.reserve(kFuzzConversations);
  for (std::size_t i = 0; i < kFuzzConversations; ++i) {
    convs.push_back(test::fuzz_conversation(g, 20, "f" + std::to_string(i)));
  }
  const auto& res = test::synth_res();
  const auto a = featurize_corpus(convs, res, 1);
  const auto b = featurize_corpus(convs, res, 1);
  const auto c = featurize_corpus(convs, res, kFuzzJobs);
  const auto stats = fit_normalizer(convs);
  std::size_t out_of_range = 0, mismatched = 0;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    mismatched += !(a[i].values == b[i].values && a[i].values == c[i].values && a[i].total_turns == c[i].total_turns);
    for (double x : finalize(a[i], stats).values) out_of_range += !(x >= 0.0 && x <= 1.0);
  }
  report(3, out_of_range == 0 && mismatched == 0,
         fmt("feature contract: %zu fuzzed conversations, %zu values outside [0,1], %zu differ across runs/jobs=1,%zu",
             convs.size(), out_of_range, mismatched, kFuzzJobs));
}

struct InDomain {
  Dataset data;
  SyntheticCorpus corpus;
  double egr_f1 = 0.0;
  CvResult egr;
};

InDomain in_domain() {
  const auto t0 = Clock::now();
  auto cfg = GeneratorConfig::domain_a(kSeedA, kInDomainN);
  cfg.egregious_rate = kInDomainRate;
  InDomain out;
  out.corpus = generate_corpus(cfg, test::synth_res());
  out.data = make_dataset(out.corpus.conversations, test::synth_res(), 0);
  const CvOptions opts{kFolds, kSeedA, true, 0};
  const auto rule = cross_validate(out.data, spec(ModelKind::Rule), test::synth_res(), opts);
  const auto text = cross_validate(out.data, spec(ModelKind::Text), test::synth_res(), opts);
  out.egr = cross_validate(out.data, spec(ModelKind::Egr), test::synth_res(), opts);
  out.egr_f1 = out.egr.aggregate.egregious.f1;
  const double secs = seconds_since(t0);
  const double r = rule.aggregate.egregious.f1, t = text.aggregate.egregious.f1;
  report(4, out.egr_f1 >= kEgrMinF1 && out.egr_f1 > r && out.egr_f1 > t && secs < kInDomainSeconds,
         fmt("in-domain %zu-fold CV egregious F1: egr %.3f (min %.2f), text %.3f, rule %.3f, %.1fs (limit %.0fs)",
             kFolds, out.egr_f1, kEgrMinF1, t, r, secs, kInDomainSeconds));
  return out;
}

void cross_domain(const InDomain& a) {
  auto cfg = GeneratorConfig::domain_b(kSeedB, kCrossDomainN);
  cfg.egregious_rate = kInDomainRate;
  const auto corpus = generate_corpus(cfg, test::synth_res());
  const auto b = make_dataset(corpus.conversations, test::synth_res(), 0);
  const auto egr = cross_domain_eval(a.data, b, spec(ModelKind::Egr), test::synth_res());
  const auto text = cross_domain_eval(a.data, b, spec(ModelKind::Text), test::synth_res());
  const double drop = (a.egr_f1 - egr.report.egregious.f1) / a.egr_f1;
  const auto mc = mcnemar(egr.predictions, text.predictions, b.labels);
  report(5, drop <= kMaxRelativeDrop && text.report.egregious.f1 < kTextCrossMaxF1 && mc.p_value < kMcNemarAlpha,
         fmt("cross-domain egregious F1: egr %.3f (drop %.1f%%, max %.0f%%), text %.3f (max %.2f), "
             "McNemar p=%.2e (max %.2f)",
             egr.report.egregious.f1, 100 * drop, 100 * kMaxRelativeDrop, text.report.egregious.f1, kTextCrossMaxF1,
             mc.p_value, kMcNemarAlpha));
}

void ablation(const InDomain& a) {
  const CvOptions opts{kFolds, kSeedA, true, 0};
  const double f_agent =
      cross_validate(a.data, spec(ModelKind::Egr, FeatureGroup::Agent), test::synth_res(), opts).aggregate.egregious.f1;
  const double f_cust = cross_validate(a.data, spec(ModelKind::Egr, FeatureGroup::AgentCustomer), test::synth_res(),
                                       opts).aggregate.egregious.f1;
  const double f_all = a.egr_f1;
  report(6, f_agent < f_cust && f_cust < f_all,
         fmt("ablation egregious F1: agent %.3f < +customer %.3f < +interaction %.3f", f_agent, f_cust, f_all));
}

void motivations(const InDomain& a) {
  const auto measured = motivation_distribution(a.corpus.conversations, test::synth_res(), 0);
  const auto planted = planted_motivations(a.corpus.traces);
  double worst = 0.0;
  for (auto cls : {Label::Egregious, Label::NonEgregious}) {
    const auto m = measured.of(cls).percentages(), p = planted.of(cls).percentages();
    for (std::size_t i = 0; i < m.size(); ++i) worst = std::max(worst, std::abs(m[i] - p[i]));
  }
  const bool nonempty = !planted.egregious.empty() && !planted.non_egregious.empty();
  report(7, nonempty && worst <= kMotivationPoints,
         fmt("rephrase motivations: max deviation from planted %.2f points (max %.0f) over %zu+%zu pairs", worst,
             kMotivationPoints, measured.egregious.total(), measured.non_egregious.total()));
}

void svm_checks() {
  test::Gen g(99);
  // Separable toy set: labels from a fixed hyperplane, points kept off a margin band.
  const std::size_t dim = 5;
  const auto w_true = g.vec(dim);
  std::vector<std::vector<double>> x;
  std::vector<Label> y;
  while (x.size() < 200) {
    auto p = g.vec(dim);
    const double m = std::inner_product(p.begin(), p.end(), w_true.begin(), 0.3);
    if (std::abs(m) < 0.3) continue;
    x.push_back(std::move(p));
    y.push_back(m > 0 ? Label::Egregious : Label::NonEgregious);
  }
  TrainConfig cfg;
  cfg.regularization_strength = 100.0;
  cfg.epochs = 200;
  cfg.seed = 5;
  const auto model = train_svm(x, y, cfg);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) correct += predict(model, x[i]).label == y[i];

  const auto again = train_svm(x, y, cfg);
  const bool identical = again.weights == model.weights && again.bias == model.bias;

  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const auto rows = g.size(2, 12), d = g.size(1, 6);
    std::vector<std::vector<double>> bx;
    for (std::size_t i = 0; i < rows; ++i) bx.push_back(g.vec(d));
    auto by = g.labels(rows);
    by[0] = Label::Egregious;
    by[1] = Label::NonEgregious;
    LinearModel m{g.vec(d, -2, 2), g.real(-1, 1)};
    bool kink = false;
    for (std::size_t i = 0; i < rows; ++i) {
      const double yi = is_egregious(by[i]) ? 1.0 : -1.0;
      kink = kink || std::abs(1.0 - yi * std::inner_product(bx[i].begin(), bx[i].end(), m.weights.begin(), m.bias)) <
                         1e-3;
    }
    if (kink) continue;
    const auto grad = svm_subgradient(m, bx, by, cfg);
    for (std::size_t k = 0; k <= d; ++k) {
      auto plus = m, minus = m;
      (k < d ? plus.weights[k] : plus.bias) += kFiniteStep;
      (k < d ? minus.weights[k] : minus.bias) -= kFiniteStep;
      const double fd = (svm_objective(plus, bx, by, cfg) - svm_objective(minus, bx, by, cfg)) / (2 * kFiniteStep);
      worst = std::max(worst, std::abs(fd - (k < d ? grad.weights[k] : grad.bias)));
    }
  }
  report(8, correct == x.size() && worst <= kGradTol && identical,
         fmt("svm: separable toy accuracy %zu/%zu, max finite-difference err %.2e (tol %.0e), reruns %s", correct,
             x.size(), worst, kGradTol, identical ? "bit-identical" : "differ"));
}

}  // namespace

int main() {
  try {
    property_suite();
    oracle_equivalences();
    feature_contract();
    const auto a = in_domain();
    cross_domain(a);
    ablation(a);
    motivations(a);
    svm_checks();
  } catch (const std::exception& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
