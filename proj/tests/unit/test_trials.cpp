#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include "ronguard/report.hpp"
#include "ronguard/synth.hpp"
#include "ronguard/trials.hpp"

using namespace ronguard;
using Catch::Matchers::ContainsSubstring;

namespace {

const LabeledDataset& default_corpus() {
  static const LabeledDataset d = generate(SynthConfig{}, 1);
  return d;
}

TrialOptions fixed_options() {
  TrialOptions o;
  o.fixed_k = 2;
  o.fixed_svm = {{1.0, 0.1}};
  return o;
}

TrialReport fabricated() {
  TrialReport r;
  r.classifiers = {"knn"};
  r.sizes = {6, 12, 24};
  r.n_trials = 20;
  r.rows = {{"knn", 6, {0.916, 0.813, 0.187, 0.075, 0.916}},
            {"knn", 12, {0.927, 0.815, 0.185, 0.063, 0.927}},
            {"knn", 24, {0.949, 0.906, 0.094, 0.051, 0.945}}};
  return r;
}

}  // namespace

TEST_CASE("classifier spec tokens") {
  const auto e = ClassifierSpec::parse("ensemble:svm+knn+gnb");
  REQUIRE(e.name == "ensemble:svm+knn+gnb");
  REQUIRE(e.members == std::vector{ClassifierKind::Svm, ClassifierKind::Knn, ClassifierKind::Gnb});
  REQUIRE_FALSE(ClassifierSpec::parse("gnb").is_ensemble());
  REQUIRE_THROWS_AS(ClassifierSpec::parse("ensemble:knn"), ArgumentError);
  REQUIRE_THROWS_AS(ClassifierSpec::parse("ensemble:knn+knn"), ArgumentError);
  REQUIRE_THROWS_AS(ClassifierSpec::parse("ensemble:knn+svm+gnb+knn"), ArgumentError);
  REQUIRE_THROWS_AS(ClassifierSpec::parse("forest"), ArgumentError);
  REQUIRE(standard_classifiers().size() == 7);
}

TEST_CASE("one trial equals a hand-run pipeline") {
  const auto& d = default_corpus();
  const auto report = run_trials(d, {ClassifierSpec::parse("knn")}, {6}, 1, 77, fixed_options());

  const auto split = split_by_chip(d, 6, derive_seed(77, {detail::kSplitStream, 6, 0}));
  const auto scaler = fit_scaler(split.train);
  const auto model = knn_train(apply_scaler(scaler, split.train), 2);
  const auto test = apply_scaler(scaler, split.test);
  const auto counts = confusion(classify_batch(model, test.feature_matrix()), test.labels());

  REQUIRE(report.trials.size() == 1);
  REQUIRE(report.trials[0].counts == counts);
  REQUIRE(report.rows.size() == 1);
  REQUIRE(report.row("knn", 6).mean == rates(counts));
}

TEST_CASE("default protocol shape and per-trial identities") {
  const auto report = run_trials(default_corpus(), standard_classifiers(), {6, 12, 24}, 20, 1);
  REQUIRE(report.rows.size() == 7 * 3);
  REQUIRE(report.trials.size() == 7 * 3 * 20);
  for (const auto& r : report.rows) {
    for (double v : {r.mean.tpr, r.mean.tnr, r.mean.fpr, r.mean.fnr, r.mean.accuracy}) {
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
    }
  }
  for (const auto& t : report.trials) {
    REQUIRE(t.metrics.tpr + t.metrics.fnr == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(t.metrics.tnr + t.metrics.fpr == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(t.counts.total() == 25u * (32u - t.size));
  }
  REQUIRE(report.tuning.size() == 3);
  for (const auto& p : report.tuning) {
    REQUIRE(p.k >= 1);
    REQUIRE(p.k <= 40);
  }
}

TEST_CASE("report is invariant to classifier order and threading") {
  const auto& d = default_corpus();
  auto specs = standard_classifiers();
  TrialOptions serial;
  serial.validation.n_reps = 3;
  const auto a = run_trials(d, specs, {6, 12}, 4, 9, serial);

  std::ranges::reverse(specs);
  TrialOptions threaded = serial;
  threaded.threads = 4;
  const auto b = run_trials(d, specs, {6, 12}, 4, 9, threaded);
  for (const auto& r : a.rows) REQUIRE(b.row(r.classifier, r.size).mean == r.mean);
  REQUIRE(a.tuning.size() == b.tuning.size());
}

TEST_CASE("per-trial tuning records one entry per trial") {
  TrialOptions o;
  o.tune_per_trial = true;
  o.validation.n_reps = 2;
  o.fixed_svm = {{1.0, 0.1}};
  const auto r = run_trials(default_corpus(), {ClassifierSpec::parse("knn")}, {12}, 3, 2, o);
  REQUIRE(r.tuning.size() == 3);
}

TEST_CASE("svm false positives fall with more training chips on a high-signal corpus") {
  SynthConfig c;
  c.trojan_drop_rel_min = 0.02;
  c.trojan_drop_rel_max = 0.03;
  const auto r = run_trials(generate(c, 5), {ClassifierSpec::parse("svm")}, {6, 24}, 20, 5);
  REQUIRE(r.row("svm", 24).mean.fpr <= r.row("svm", 6).mean.fpr);
}

TEST_CASE("run_trials preconditions") {
  const auto& d = default_corpus();
  REQUIRE_THROWS_AS(run_trials(d, {}, {6}, 1, 1), ArgumentError);
  REQUIRE_THROWS_AS(run_trials(d, standard_classifiers(), {32}, 1, 1), ArgumentError);
  REQUIRE_THROWS_AS(run_trials(d, standard_classifiers(), {6}, 0, 1), ArgumentError);
  REQUIRE_THROWS_AS(run_trials(d, standard_classifiers(), {}, 1, 1), ArgumentError);
}

TEST_CASE("markdown report layout") {
  const auto md = emit_report(fabricated(), ReportFormat::Markdown);
  REQUIRE_THAT(md, ContainsSubstring("## knn"));
  REQUIRE_THAT(md, ContainsSubstring("| Metric | 6 Samples | 12 Samples | 24 Samples |"));
  REQUIRE_THAT(md, ContainsSubstring("| FPR | 0.187 | 0.185 | 0.094 |"));
  REQUIRE_THAT(md, ContainsSubstring("| Accuracy | 0.916 | 0.927 | 0.945 |"));
  REQUIRE_THAT(md, ContainsSubstring("FPR ~ 0.50"));
  const auto tnr = md.find("| TNR"), fpr = md.find("| FPR"), fnr = md.find("| FNR"), tpr = md.find("| TPR"),
             acc = md.find("| Accuracy");
  REQUIRE(tnr < fpr);
  REQUIRE(fpr < fnr);
  REQUIRE(fnr < tpr);
  REQUIRE(tpr < acc);
}

TEST_CASE("empty reports are rejected") {
  TrialReport r = fabricated();
  r.classifiers.clear();
  REQUIRE_THROWS_AS(emit_report(r, ReportFormat::Markdown), ArgumentError);
  REQUIRE_THROWS_AS(emit_report(r, ReportFormat::Csv), ArgumentError);
}

TEST_CASE("csv long form round-trips into the same markdown") {
  TrialOptions o = fixed_options();
  const auto report =
      run_trials(default_corpus(), {ClassifierSpec::parse("knn"), ClassifierSpec::parse("ensemble:svm+gnb")}, {6, 12},
                 5, 3, o);
  const auto csv = emit_report(report, ReportFormat::Csv);
  REQUIRE(csv.starts_with("classifier,size,trial,tp,tn,fp,fn,tpr,tnr,fpr,fnr,accuracy\n"));
  REQUIRE(std::ranges::count(csv, '\n') == 1 + 2 * 2 * 5);
  std::istringstream in(csv);
  const auto back = read_report_csv(in);
  REQUIRE(back.classifiers == report.classifiers);
  REQUIRE(back.sizes == report.sizes);
  REQUIRE(back.n_trials == 5);
  REQUIRE(emit_report(back, ReportFormat::Markdown) == emit_report(report, ReportFormat::Markdown));
}

TEST_CASE("malformed report csv") {
  std::istringstream bad_header("classifier,size\n");
  REQUIRE_THROWS_AS(read_report_csv(bad_header), SchemaError);
  std::istringstream bad_row(std::string(kTrialCsvHeader) + "\nknn,6,0,1,2,x,0,0,0,0,0,0\n");
  REQUIRE_THROWS_AS(read_report_csv(bad_row), RowError);
  std::istringstream empty("");
  REQUIRE_THROWS_AS(read_report_csv(empty), EmptyDatasetError);
}

TEST_CASE("report format tokens") {
  REQUIRE(parse_report_format("csv") == ReportFormat::Csv);
  REQUIRE(parse_report_format("markdown") == ReportFormat::Markdown);
  REQUIRE_THROWS_AS(parse_report_format("html"), ArgumentError);
}
