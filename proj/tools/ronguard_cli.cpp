#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "ronguard/ronguard.hpp"

namespace fs = std::filesystem;
using namespace ronguard;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

constexpr const char* kClassifierTokens = "knn, svm, gnb, ensemble:<a>+<b>[+<c>] with distinct members from knn/svm/gnb";

/// Writes next to the target and renames, so a failed run leaves no partial file.
void write_atomically(const std::string& path, const std::string& contents) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot write '" + path + "'");
    out << contents;
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("failed writing '" + path + "'");
    }
  }
  fs::rename(tmp, target);
}

/// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Feature count implied by a dataset header (columns after the four id columns).
std::size_t header_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open dataset '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw EmptyDatasetError("dataset file '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto n = detail::split_commas(line).size();
  if (n <= 4) throw SchemaError("f1", "dataset header has no feature columns");
  return n - 4;
}

LabeledDataset load_dataset(const std::string& path) { return load_csv(path, header_features(path)); }

std::vector<ClassifierSpec> parse_classifiers(const std::vector<std::string>& tokens) {
  std::vector<ClassifierSpec> specs;
  for (const auto& t : tokens) {
    try {
      specs.push_back(ClassifierSpec::parse(t));
    } catch (const ArgumentError& e) {
      throw ArgumentError("invalid classifier '" + t + "': " + e.what() + "; valid tokens: " + kClassifierTokens);
    }
    for (std::size_t i = 0; i + 1 < specs.size(); ++i)
      if (specs[i].name == t) throw ArgumentError("classifier '" + t + "' listed twice");
  }
  return specs;
}

struct SvmFlags {
  bool unbalanced = false;
  double tol = 1e-3;
  long max_passes = 10000;

  void add(CLI::App& app) {
    app.add_flag("--no-balanced", unbalanced, "Use plain C for both classes instead of inverse-frequency weights");
    app.add_option("--tol", tol, "SMO KKT tolerance")->check(CLI::PositiveNumber);
    app.add_option("--max-passes", max_passes, "SMO iteration cap in units of n pair updates")
        ->check(CLI::PositiveNumber);
  }
  SvmTuningOptions options() const { return {!unbalanced, tol, max_passes}; }
};

struct ValidationFlags {
  std::size_t reps = 10;
  double train_fraction = 0.75;

  void add(CLI::App& app) {
    app.add_option("--reps", reps, "Validation repetitions")->check(CLI::PositiveNumber);
    app.add_option("--train-fraction", train_fraction, "Chip fraction used for training inside validation")
        ->check(CLI::Range(0.0, 1.0));
  }
};

// ---------------------------------------------------------------------------

struct SynthCmd {
  SynthConfig config;
  std::uint64_t seed = 1;
  std::string out;
  unsigned threads = 1;

  void add(CLI::App& app) {
    auto* c = app.add_subcommand("synth", "Generate a synthetic RON fingerprint dataset");
    c->add_option("--seed", seed, "Root seed");
    c->add_option("--out", out, "Output dataset CSV")->required();
    c->add_option("--chips", config.n_chips, "Number of chips")->check(CLI::PositiveNumber);
    c->add_option("--ros", config.n_ros, "Ring oscillators per chip")->check(CLI::PositiveNumber);
    c->add_option("--f-nominal", config.f_nominal, "Nominal RO frequency in Hz")->check(CLI::PositiveNumber);
    c->add_option("--sigma-chip", config.sigma_chip_rel, "Relative chip-level process spread")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--sigma-ro", config.sigma_ro_rel, "Relative per-RO process spread")->check(CLI::NonNegativeNumber);
    c->add_option("--sigma-meas", config.sigma_meas_rel, "Relative measurement noise per read")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--meas-avg", config.n_meas_avg, "Reads averaged per sample")->check(CLI::PositiveNumber);
    c->add_option("--golden-per-chip", config.n_golden_per_chip, "Golden samples per chip")
        ->check(CLI::PositiveNumber);
    c->add_option("--trojan-per-chip", config.n_trojan_per_chip, "Trojan samples per chip")
        ->check(CLI::PositiveNumber);
    c->add_option("--drop-min", config.trojan_drop_rel_min, "Smallest relative Trojan frequency drop")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--drop-max", config.trojan_drop_rel_max, "Largest relative Trojan frequency drop")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--decay", config.locality_decay, "Drop attenuation per RO of distance")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--threads", threads, "Worker threads (0 = all cores)");
    c->callback([this] { run(); });
  }

  void run() const {
    validate(config);
    std::ostringstream csv;
    write_csv(csv, generate(config, seed, threads));
    write_atomically(out, csv.str());
  }
};

struct TrainCmd {
  std::string data, out, classifier = "knn";
  int k = 2;
  double c = 1.0, gamma = 0.1, variance_floor = kDefaultVarianceFloor;
  std::string tie_break = "prefer_positive", ensemble_tie_break = "prefer_positive";
  SvmFlags svm;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "Fit a classifier on a dataset and save it with its scaler");
    cmd->add_option("--data", data, "Training dataset CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output model file")->required();
    cmd->add_option("--classifier", classifier, std::string("Classifier token: ") + kClassifierTokens);
    cmd->add_option("--k", k, "KNN neighbours")->check(CLI::PositiveNumber);
    cmd->add_option("--c", c, "SVM penalty C")->check(CLI::PositiveNumber);
    cmd->add_option("--gamma", gamma, "RBF kernel width")->check(CLI::PositiveNumber);
    cmd->add_option("--var-floor", variance_floor, "GNB variance floor")->check(CLI::PositiveNumber);
    cmd->add_option("--tie-break", tie_break, "SVM/GNB exact-tie rule")
        ->check(CLI::IsMember({"prefer_positive", "prefer_negative"}));
    cmd->add_option("--ensemble-tie-break", ensemble_tie_break, "Split-vote rule for two-member ensembles")
        ->check(CLI::IsMember({"prefer_positive", "prefer_negative"}));
    svm.add(*cmd);
    cmd->callback([this] { run(); });
  }

  MemberModel fit(ClassifierKind kind, const LabeledDataset& train) const {
    const auto tie = parse_tie_break(tie_break);
    switch (kind) {
      case ClassifierKind::Knn: return knn_train(train, k);
      case ClassifierKind::Svm: {
        SvmParams p;
        p.c = c;
        p.gamma = gamma;
        p.tol = svm.tol;
        p.max_passes = svm.max_passes;
        p.tie_break = tie;
        if (!svm.unbalanced) p.class_weights = balanced_class_weights(train.count(Label::Golden), train.count(Label::Trojan));
        return svm_train(train, p);
      }
      case ClassifierKind::Gnb: return gnb_train(train, variance_floor, tie);
    }
    throw ArgumentError("unknown classifier kind");
  }

  void run() const {
    const auto spec = parse_classifiers({classifier}).front();
    const auto raw = load_dataset(data);
    const Scaler scaler = fit_scaler(raw);
    const auto train = apply_scaler(scaler, raw);
    auto build = [&]() -> Model {
      if (!spec.is_ensemble()) return std::visit([](auto&& m) -> Model { return m; }, fit(spec.members.front(), train));
      std::vector<MemberModel> members;
      for (auto kind : spec.members) members.push_back(fit(kind, train));
      return TrainedEnsemble(std::move(members), parse_tie_break(ensemble_tie_break));
    };
    write_atomically(out, to_document({scaler, build()}));
  }
};

struct ClassifyCmd {
  std::string model_path, data, out;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("classify", "Label every sample of a dataset with a saved model");
    cmd->add_option("--model", model_path, "Model file from train")->required()->check(CLI::ExistingFile);
    cmd->add_option("--data", data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output predictions CSV")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto bundle = load_model(model_path);
    const auto features = header_features(data);
    if (features != bundle.scaler.n_features()) {
      throw ArgumentError("dataset '" + data + "' has " + std::to_string(features) + " features, model expects " +
                          std::to_string(bundle.scaler.n_features()));
    }
    const auto ds = apply_scaler(bundle.scaler, load_csv(data, features));
    std::ostringstream csv;
    csv << "chip_id,region_id,predicted_label,score\n";
    for (const auto& s : ds.samples()) {
      csv << s.chip_id << ',' << s.region_id << ',' << to_string(classify(bundle.model, s.features)) << ','
          << num(score(bundle.model, s.features)) << '\n';
    }
    write_atomically(out, csv.str());
  }
};

std::string score_row(const std::string& param, const ValidationScore& s) {
  return param + ',' + num(s.accuracy) + ',' + num(s.fpr) + ',' + num(s.fnr) + '\n';
}

struct SweepCmd {
  std::string data, out;
  int k_min = 1, k_max = 40;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double slack = 0.02;
  ValidationFlags validation;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("sweep", "Validation accuracy/FPR/FNR of KNN over a range of k");
    cmd->add_option("--data", data, "Training dataset CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output CSV (param,accuracy,fpr,fnr)")->required();
    cmd->add_option("--k-min", k_min, "Smallest k")->check(CLI::PositiveNumber);
    cmd->add_option("--k-max", k_max, "Largest k")->check(CLI::PositiveNumber);
    cmd->add_option("--slack", slack, "Accuracy slack when picking the reported k")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--seed", seed, "Root seed");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    validation.add(*cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    if (k_min > k_max) throw ArgumentError("--k-min must not exceed --k-max");
    ValidationPlan plan;
    plan.n_reps = validation.reps;
    plan.train_fraction = validation.train_fraction;
    plan.threads = threads;
    const auto results = k_sweep(load_dataset(data), k_min, k_max, plan, seed);
    std::string csv = "param,accuracy,fpr,fnr\n";
    for (const auto& r : results) csv += score_row(std::to_string(r.k), r.score);
    write_atomically(out, csv);
    std::cout << "selected k=" << select_k(results, slack) << '\n';
  }
};

struct GridCmd {
  std::string data, out, tie_break = "prefer_positive";
  GridSpec grid;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  ValidationFlags validation;
  SvmFlags svm;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("grid", "Validation grid search over SVM (C, gamma)");
    cmd->add_option("--data", data, "Training dataset CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output CSV (param,accuracy,fpr,fnr)")->required();
    cmd->add_option("--c-values", grid.c_values, "Comma-separated C values")->delimiter(',');
    cmd->add_option("--gamma-values", grid.gamma_values, "Comma-separated gamma values")->delimiter(',');
    cmd->add_option("--tie-break", tie_break, "Rule for a decision value of exactly 0")
        ->check(CLI::IsMember({"prefer_positive", "prefer_negative"}));
    cmd->add_option("--seed", seed, "Root seed");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    validation.add(*cmd);
    svm.add(*cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    grid.validate();
    ValidationPlan plan;
    plan.n_reps = validation.reps;
    plan.train_fraction = validation.train_fraction;
    plan.threads = threads;
    plan.tie_break = parse_tie_break(tie_break);
    const auto result = grid_search(load_dataset(data), grid, plan, seed, svm.options());
    std::string csv = "param,accuracy,fpr,fnr\n";
    for (const auto& cell : result.cells) csv += score_row("c=" + num(cell.c) + ";gamma=" + num(cell.gamma), cell.score);
    write_atomically(out, csv);
    std::cout << "best c=" << num(result.best.c) << " gamma=" << num(result.best.gamma) << '\n';
  }
};

struct BenchCmd {
  std::string data, out;
  std::vector<std::string> classifiers{"knn", "svm", "gnb", "ensemble:knn+svm+gnb", "ensemble:knn+svm",
                                       "ensemble:knn+gnb", "ensemble:svm+gnb"};
  std::vector<std::size_t> sizes{6, 12, 24};
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  int k = 0;
  double c = 0.0, gamma = 0.0;
  int k_max = 40;
  double slack = 0.02;
  bool tune_per_trial = false;
  std::string tie_break = "prefer_positive", ensemble_tie_break = "prefer_positive";
  GridSpec grid;
  unsigned threads = 1;
  ValidationFlags validation;
  SvmFlags svm;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench", "Repeated-trial benchmark; writes <out>.md and <out>.csv");
    cmd->add_option("--data", data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output path prefix")->required();
    cmd->add_option("--classifiers", classifiers, std::string("Comma-separated tokens: ") + kClassifierTokens)
        ->delimiter(',');
    cmd->add_option("--sizes", sizes, "Comma-separated training chip counts")->delimiter(',');
    cmd->add_option("--trials", trials, "Trials per size")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Root seed");
    cmd->add_option("--k", k, "Fixed KNN k (0 = tune by sweep)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--c", c, "Fixed SVM C (0 = tune by grid search; needs --gamma)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--gamma", gamma, "Fixed SVM gamma (0 = tune by grid search; needs --c)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--k-max", k_max, "Largest k considered when tuning")->check(CLI::PositiveNumber);
    cmd->add_option("--slack", slack, "Accuracy slack when picking k")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--c-values", grid.c_values, "Comma-separated C grid")->delimiter(',');
    cmd->add_option("--gamma-values", grid.gamma_values, "Comma-separated gamma grid")->delimiter(',');
    cmd->add_flag("--tune-per-trial", tune_per_trial, "Tune on every trial instead of the first of each size");
    cmd->add_option("--tie-break", tie_break, "SVM/GNB exact-tie rule")
        ->check(CLI::IsMember({"prefer_positive", "prefer_negative"}));
    cmd->add_option("--ensemble-tie-break", ensemble_tie_break, "Split-vote rule for two-member ensembles")
        ->check(CLI::IsMember({"prefer_positive", "prefer_negative"}));
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    validation.add(*cmd);
    svm.add(*cmd);
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto specs = parse_classifiers(classifiers);
    if (sizes.empty()) throw ArgumentError("--sizes is empty");
    if ((c > 0.0) != (gamma > 0.0)) throw ArgumentError("--c and --gamma must be given together");
    grid.validate();
    TrialOptions opt;
    opt.validation.n_reps = validation.reps;
    opt.validation.train_fraction = validation.train_fraction;
    opt.k_max = k_max;
    opt.accuracy_slack = slack;
    opt.grid = grid;
    opt.svm = svm.options();
    opt.tune_per_trial = tune_per_trial;
    if (k > 0) opt.fixed_k = k;
    if (c > 0.0) opt.fixed_svm = {{c, gamma}};
    opt.tie_break = parse_tie_break(tie_break);
    opt.ensemble_tie_break = parse_tie_break(ensemble_tie_break);
    opt.threads = threads;

    const auto report = run_trials(load_dataset(data), specs, sizes, trials, seed, opt);
    const auto md = emit_report(report, ReportFormat::Markdown);
    write_atomically(out + ".csv", emit_report(report, ReportFormat::Csv));
    write_atomically(out + ".md", md);
    std::cout << md;
  }
};

struct ReportCmd {
  std::string in, out, format = "markdown";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("report", "Re-render a bench CSV as markdown or CSV");
    cmd->add_option("--in", in, "Per-trial CSV written by bench")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "Output file")->required();
    cmd->add_option("--format", format, "markdown or csv")->check(CLI::IsMember({"markdown", "md", "csv"}));
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto fmt = parse_report_format(format);
    std::ifstream stream(in);
    if (!stream) throw ArgumentError("cannot open report '" + in + "'");
    write_atomically(out, emit_report(read_report_csv(stream), fmt));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Hardware Trojan detection from ring-oscillator frequency fingerprints", "ronguard");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file pre-populating flags; flags on the command line win");
  app.allow_config_extras(false);

  SynthCmd synth;
  TrainCmd train;
  ClassifyCmd classify_cmd;
  SweepCmd sweep;
  GridCmd grid;
  BenchCmd bench;
  ReportCmd report;
  synth.add(app);
  train.add(app);
  classify_cmd.add(app);
  sweep.add(app);
  grid.add(app);
  bench.add(app);
  report.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
