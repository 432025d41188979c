#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "ronguard/ronguard.hpp"

namespace fs = std::filesystem;
using namespace ronguard;
using Catch::Matchers::ContainsSubstring;

namespace {

struct Run {
  int code;
  std::string output;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("ronguard_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run cli(const std::string& args) {
  const auto log = path("last_output.txt");
  const std::string cmd = std::string(RONGUARD_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::ranges::count(s, '\n')); }

const std::string& default_data() {
  static const std::string p = [] {
    const auto out = path("default.csv");
    REQUIRE(cli("synth --seed 1 --out " + out).code == 0);
    return out;
  }();
  return p;
}

}  // namespace

TEST_CASE("synth is deterministic and sized by its defaults") {
  const auto a = path("a.csv"), b = path("b.csv");
  REQUIRE(cli("synth --seed 7 --out " + a).code == 0);
  REQUIRE(cli("synth --seed 7 --out " + b).code == 0);
  REQUIRE(slurp(a) == slurp(b));
  REQUIRE(count_lines(slurp(a)) == 1 + 800);
  std::ostringstream expected;
  write_csv(expected, generate(SynthConfig{}, 7));
  REQUIRE(slurp(a) == expected.str());
}

TEST_CASE("invalid synth configuration exits 2 naming the flag and writes nothing") {
  const auto out = path("never.csv");
  const auto r = cli("synth --chips 0 --out " + out);
  REQUIRE(r.code == 2);
  REQUIRE_THAT(r.output, ContainsSubstring("--chips"));
  REQUIRE_FALSE(fs::exists(out));

  const auto r2 = cli("synth --drop-min 0.5 --drop-max 0.1 --out " + out);
  REQUIRE(r2.code == 2);
  REQUIRE_FALSE(fs::exists(out));
}

TEST_CASE("config file pre-populates flags and flags win") {
  const auto cfg = path("synth.ini");
  std::ofstream(cfg) << "[synth]\nchips = 4\nseed = 3\n";
  const auto a = path("cfg_a.csv"), b = path("cfg_b.csv");
  REQUIRE(cli("--config " + cfg + " synth --out " + a).code == 0);
  REQUIRE(count_lines(slurp(a)) == 1 + 4 * 25);
  REQUIRE(cli("--config " + cfg + " synth --chips 8 --out " + b).code == 0);
  REQUIRE(count_lines(slurp(b)) == 1 + 8 * 25);
  SynthConfig c;
  c.n_chips = 8;
  std::ostringstream expected;
  write_csv(expected, generate(c, 3));
  REQUIRE(slurp(b) == expected.str());
}

TEST_CASE("bench equals the library run with the same seed") {
  const auto prefix = path("bench1");
  REQUIRE(cli("bench --data " + default_data() + " --classifiers knn --sizes 6 --trials 1 --seed 1 --out " + prefix)
              .code == 0);
  const auto report = run_trials(load_csv(default_data()), {ClassifierSpec::parse("knn")}, {6}, 1, 1);
  REQUIRE(slurp(prefix + ".csv") == emit_report(report, ReportFormat::Csv));
  REQUIRE(slurp(prefix + ".md") == emit_report(report, ReportFormat::Markdown));
}

TEST_CASE("bench labels ensembles by their combination") {
  const auto prefix = path("bench_ens");
  REQUIRE(cli("bench --data " + default_data() +
              " --classifiers ensemble:svm+knn+gnb --sizes 6 --trials 1 --k 3 --c 1 --gamma 0.1 --out " + prefix)
              .code == 0);
  REQUIRE_THAT(slurp(prefix + ".md"), ContainsSubstring("## ensemble:svm+knn+gnb"));
}

TEST_CASE("bench rejects bad tokens and sizes") {
  const auto prefix = path("bench_bad");
  const auto r = cli("bench --data " + default_data() + " --classifiers knn,forest --out " + prefix);
  REQUIRE(r.code == 2);
  REQUIRE_THAT(r.output, ContainsSubstring("forest"));
  REQUIRE_THAT(r.output, ContainsSubstring("knn, svm, gnb, ensemble:"));
  REQUIRE(cli("bench --data " + default_data() + " --sizes 32 --k 2 --c 1 --gamma 0.1 --out " + prefix).code == 2);
  REQUIRE_FALSE(fs::exists(prefix + ".md"));
  REQUIRE_FALSE(fs::exists(prefix + ".csv"));
}

TEST_CASE("report re-renders bench csv") {
  const auto prefix = path("bench_rep");
  REQUIRE(cli("bench --data " + default_data() + " --classifiers knn,gnb --sizes 6,12 --trials 2 --k 2 --out " +
              prefix)
              .code == 0);
  const auto md = path("rerendered.md");
  REQUIRE(cli("report --in " + prefix + ".csv --out " + md).code == 0);
  REQUIRE(slurp(md) == slurp(prefix + ".md"));
}

TEST_CASE("k=1 knn memorizes its training file") {
  const auto model = path("knn1.model"), pred = path("pred.csv");
  REQUIRE(cli("train --data " + default_data() + " --classifier knn --k 1 --out " + model).code == 0);
  REQUIRE(cli("classify --model " + model + " --data " + default_data() + " --out " + pred).code == 0);
  const auto data = load_csv(default_data());
  std::istringstream rows(slurp(pred));
  std::string line;
  std::getline(rows, line);
  REQUIRE(line == "chip_id,region_id,predicted_label,score");
  std::size_t i = 0;
  while (std::getline(rows, line)) {
    const auto f = detail::split_commas(line);
    REQUIRE(f.size() == 4);
    REQUIRE(f[0] == data[i].chip_id);
    REQUIRE(f[2] == to_string(data[i].label()));
    ++i;
  }
  REQUIRE(i == data.size());
}

TEST_CASE("classify scores match the in-memory model") {
  const auto model = path("svm.model"), pred = path("pred_svm.csv");
  REQUIRE(cli("train --data " + default_data() + " --classifier svm --c 10 --gamma 0.1 --out " + model).code == 0);
  REQUIRE(cli("classify --model " + model + " --data " + default_data() + " --out " + pred).code == 0);

  const auto raw = load_csv(default_data());
  const auto scaler = fit_scaler(raw);
  const auto train = apply_scaler(scaler, raw);
  SvmParams p;
  p.c = 10.0;
  p.gamma = 0.1;
  p.class_weights = balanced_class_weights(train.count(Label::Golden), train.count(Label::Trojan));
  const Model m = svm_train(train, p);

  std::istringstream rows(slurp(pred));
  std::string line;
  std::getline(rows, line);
  for (std::size_t i = 0; std::getline(rows, line); ++i) {
    const auto f = detail::split_commas(line);
    const double expected = score(m, train[i].features);
    REQUIRE(std::stod(std::string(f[3])) == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("classify rejects a dataset with another feature count") {
  const auto model = path("gnb.model"), narrow = path("narrow.csv"), pred = path("pred_bad.csv");
  REQUIRE(cli("train --data " + default_data() + " --classifier ensemble:gnb+knn --out " + model).code == 0);
  REQUIRE(cli("synth --ros 6 --out " + narrow).code == 0);
  const auto r = cli("classify --model " + model + " --data " + narrow + " --out " + pred);
  REQUIRE(r.code == 2);
  REQUIRE_THAT(r.output, ContainsSubstring("6 features"));
  REQUIRE_FALSE(fs::exists(pred));
}

TEST_CASE("sweep and grid emit plot-ready csv deterministically") {
  const auto s1 = path("sweep1.csv"), s2 = path("sweep2.csv");
  REQUIRE(cli("sweep --data " + default_data() + " --seed 4 --reps 2 --out " + s1).code == 0);
  REQUIRE(cli("sweep --data " + default_data() + " --seed 4 --reps 2 --out " + s2).code == 0);
  const auto sweep = slurp(s1);
  REQUIRE(sweep == slurp(s2));
  REQUIRE(sweep.starts_with("param,accuracy,fpr,fnr\n1,"));
  REQUIRE(count_lines(sweep) == 1 + 40);

  const auto g1 = path("grid1.csv"), g2 = path("grid2.csv");
  const std::string args = "grid --data " + default_data() + " --c-values 10 --gamma-values 0.1 --reps 2 --seed 4";
  REQUIRE(cli(args + " --out " + g1).code == 0);
  REQUIRE(cli(args + " --out " + g2).code == 0);
  REQUIRE(slurp(g1) == slurp(g2));
  REQUIRE(count_lines(slurp(g1)) == 1 + 1);
  REQUIRE_THAT(slurp(g1), ContainsSubstring("\nc=10;gamma=0.1,"));

  REQUIRE(cli("grid --data " + default_data() + " --c-values 10,1 --out " + g1).code == 2);
}

TEST_CASE("help lists flags with defaults") {
  const auto r = cli("bench --help");
  REQUIRE(r.code == 0);
  for (const char* s : {"--trials", "20", "--sizes", "--seed", "--classifiers", "ensemble:knn+svm+gnb",
                        "--ensemble-tie-break", "prefer_positive", "--threads"})
    REQUIRE_THAT(r.output, ContainsSubstring(s));
  const auto t = cli("train --help");
  for (const char* s : {"--k", "--c", "--gamma", "0.1"}) REQUIRE_THAT(t.output, ContainsSubstring(s));
  REQUIRE(cli("frobnicate").code == 2);
}
