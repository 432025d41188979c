#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ronguard/dataset.hpp"
#include "ronguard/ensemble.hpp"

namespace ronguard {

// Plain-text model documents, versioned by the first line. Doubles are
// written with 17 significant digits so a reloaded model reproduces the
// original decision values exactly.
//
//   ronguard-model 1
//   scaler <n>
//   mean <n values>
//   stddev <n values>
//   model knn|svm|gnb|ensemble
//   ...kind-specific fields...
//   end

inline constexpr int kModelFormatVersion = 1;

/// A model together with the standardization it expects.
struct ModelBundle {
  Scaler scaler;
  Model model;
};

namespace detail {

inline std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_values(std::ostream& out, const std::vector<double>& v) {
  for (double x : v) out << ' ' << exact(x);
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw FormatError("model document ended unexpectedly");
    return w;
  }
  void expect(const std::string& keyword) {
    const auto w = word();
    if (w != keyword) throw FormatError("model document: expected '" + keyword + "', found '" + w + "'");
  }
  double number() {
    const auto w = word();
    double v = 0.0;
    if (!parse_double(w, v)) throw FormatError("model document: '" + w + "' is not a number");
    return v;
  }
  std::size_t count() {
    const auto w = word();
    long long v = 0;
    if (!parse_int(w, v) || v < 0) throw FormatError("model document: '" + w + "' is not a count");
    return static_cast<std::size_t>(v);
  }
  std::vector<double> numbers(std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = number();
    return v;
  }
  Label label() {
    try {
      return parse_label(word());
    } catch (const ArgumentError& e) {
      throw FormatError(std::string("model document: ") + e.what());
    }
  }
  TieBreak tie_break() {
    try {
      return parse_tie_break(word());
    } catch (const ArgumentError& e) {
      throw FormatError(std::string("model document: ") + e.what());
    }
  }

 private:
  std::istream& in_;
};

inline void write_member(std::ostream& out, const TrainedKnn& m) {
  out << "model knn\nn_features " << m.n_features() << "\nk " << m.k() << "\npoints " << m.points().rows() << '\n';
  for (std::size_t i = 0; i < m.points().rows(); ++i) {
    out << to_string(m.labels()[i]);
    for (double x : m.points().row(i)) out << ' ' << exact(x);
    out << '\n';
  }
  out << "end\n";
}

inline void write_member(std::ostream& out, const TrainedSvm& m) {
  out << "model svm\nn_features " << m.n_features() << "\ngamma " << exact(m.gamma()) << "\nc_negative "
      << exact(m.c_negative()) << "\nc_positive " << exact(m.c_positive()) << "\nbias " << exact(m.bias())
      << "\ntie_break " << to_string(m.tie_break()) << "\nsupport_vectors " << m.support_vectors().rows() << '\n';
  for (std::size_t i = 0; i < m.support_vectors().rows(); ++i) {
    out << to_string(m.labels()[i]) << ' ' << exact(m.alpha()[i]);
    for (double x : m.support_vectors().row(i)) out << ' ' << exact(x);
    out << '\n';
  }
  out << "end\n";
}

inline void write_member(std::ostream& out, const TrainedGnb& m) {
  out << "model gnb\nn_features " << m.n_features() << "\nvariance_floor " << exact(m.variance_floor())
      << "\ntie_break " << to_string(m.tie_break()) << '\n';
  for (Label l : {Label::Golden, Label::Trojan}) {
    out << "class " << to_string(l) << "\nprior " << exact(m.prior(l)) << "\nmean";
    write_values(out, m.mean(l));
    out << "\nvariance";
    write_values(out, m.variance(l));
    out << '\n';
  }
  out << "end\n";
}

inline void write_member(std::ostream& out, const TrainedEnsemble& m) {
  out << "model ensemble\ntie_break " << to_string(m.tie_break()) << "\nmembers " << m.members().size() << '\n';
  for (const auto& member : m.members()) std::visit([&](const auto& x) { write_member(out, x); }, member);
  out << "end\n";
}

inline Model read_model_body(TokenReader& r, bool allow_ensemble);

inline TrainedKnn read_knn(TokenReader& r) {
  r.expect("n_features");
  const auto d = r.count();
  r.expect("k");
  const auto k = r.count();
  r.expect("points");
  const auto n = r.count();
  FeatureMatrix pts(n, d);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = r.label();
    for (double& x : pts.row(i)) x = r.number();
  }
  r.expect("end");
  return TrainedKnn(std::move(pts), std::move(labels), static_cast<int>(k));
}

inline TrainedSvm read_svm(TokenReader& r) {
  r.expect("n_features");
  const auto d = r.count();
  r.expect("gamma");
  const double gamma = r.number();
  r.expect("c_negative");
  const double c_neg = r.number();
  r.expect("c_positive");
  const double c_pos = r.number();
  r.expect("bias");
  const double bias = r.number();
  r.expect("tie_break");
  const auto tie = r.tie_break();
  r.expect("support_vectors");
  const auto n = r.count();
  FeatureMatrix sv(n, d);
  std::vector<double> alpha(n);
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = r.label();
    alpha[i] = r.number();
    for (double& x : sv.row(i)) x = r.number();
  }
  r.expect("end");
  return TrainedSvm(std::move(sv), std::move(alpha), std::move(labels), bias, gamma, c_neg, c_pos, tie);
}

inline TrainedGnb read_gnb(TokenReader& r) {
  r.expect("n_features");
  const auto d = r.count();
  r.expect("variance_floor");
  const double floor = r.number();
  r.expect("tie_break");
  const auto tie = r.tie_break();
  std::array<double, 2> priors{};
  std::array<std::vector<double>, 2> means, vars;
  for (Label l : {Label::Golden, Label::Trojan}) {
    r.expect("class");
    r.expect(std::string(to_string(l)));
    const auto c = class_index(l);
    r.expect("prior");
    priors[c] = r.number();
    r.expect("mean");
    means[c] = r.numbers(d);
    r.expect("variance");
    vars[c] = r.numbers(d);
  }
  r.expect("end");
  return TrainedGnb(priors, std::move(means), std::move(vars), floor, tie);
}

inline Model read_model_body(TokenReader& r, bool allow_ensemble) {
  r.expect("model");
  const auto kind = r.word();
  if (kind == "knn") return read_knn(r);
  if (kind == "svm") return read_svm(r);
  if (kind == "gnb") return read_gnb(r);
  if (kind == "ensemble" && allow_ensemble) {
    r.expect("tie_break");
    const auto tie = r.tie_break();
    r.expect("members");
    const auto n = r.count();
    std::vector<MemberModel> members;
    for (std::size_t i = 0; i < n; ++i) {
      Model m = read_model_body(r, false);
      std::visit(
          [&](auto&& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (!std::is_same_v<T, TrainedEnsemble>) members.emplace_back(std::move(x));
          },
          std::move(m));
    }
    r.expect("end");
    return TrainedEnsemble(std::move(members), tie);
  }
  throw FormatError("model document: unsupported model kind '" + kind + "'");
}

}  // namespace detail

inline void write_model(std::ostream& out, const ModelBundle& bundle) {
  const auto& sc = bundle.scaler;
  out << "ronguard-model " << kModelFormatVersion << "\nscaler " << sc.n_features() << "\nmean";
  detail::write_values(out, sc.mean());
  out << "\nstddev";
  detail::write_values(out, sc.stddev());
  out << '\n';
  std::visit([&](const auto& m) { detail::write_member(out, m); }, bundle.model);
}

inline ModelBundle read_model(std::istream& in) {
  detail::TokenReader r(in);
  r.expect("ronguard-model");
  const auto version = r.count();
  if (version != static_cast<std::size_t>(kModelFormatVersion)) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  r.expect("scaler");
  const auto d = r.count();
  r.expect("mean");
  auto mean = r.numbers(d);
  r.expect("stddev");
  auto sd = r.numbers(d);
  ModelBundle b{Scaler(std::move(mean), std::move(sd)), detail::read_model_body(r, true)};
  if (n_features(b.model) != d) throw FormatError("model and scaler feature counts differ");
  return b;
}

inline std::string to_document(const ModelBundle& bundle) {
  std::ostringstream out;
  write_model(out, bundle);
  return out.str();
}

inline ModelBundle from_document(const std::string& doc) {
  std::istringstream in(doc);
  return read_model(in);
}

inline ModelBundle load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open model '" + path + "'");
  return read_model(in);
}

}  // namespace ronguard
