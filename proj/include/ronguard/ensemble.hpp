#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ronguard/gnb.hpp"
#include "ronguard/knn.hpp"
#include "ronguard/svm.hpp"

namespace ronguard {

enum class ClassifierKind { Knn, Svm, Gnb };

inline std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::Gnb: return "gnb";
  }
  return "?";
}

inline ClassifierKind parse_classifier_kind(std::string_view s) {
  if (s == "knn") return ClassifierKind::Knn;
  if (s == "svm") return ClassifierKind::Svm;
  if (s == "gnb") return ClassifierKind::Gnb;
  throw ArgumentError("unknown classifier '" + std::string(s) + "' (expected knn, svm or gnb)");
}

inline Label classify(const TrainedKnn& m, std::span<const double> query) { return knn_classify(m, query); }
inline Label classify(const TrainedSvm& m, std::span<const double> query) { return svm_classify(m, query); }
inline Label classify(const TrainedGnb& m, std::span<const double> query) { return gnb_classify(m, query).label; }

using MemberModel = std::variant<TrainedKnn, TrainedSvm, TrainedGnb>;

inline ClassifierKind kind_of(const MemberModel& m) { return static_cast<ClassifierKind>(m.index()); }

inline std::size_t n_features(const MemberModel& m) {
  return std::visit([](const auto& x) { return x.n_features(); }, m);
}

inline Label classify(const MemberModel& m, std::span<const double> query) {
  return std::visit(
      [&](const auto& x) -> Label {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrainedKnn>) return knn_classify(x, query);
        else if constexpr (std::is_same_v<T, TrainedSvm>) return svm_classify(x, query);
        else return gnb_classify(x, query).label;
      },
      m);
}

/// Continuous Trojan-ness score: KNN Trojan vote fraction, SVM decision
/// value, GNB Trojan posterior.
inline double score(const MemberModel& m, std::span<const double> query) {
  return std::visit(
      [&](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrainedKnn>) return knn_score(x, query);
        else if constexpr (std::is_same_v<T, TrainedSvm>) return svm_decision(x, query);
        else return gnb_classify(x, query).trojan_posterior;
      },
      m);
}

/// Plain majority vote over two or three distinct classifier kinds.
class TrainedEnsemble {
 public:
  TrainedEnsemble(std::vector<MemberModel> members, TieBreak tie_break)
      : members_(std::move(members)), tie_(tie_break) {
    if (members_.size() < 2 || members_.size() > 3) throw ArgumentError("ensemble needs 2 or 3 members");
    for (std::size_t i = 0; i < members_.size(); ++i) {
      for (std::size_t j = i + 1; j < members_.size(); ++j) {
        if (members_[i].index() == members_[j].index()) {
          throw ArgumentError("ensemble has duplicate member kind " + std::string(to_string(kind_of(members_[i]))));
        }
      }
      if (ronguard::n_features(members_[i]) != ronguard::n_features(members_[0])) {
        throw ArgumentError("ensemble members disagree on feature count");
      }
    }
  }

  const std::vector<MemberModel>& members() const noexcept { return members_; }
  TieBreak tie_break() const noexcept { return tie_; }
  std::size_t n_features() const { return ronguard::n_features(members_.front()); }

  /// "ensemble:knn+svm+gnb" in member order.
  std::string name() const {
    std::string n = "ensemble:";
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (i) n += '+';
      n += to_string(kind_of(members_[i]));
    }
    return n;
  }

 private:
  std::vector<MemberModel> members_;
  TieBreak tie_;
};

/// Combines member votes; a split vote resolves by the ensemble tie rule.
inline Label majority_vote(std::span<const Label> votes, TieBreak tie_break) {
  int tally = 0;
  for (Label v : votes) tally += sign(v);
  if (tally > 0) return Label::Trojan;
  if (tally < 0) return Label::Golden;
  return tie_label(tie_break);
}

inline std::vector<Label> ensemble_votes(const TrainedEnsemble& model, std::span<const double> query) {
  if (query.size() != model.n_features()) {
    throw ArgumentError("ensemble: query has " + std::to_string(query.size()) + " features, model has " +
                        std::to_string(model.n_features()));
  }
  std::vector<Label> votes;
  for (const auto& m : model.members()) votes.push_back(classify(m, query));
  return votes;
}

inline Label ensemble_classify(const TrainedEnsemble& model, std::span<const double> query) {
  return majority_vote(ensemble_votes(model, query), model.tie_break());
}

/// Any trained classifier, single or ensemble.
using Model = std::variant<TrainedKnn, TrainedSvm, TrainedGnb, TrainedEnsemble>;

inline std::size_t n_features(const Model& m) {
  return std::visit([](const auto& x) { return x.n_features(); }, m);
}

inline Label classify(const Model& m, std::span<const double> query) {
  return std::visit(
      [&](const auto& x) -> Label {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrainedEnsemble>) return ensemble_classify(x, query);
        else if constexpr (std::is_same_v<T, TrainedKnn>) return knn_classify(x, query);
        else if constexpr (std::is_same_v<T, TrainedSvm>) return svm_classify(x, query);
        else return gnb_classify(x, query).label;
      },
      m);
}

/// For an ensemble: fraction of members voting Trojan.
inline double score(const Model& m, std::span<const double> query) {
  return std::visit(
      [&](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TrainedEnsemble>) {
          const auto votes = ensemble_votes(x, query);
          return static_cast<double>(std::ranges::count(votes, Label::Trojan)) / static_cast<double>(votes.size());
        } else if constexpr (std::is_same_v<T, TrainedKnn>) {
          return knn_score(x, query);
        } else if constexpr (std::is_same_v<T, TrainedSvm>) {
          return svm_decision(x, query);
        } else {
          return gnb_classify(x, query).trojan_posterior;
        }
      },
      m);
}

inline std::string model_name(const Model& m) {
  if (const auto* e = std::get_if<TrainedEnsemble>(&m)) return e->name();
  return std::string(to_string(static_cast<ClassifierKind>(m.index())));
}

/// Classifies each row of `queries`.
template <typename M>
std::vector<Label> classify_batch(const M& model, const FeatureMatrix& queries) {
  std::vector<Label> out;
  out.reserve(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) out.push_back(classify(model, queries.row(i)));
  return out;
}

}  // namespace ronguard
