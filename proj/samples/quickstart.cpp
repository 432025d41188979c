// Generates a small corpus, trains each classifier on 24 chips and prints the
// held-out rates.
#include <cstdio>

#include "ronguard/ronguard.hpp"

using namespace ronguard;

int main() {
  const LabeledDataset data = generate(SynthConfig{}, 7);
  const auto split = split_by_chip(data, 24, 7);
  const Scaler scaler = fit_scaler(split.train);
  const auto train = apply_scaler(scaler, split.train);
  const auto test = apply_scaler(scaler, split.test);
  const auto points = test.feature_matrix();

  SvmParams svm;
  svm.c = 10.0;
  svm.gamma = 0.1;
  svm.class_weights = balanced_class_weights(train.count(Label::Golden), train.count(Label::Trojan));

  const Model models[] = {
      knn_train(train, 3),
      svm_train(train, svm),
      gnb_train(train),
      TrainedEnsemble({gnb_train(train), knn_train(train, 3)}, TieBreak::PreferNegative),
  };
  std::printf("%-18s %6s %6s %6s\n", "model", "FPR", "FNR", "acc");
  for (const auto& m : models) {
    const auto r = rates(confusion(classify_batch(m, points), test.labels()));
    std::printf("%-18s %6.3f %6.3f %6.3f\n", model_name(m).c_str(), r.fpr, r.fnr, r.accuracy);
  }
}
