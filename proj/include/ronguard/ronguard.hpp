#pragma once

// Umbrella header: RON fingerprint datasets, the synthetic generator, the
// four classifiers, tuning, and the trial harness.

#include "ronguard/dataset.hpp"
#include "ronguard/ensemble.hpp"
#include "ronguard/error.hpp"
#include "ronguard/gnb.hpp"
#include "ronguard/kernels.hpp"
#include "ronguard/knn.hpp"
#include "ronguard/label.hpp"
#include "ronguard/metrics.hpp"
#include "ronguard/model_io.hpp"
#include "ronguard/report.hpp"
#include "ronguard/svm.hpp"
#include "ronguard/synth.hpp"
#include "ronguard/trials.hpp"
#include "ronguard/tuning.hpp"
