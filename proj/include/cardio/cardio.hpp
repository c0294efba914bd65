#pragma once

#include "cardio/classifier.hpp"
#include "cardio/dataset.hpp"
#include "cardio/error.hpp"
#include "cardio/knn.hpp"
#include "cardio/logistic_regression.hpp"
#include "cardio/matrix.hpp"
#include "cardio/metrics.hpp"
#include "cardio/mlp.hpp"
#include "cardio/model_selection.hpp"
#include "cardio/persistence.hpp"
#include "cardio/pipeline.hpp"
#include "cardio/preprocess.hpp"
#include "cardio/report.hpp"
#include "cardio/rng.hpp"
#include "cardio/svm.hpp"
#include "cardio/text.hpp"

namespace cardio {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cardio
