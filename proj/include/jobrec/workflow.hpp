#pragma once

#include <vector>

#include "jobrec/config.hpp"

namespace jobrec {

struct PipelineRun {
  std::vector<Prediction> predictions;
  std::vector<gbdt::GbdtModel> models;
  // Share of the training ground truth reached by the training candidates.
  double train_coverage = 0;
  std::size_t train_rows = 0;
  std::size_t valid_rows = 0;
  std::vector<std::string> warnings;
};

// Fits the models on `data` split at its last `holdout_weeks`, then scores the
// candidates of `data`'s target users with the blend of all models.
PipelineRun run_pipeline(const Dataset& data, const PipelineConfig& config);

}  // namespace jobrec
