#include "jobrec/workflow.hpp"

namespace jobrec {

PipelineRun run_pipeline(const Dataset& data, const PipelineConfig& config) {
  config.validate();
  const auto threads = config.thread_count();
  PipelineRun run;

  auto split = temporal_split(data, config.holdout_weeks);
  run.warnings = split.warnings;
  const auto truth = build_ground_truth(split.holdout.interactions, data.target_users());
  {
    VariantIndex train_variant(std::move(split.train), config.candidates, split.boundary);
    const auto& ds = train_variant.dataset();
    const auto lists = train_variant.generator().generate(target_user_indices(ds), threads);
    run.train_coverage = truth.empty() ? 0.0 : coverage(lists, truth, ds);
    log_info("training candidates: " + std::to_string(lists.size()) + " users, coverage " +
             std::to_string(run.train_coverage));

    const auto file = build_training_file(lists, truth, ds, config.sampling, config.seed);
    const auto train_m = build_matrix(train_variant.extractor(), file.train, &truth, threads);
    const auto valid_m = build_matrix(train_variant.extractor(), file.valid, &truth, threads);
    run.train_rows = train_m.rows();
    run.valid_rows = valid_m.rows();
    for (const auto& cfg : config.model_configs()) {
      run.models.push_back(gbdt::train(train_m, valid_m.rows() ? &valid_m : nullptr, cfg));
      log_info("model depth " + std::to_string(cfg.max_depth) + ": " +
               std::to_string(run.models.back().trees().size()) + " trees");
    }
  }

  VariantIndex full(Dataset(data), config.candidates);
  const auto lists = full.generator().generate(target_user_indices(full.dataset()), threads);
  run.predictions = blend(run.models, full.extractor(), lists, threads);
  return run;
}

}  // namespace jobrec
