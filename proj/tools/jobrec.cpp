// jobrec: stage-per-command driver for the two-stage job recommender.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

#include "jobrec/config.hpp"
#include "jobrec/synth.hpp"
#include "jobrec/tsv.hpp"
#include "jobrec/workflow.hpp"

namespace fs = std::filesystem;
using namespace jobrec;

namespace {

struct Options {
  std::string config_file;
  std::map<std::string, std::string> settings;  // flag overrides, applied after the config file
  bool force = false;
  bool quiet = false;

  PipelineConfig load() const {
    PipelineConfig cfg = config_file.empty() ? PipelineConfig{} : read_config(config_file);
    for (const auto& [k, v] : settings) cfg.set(k, v);
    cfg.validate();
    return cfg;
  }
};

// Registers a flag that feeds the config key of the same meaning.
void setting(CLI::App* app, Options& opts, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(flag, [&opts, key](const std::string& v) { opts.settings[key] = v; }, help);
}

void model_settings(CLI::App* app, Options& opts) {
  setting(app, opts, "--max-depth", "max_depth", "tree depth limit");
  setting(app, opts, "--min-child-weight", "min_child_weight", "minimum hessian per child");
  setting(app, opts, "--eta", "eta", "learning rate");
  setting(app, opts, "--gamma", "gamma", "minimum split gain");
  setting(app, opts, "--lambda", "lambda", "L2 penalty on leaf weights");
  setting(app, opts, "--num-round", "num_round", "boosting rounds");
  setting(app, opts, "--early-stopping-rounds", "early_stopping_rounds", "patience on the validation loss");
}

std::string root_of(const std::vector<std::string>& header) {
  auto p = Provenance::parse(header);
  return p ? p->root : std::string();
}

// Inputs from different dataset roots are refused unless forced.
void check_roots(const std::vector<std::pair<std::string, std::string>>& inputs, bool force) {
  std::string seen, seen_name;
  for (const auto& [name, root] : inputs) {
    if (root.empty()) {
      log_warning(name + " carries no provenance");
      continue;
    }
    if (seen.empty()) {
      seen = root;
      seen_name = name;
    } else if (root != seen) {
      const auto msg = "mixed provenance: " + seen_name + " (root " + seen + ") vs " + name + " (root " + root + ")";
      if (!force) throw Error(msg + "; pass --force to proceed");
      log_warning(msg);
    }
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir + ": " + ec.message());
}

Dataset load_dir(const std::string& dir) {
  auto ds = load_dataset(DatasetPaths::in_directory(dir));
  const auto& r = ds.report();
  if (r.dropped_interactions || r.dropped_impressions || r.dropped_target_users) {
    log_warning("dropped events with unknown ids: " + std::to_string(r.dropped_interactions) + " interactions, " +
                std::to_string(r.dropped_impressions) + " impressions, " + std::to_string(r.dropped_target_users) +
                " target users");
  }
  return ds;
}

// Dataset plus its indexes, anchored where `split` left a marker.
std::unique_ptr<VariantIndex> load_variant(const std::string& dir, const CandidateConfig& candidates) {
  const auto anchor = dataset_anchor(DatasetPaths::in_directory(dir));
  return std::make_unique<VariantIndex>(load_dir(dir), candidates, anchor);
}

std::vector<gbdt::GbdtModel> load_models(const std::vector<std::string>& paths,
                                         std::vector<std::pair<std::string, std::string>>& roots) {
  std::vector<gbdt::GbdtModel> models;
  for (const auto& path : paths) {
    std::vector<std::string> header;
    models.push_back(gbdt::load_model(path, &header));
    roots.emplace_back(path, root_of(header));
  }
  return models;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage job recommendation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opts;
  app.add_option("--config", opts.config_file, "key=value settings file; flags override it")->check(CLI::ExistingFile);
  setting(&app, opts, "--threads", "threads", "worker threads (default: RECSYS_THREADS or all cores)");
  setting(&app, opts, "--seed", "seed", "seed for sampling and synthesis");
  app.add_flag("--quiet", opts.quiet, "suppress progress logging");
  app.add_flag("--force", opts.force, "accept inputs of mixed provenance");

  std::string data, out, truth, candidates, valid_out, train_path, valid_path, importance, scores, report, kind = "recency";
  std::vector<std::string> models, predictions;
  SynthConfig synth;
  double sample_fraction = 1.0;
  std::uint64_t sample_seed = 0;

  auto* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
  c_synth->add_option("--users", synth.users, "user count")->required();
  c_synth->add_option("--items", synth.items, "item count")->required();
  c_synth->add_option("--weeks", synth.weeks, "weeks of activity")->required();
  c_synth->add_option("--target-fraction", synth.target_fraction, "share of users listed as targets");
  c_synth->add_option("--out", out, "output directory")->required();

  auto* c_split = app.add_subcommand("split", "hold out the last weeks as ground truth");
  c_split->add_option("--data", data, "dataset directory")->required();
  c_split->add_option("--out", out, "directory for the training part")->required();
  c_split->add_option("--truth", truth, "ground-truth file to write")->required();
  setting(c_split, opts, "--holdout-weeks", "holdout_weeks", "weeks held out");

  auto* c_cand = app.add_subcommand("candidates", "generate candidate lists for the target users");
  c_cand->add_option("--data", data, "dataset directory")->required();
  c_cand->add_option("--out", out, "candidates file to write")->required();
  c_cand->add_option("--truth", truth, "ground truth for a coverage report");
  setting(c_cand, opts, "--cap", "cap", "items per generator column");
  setting(c_cand, opts, "--neighbors", "neighbors", "similar users to expand");

  auto* c_feat = app.add_subcommand("features", "feature rows for candidates; with --truth, a training file");
  c_feat->add_option("--data", data, "dataset directory")->required();
  c_feat->add_option("--candidates", candidates, "candidates file")->required();
  c_feat->add_option("--out", out, "matrix to write (training half with --truth)")->required();
  c_feat->add_option("--truth", truth, "training ground truth");
  c_feat->add_option("--valid-out", valid_out, "validation matrix to write");
  setting(c_feat, opts, "--sampling", "sampling", "halves or extended");

  auto* c_train = app.add_subcommand("train", "fit a boosted tree model");
  c_train->add_option("--train", train_path, "training matrix")->required();
  c_train->add_option("--valid", valid_path, "validation matrix");
  c_train->add_option("--out", out, "model file to write")->required();
  c_train->add_option("--importance", importance, "feature importance report to write");
  model_settings(c_train, opts);

  auto* c_pred = app.add_subcommand("predict", "rank candidates with one model");
  auto* c_blend = app.add_subcommand("blend", "rank candidates with the mean of several models");
  for (auto* c : {c_pred, c_blend}) {
    c->add_option("--data", data, "dataset directory")->required();
    c->add_option("--candidates", candidates, "candidates file")->required();
    c->add_option("--out", out, "predictions file to write")->required();
    c->add_option("--scores", scores, "per-item scores file to write");
  }
  c_pred->add_option("--model", models, "model file")->required()->expected(1);
  c_blend->add_option("--model", models, "model files")->required()->expected(1, -1);

  auto* c_eval = app.add_subcommand("evaluate", "score predictions against ground truth");
  c_eval->add_option("--truth", truth, "ground-truth file")->required();
  c_eval->add_option("--predictions", predictions, "predictions files")->required()->expected(1, -1);
  c_eval->add_option("--report", report, "per-user report for the first predictions file");
  c_eval->add_option("--sample-fraction", sample_fraction, "score a seeded share of the users");
  c_eval->add_option("--sample-seed", sample_seed, "seed for --sample-fraction");
  setting(c_eval, opts, "--recall-mode", "recall", "corrected or literal");

  auto* c_base = app.add_subcommand("baseline", "recency or popularity predictions");
  c_base->add_option("--data", data, "dataset directory")->required();
  c_base->add_option("--kind", kind, "recency or popular")->check(CLI::IsMember({"recency", "popular"}));
  c_base->add_option("--out", out, "predictions file to write")->required();

  auto* c_run = app.add_subcommand("run", "train on an internal split and predict, in one step");
  c_run->add_option("--data", data, "dataset directory")->required();
  c_run->add_option("--out", out, "predictions file to write")->required();
  c_run->add_option("--model-dir", valid_out, "directory for the trained models");
  setting(c_run, opts, "--cap", "cap", "items per generator column");
  setting(c_run, opts, "--neighbors", "neighbors", "similar users to expand");
  setting(c_run, opts, "--sampling", "sampling", "halves or extended");
  setting(c_run, opts, "--blend", "blend", "extra depth/min_child_weight variants, e.g. 4/4,6/6");
  setting(c_run, opts, "--holdout-weeks", "holdout_weeks", "weeks held out for training labels");
  model_settings(c_run, opts);

  CLI11_PARSE(app, argc, argv);
  set_quiet(opts.quiet);

  try {
    const PipelineConfig cfg = opts.load();
    const auto threads = cfg.thread_count();

    if (c_synth->parsed()) {
      synth.seed = cfg.seed;
      const auto generated = synthesize(synth);
      const auto root = "synth-" + std::to_string(fnv1a(
                            std::to_string(synth.users) + " " + std::to_string(synth.items) + " " +
                            std::to_string(synth.weeks) + " " + std::to_string(synth.seed) + " " +
                            tsv::format_double(synth.target_fraction)));
      ensure_dir(out);
      write_dataset(generated.dataset, DatasetPaths::in_directory(out), {}, make_provenance("synth", root, cfg).lines());
      const auto& r = generated.dataset.report();
      std::cout << "wrote " << out << ": " << r.users << " users, " << r.items << " items, " << r.interactions
                << " interactions, " << r.impressions << " impressions, " << r.target_users << " target users\n";
    } else if (c_split->parsed()) {
      const auto root = dataset_root(DatasetPaths::in_directory(data));
      const auto ds = load_dir(data);
      auto split = temporal_split(ds, cfg.holdout_weeks);
      for (const auto& w : split.warnings) log_warning(w);
      const auto gt = build_ground_truth(split.holdout.interactions, ds.target_users());
      auto prov = make_provenance("split", root, cfg);
      ensure_dir(out);
      write_ground_truth(gt, truth, prov.lines());
      prov.anchor = split.boundary;
      write_dataset(split.train, DatasetPaths::in_directory(out), {}, prov.lines());
      std::cout << "boundary " << split.boundary << ", held out " << split.holdout.interactions.size()
                << " interactions and " << split.holdout.impressions.size() << " impressions, ground truth for "
                << gt.size() << " users\n";
    } else if (c_cand->parsed()) {
      const auto root = dataset_root(DatasetPaths::in_directory(data));
      const auto holder = load_variant(data, cfg.candidates);
      const auto& variant = *holder;
      const auto lists = variant.generator().generate(target_user_indices(variant.dataset()), threads);
      write_candidates(lists, variant.dataset(), out, make_provenance("candidates", root, cfg).lines());
      std::size_t pairs = 0;
      for (const auto& l : lists) pairs += l.entries.size();
      std::cout << lists.size() << " users, " << pairs << " candidate pairs\n";
      if (!truth.empty()) {
        std::vector<std::string> header;
        const auto gt = read_ground_truth(truth, &header);
        check_roots({{data, root}, {truth, root_of(header)}}, opts.force);
        std::cout << "coverage " << coverage(lists, gt, variant.dataset()) << "\n";
      }
    } else if (c_feat->parsed()) {
      const auto root = dataset_root(DatasetPaths::in_directory(data));
      const auto holder = load_variant(data, cfg.candidates);
      const auto& variant = *holder;
      std::vector<std::string> header;
      const auto lists = read_candidates(variant.dataset(), candidates, &header);
      std::vector<std::pair<std::string, std::string>> roots{{data, root}, {candidates, root_of(header)}};
      const auto prov = make_provenance("features", root, cfg).lines();
      if (truth.empty()) {
        check_roots(roots, opts.force);
        const auto m = build_matrix(variant.extractor(), lists, nullptr, threads);
        write_matrix(m, out, prov);
        std::cout << m.rows() << " rows\n";
      } else {
        const auto gt = read_ground_truth(truth, &header);
        roots.emplace_back(truth, root_of(header));
        check_roots(roots, opts.force);
        const auto file = build_training_file(lists, gt, variant.dataset(), cfg.sampling, cfg.seed);
        const auto tm = build_matrix(variant.extractor(), file.train, &gt, threads);
        write_matrix(tm, out, prov);
        std::cout << "train: " << file.train.size() << " users, " << tm.rows() << " rows\n";
        if (!valid_out.empty()) {
          const auto vm = build_matrix(variant.extractor(), file.valid, &gt, threads);
          write_matrix(vm, valid_out, prov);
          std::cout << "valid: " << file.valid.size() << " users, " << vm.rows() << " rows\n";
        } else if (!file.valid.empty()) {
          log_warning("validation half dropped; pass --valid-out to keep it");
        }
      }
    } else if (c_train->parsed()) {
      std::vector<std::string> header;
      const auto tm = read_matrix(train_path, &header);
      const auto root = root_of(header);
      std::vector<std::pair<std::string, std::string>> roots{{train_path, root}};
      std::optional<FeatureMatrix> vm;
      if (!valid_path.empty()) {
        vm = read_matrix(valid_path, &header);
        roots.emplace_back(valid_path, root_of(header));
      }
      check_roots(roots, opts.force);
      const auto model = gbdt::train(tm, vm ? &*vm : nullptr, cfg.train);
      gbdt::save_model(model, out, make_provenance("train", root, cfg).lines());
      std::cout << model.trees().size() << " trees, train logloss " << model.train_logloss.back();
      if (!model.valid_logloss.empty()) {
        std::cout << ", best valid logloss " << model.valid_logloss[static_cast<std::size_t>(model.best_round)]
                  << " at round " << model.best_round + 1;
      }
      std::cout << "\n";
      if (!importance.empty()) gbdt::write_importance(gbdt::importance_report(model), importance);
    } else if (c_pred->parsed() || c_blend->parsed()) {
      const auto root = dataset_root(DatasetPaths::in_directory(data));
      const auto holder = load_variant(data, cfg.candidates);
      const auto& variant = *holder;
      std::vector<std::string> header;
      const auto lists = read_candidates(variant.dataset(), candidates, &header);
      std::vector<std::pair<std::string, std::string>> roots{{data, root}, {candidates, root_of(header)}};
      const auto loaded = load_models(models, roots);
      check_roots(roots, opts.force);
      const auto preds = blend(loaded, variant.extractor(), lists, threads);
      const auto prov = make_provenance(c_pred->parsed() ? "predict" : "blend", root, cfg).lines();
      write_predictions(preds, out, prov);
      if (!scores.empty()) write_prediction_scores(preds, scores, prov);
      std::cout << preds.size() << " users predicted\n";
    } else if (c_eval->parsed()) {
      std::vector<std::string> header;
      auto gt = read_ground_truth(truth, &header);
      std::vector<std::pair<std::string, std::string>> roots{{truth, root_of(header)}};
      std::vector<std::vector<Prediction>> loaded;
      for (const auto& p : predictions) {
        loaded.push_back(read_predictions(p, &header));
        roots.emplace_back(p, root_of(header));
      }
      check_roots(roots, opts.force);
      if (sample_fraction < 1.0) gt = sample_ground_truth(gt, sample_fraction, sample_seed);
      for (std::size_t k = 0; k < loaded.size(); ++k) {
        const auto rep = total_score(loaded[k], gt, cfg.recall);
        if (k == 0 && !report.empty()) write_score_report(rep, report);
        std::cout << predictions[k] << "\t" << tsv::format_double(rep.total) << "\n";
      }
    } else if (c_base->parsed()) {
      const auto root = dataset_root(DatasetPaths::in_directory(data));
      const auto ds = load_dir(data);
      const auto preds =
          kind == "recency" ? baseline_recency(ds, ds.target_users()) : baseline_popular(ds, ds.target_users());
      write_predictions(preds, out, make_provenance("baseline-" + kind, root, cfg).lines());
      std::cout << preds.size() << " users predicted\n";
    } else if (c_run->parsed()) {
      const auto root = dataset_root(DatasetPaths::in_directory(data));
      const auto run = run_pipeline(load_dir(data), cfg);
      for (const auto& w : run.warnings) log_warning(w);
      const auto prov = make_provenance("run", root, cfg).lines();
      write_predictions(run.predictions, out, prov);
      if (!valid_out.empty()) {
        ensure_dir(valid_out);
        for (std::size_t k = 0; k < run.models.size(); ++k) {
          gbdt::save_model(run.models[k], (fs::path(valid_out) / ("model" + std::to_string(k) + ".json")).string(),
                           prov);
        }
      }
      std::cout << run.predictions.size() << " users predicted; training coverage " << run.train_coverage << ", "
                << run.train_rows << " training rows, " << run.valid_rows << " validation rows\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
