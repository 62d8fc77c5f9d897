#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jobrec/candidates.hpp"
#include "jobrec/evaluation.hpp"
#include "jobrec/gbdt.hpp"
#include "jobrec/pipeline.hpp"

namespace jobrec {

// Settings shared by every command. Text form is one key=value per line.
struct PipelineConfig {
  std::string data_dir;
  std::string work_dir;
  CandidateConfig candidates;
  gbdt::TrainConfig train;
  // Extra (max_depth, min_child_weight) variants trained alongside `train`
  // and blended; empty for a single model.
  std::vector<std::pair<int, double>> blend;
  SamplingMode sampling = SamplingMode::halves;
  RecallMode recall = RecallMode::corrected;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: default_thread_count()
  int holdout_weeks = 1;

  void validate() const;
  // Applies one key=value setting; unknown keys are an error.
  void set(std::string_view key, std::string_view value);
  // Canonical key=value lines, sorted by key; paths and threads omitted.
  std::vector<std::string> to_lines() const;
  std::string hash() const;
  std::size_t thread_count() const;
  // The model configs a full run trains: `train` then each blend variant.
  std::vector<gbdt::TrainConfig> model_configs() const;
};

PipelineConfig read_config(const std::string& path);

// Header carried by every artifact: the producing stage, the dataset root it
// descends from, the seed and the config hash.
struct Provenance {
  std::string stage;
  std::string root;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::string> config;
  // Feature time anchor of a split's training part.
  std::optional<Timestamp> anchor;

  std::vector<std::string> lines() const;
  // nullopt when the lines carry no provenance record.
  static std::optional<Provenance> parse(const std::vector<std::string>& lines);
};

Provenance make_provenance(std::string stage, std::string root, const PipelineConfig& config);

// Leading '#' lines of a text file, without the marker.
std::vector<std::string> read_comment_header(const std::string& path);

// Root of a dataset directory: taken from its provenance when present, else a
// hash of the file contents.
std::string dataset_root(const DatasetPaths& paths);
// Anchor recorded by `split`, if any.
std::optional<Timestamp> dataset_anchor(const DatasetPaths& paths);

}  // namespace jobrec
