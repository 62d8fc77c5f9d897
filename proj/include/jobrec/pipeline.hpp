#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "jobrec/candidates.hpp"
#include "jobrec/dataset.hpp"
#include "jobrec/evaluation.hpp"
#include "jobrec/features.hpp"
#include "jobrec/gbdt.hpp"
#include "jobrec/similarity.hpp"

namespace jobrec {

enum class SamplingMode {
  halves,    // eligible users split in halves; all positives plus up to 5 negatives
  extended,  // every eligible user; all positives plus a quarter of the negatives
};

SamplingMode parse_sampling_mode(std::string_view text);
std::string_view to_string(SamplingMode mode);

// Candidate subsets selected for model fitting; labels follow the ground truth.
struct TrainingFile {
  std::vector<CandidateList> train;
  std::vector<CandidateList> valid;
};

TrainingFile build_training_file(std::span<const CandidateList> candidates, const GroundTruth& truth,
                                 const Dataset& dataset, SamplingMode mode, std::uint64_t seed);

// One dataset variant (training split or full data) with everything built
// over it. Immutable once constructed.
class VariantIndex {
 public:
  explicit VariantIndex(Dataset dataset, CandidateConfig candidates = {},
                        std::optional<Timestamp> time_anchor = std::nullopt);
  VariantIndex(const VariantIndex&) = delete;
  VariantIndex& operator=(const VariantIndex&) = delete;

  const Dataset& dataset() const { return *dataset_; }
  const SimilarityIndex& similarity() const { return *similarity_; }
  const ItemClusterIndex& clusters() const { return *clusters_; }
  const CandidateGenerator& generator() const { return *generator_; }
  const FeatureExtractor& extractor() const { return *extractor_; }

 private:
  std::unique_ptr<Dataset> dataset_;
  std::unique_ptr<SimilarityIndex> similarity_;
  std::unique_ptr<ItemClusterIndex> clusters_;
  std::unique_ptr<CandidateGenerator> generator_;
  std::unique_ptr<FeatureExtractor> extractor_;
};

// Arithmetic mean of the models' probabilities for every candidate, per
// list. Summation runs over sorted values so the model order is irrelevant.
std::vector<std::vector<double>> score_candidates(std::span<const gbdt::GbdtModel> models,
                                                  const FeatureExtractor& extractor,
                                                  std::span<const CandidateList> lists, std::size_t threads);

// Drops the user's deleted items, orders by score (ties: ascending item id)
// and keeps the first 30.
std::vector<Prediction> select_top(std::span<const CandidateList> lists, const std::vector<std::vector<double>>& scores,
                                   const Dataset& dataset);

std::vector<Prediction> rank_and_select(const gbdt::GbdtModel& model, const FeatureExtractor& extractor,
                                        std::span<const CandidateList> lists, std::size_t threads);
std::vector<Prediction> blend(std::span<const gbdt::GbdtModel> models, const FeatureExtractor& extractor,
                              std::span<const CandidateList> lists, std::size_t threads);

// Most recent positive interactions without deleted items, padded with
// impressions, active items only.
std::vector<Prediction> baseline_recency(const Dataset& dataset, std::span<const UserId> target_users);
// The global popularity list minus each user's deleted items.
std::vector<Prediction> baseline_popular(const Dataset& dataset, std::span<const UserId> target_users);

// Items the user deleted, sorted.
std::vector<ItemIdx> deleted_items(const Dataset& dataset, UserIdx u);

}  // namespace jobrec
