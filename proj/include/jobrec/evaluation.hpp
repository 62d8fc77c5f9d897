#pragma once

#include <map>
#include <string>
#include <vector>

#include "jobrec/dataset.hpp"

namespace jobrec {

// A ranked recommendation list for one user.
struct Prediction {
  UserId user = 0;
  std::vector<ItemId> items;
  std::vector<double> scores;  // parallel to items, may be empty

  bool operator==(const Prediction&) const = default;
};

inline constexpr std::size_t kPredictionLength = 30;

enum class RecallMode {
  literal,    // hits / min(1, |B|): the hit count
  corrected,  // hits / max(1, |B|)
};

RecallMode parse_recall_mode(std::string_view text);
std::string_view to_string(RecallMode mode);

// |first k of pred ∩ truth| / k; missing slots count as misses.
double precision_at_k(std::span<const ItemId> pred, std::span<const ItemId> truth, std::size_t k);
double recall_term(std::span<const ItemId> pred, std::span<const ItemId> truth, RecallMode mode);
int user_success(std::span<const ItemId> pred, std::span<const ItemId> truth);

struct UserScore {
  UserId user = 0;
  double p2 = 0, p4 = 0, p6 = 0, p20 = 0;
  double recall = 0;
  int success = 0;
  double score = 0;
};

struct ScoreReport {
  double total = 0;
  std::vector<UserScore> users;  // ground-truth users, ascending id
};

// Truth sets must be sorted. Predictions longer than 30 items or with
// duplicates are rejected. Users outside the ground truth contribute 0.
double user_score(std::span<const ItemId> pred, std::span<const ItemId> truth, RecallMode mode);
ScoreReport total_score(std::span<const Prediction> predictions, const GroundTruth& truth, RecallMode mode);

// Keeps a seeded fraction of the ground-truth users, mirroring a partial
// leaderboard sample.
GroundTruth sample_ground_truth(const GroundTruth& truth, double fraction, std::uint64_t seed);

void write_score_report(const ScoreReport& report, const std::string& path);

void write_predictions(std::span<const Prediction> predictions, const std::string& path,
                       const std::vector<std::string>& provenance = {});
std::vector<Prediction> read_predictions(const std::string& path, std::vector<std::string>* provenance = nullptr);
void write_prediction_scores(std::span<const Prediction> predictions, const std::string& path,
                             const std::vector<std::string>& provenance = {});

}  // namespace jobrec
