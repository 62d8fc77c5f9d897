#pragma once

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "jobrec/candidates.hpp"
#include "jobrec/dataset.hpp"
#include "jobrec/similarity.hpp"

namespace jobrec {

struct FeatureSpec {
  std::string name;
  std::string group;     // one of the twelve feature groups
  std::string subgroup;  // finer grouping for importance reports, may be empty
  double sentinel = -1.0;

  bool operator==(const FeatureSpec&) const = default;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  std::size_t size() const { return features_.size(); }
  const FeatureSpec& operator[](std::size_t k) const { return features_[k]; }
  const std::vector<FeatureSpec>& features() const { return features_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t at(std::string_view name) const;
  // Group names in first-appearance order.
  std::vector<std::string> groups() const;
  std::uint64_t fingerprint() const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<FeatureSpec> features_;
};

// The fixed schema produced by FeatureExtractor.
const FeatureSchema& default_feature_schema();

struct FeatureMatrix {
  FeatureSchema schema;
  std::vector<UserId> user_ids;
  std::vector<ItemId> item_ids;
  std::vector<double> values;         // row-major, rows() x cols()
  std::vector<std::uint8_t> labels;   // empty for unlabeled matrices

  std::size_t rows() const { return user_ids.size(); }
  std::size_t cols() const { return schema.size(); }
  bool labeled() const { return !labels.empty(); }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
};

// Items co-clicked by a single user within a time window. Symmetric, no self
// pairs.
class ItemClusterIndex {
 public:
  ItemClusterIndex() = default;
  ItemClusterIndex(const Dataset& dataset, Timestamp window_seconds = 600);

  std::span<const ItemIdx> cluster(ItemIdx item) const;
  bool contains(ItemIdx item, ItemIdx other) const;
  std::size_t item_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<ItemIdx> members_;
};

// Aggregates over a user's history items (distinct items of one event
// source), precomputed once per user.
struct HistoryProfile {
  std::vector<ItemIdx> items;
  // histogram per shared attribute: career_level, discipline, industry, country, region
  std::array<std::unordered_map<int, std::uint32_t>, 5> attribute_counts;
  std::unordered_map<Token, std::vector<std::uint32_t>> tag_members;    // token -> positions in items
  std::unordered_map<Token, std::vector<std::uint32_t>> title_members;
};

// Per (user, item) event aggregates for items in the user's history.
struct PairStats {
  Timestamp last_positive = -1;
  double positives = 0;
  double positives_user_week = 0;     // within 7 days ending at the user's last positive event
  double positives_dataset_week = 0;  // within 7 days ending at the time anchor
  int last_impression_week = -1;
  double impressions = 0;
};

struct UserContext {
  UserIdx user = 0;
  std::unordered_map<ItemIdx, PairStats> pairs;
  HistoryProfile interactions;
  HistoryProfile impressions;
  // max over i' in Int_u, i' != i, of J(users(i), users(i')); -1 when no i' touches i
  std::vector<double> best_item_jaccard;
  std::vector<double> best_item_common_users;
  // J(Int_u, Int_v) / J(Imp_u, Imp_v) for users v sharing at least one item
  std::unordered_map<UserIdx, double> int_similarity;
  std::unordered_map<UserIdx, double> imp_similarity;
  Timestamp last_positive = -1;   // -1 when the user has no positive interactions
  int last_impression_week = -1;  // -1 when the user has no impressions
  mutable std::vector<std::uint32_t> scratch;
};

class FeatureExtractor {
 public:
  // `time_anchor` defaults to the dataset's max timestamp; the week anchor is
  // the last impression week (or the anchor's week when there are none).
  FeatureExtractor(const Dataset& dataset, const SimilarityIndex& index, const ItemClusterIndex& clusters,
                   std::optional<Timestamp> time_anchor = std::nullopt);

  const FeatureSchema& schema() const { return default_feature_schema(); }
  const Dataset& dataset() const { return dataset_; }
  Timestamp now() const { return now_; }
  int now_week() const { return now_week_; }

  UserContext prepare(UserIdx u) const;

  // Group-level values, in schema order within each group.
  std::vector<double> event_match(const UserContext& ctx, ItemIdx i) const;
  std::vector<double> popularity(ItemIdx i) const;
  std::vector<double> cf_similarity(const UserContext& ctx, ItemIdx i) const;
  std::vector<double> user_activity(UserIdx u) const;
  std::vector<double> recency(const UserContext& ctx, ItemIdx i) const;
  std::vector<double> common_tokens(const UserContext& ctx, ItemIdx i) const;
  std::vector<double> candidate_positions(const CandidateEntry& entry) const;
  std::vector<double> user_item_recent_count(const UserContext& ctx, ItemIdx i) const;
  std::vector<double> item_properties(ItemIdx i) const;
  std::vector<double> content_similarity(UserIdx u, ItemIdx i) const;
  std::vector<double> geo_distance(const UserContext& ctx, ItemIdx i) const;
  std::vector<double> cluster(const UserContext& ctx, ItemIdx i) const;

  // Full row for a candidate pair.
  void extract(const UserContext& ctx, const CandidateEntry& entry, std::span<double> out) const;
  std::vector<double> extract(UserIdx u, const CandidateList& candidates, ItemIdx i) const;

 private:
  struct ItemStats {
    double clicks = 0;
    double positives = 0;
    double impressions = 0;
    double clicks_last_week = 0;
    double clicks_prev_week = 0;
    std::array<double, 7> weekday_last{};
    std::array<double, 7> weekday_prev{};
  };

  const Dataset& dataset_;
  const SimilarityIndex& index_;
  const ItemClusterIndex& clusters_;
  Timestamp now_;
  int now_week_;
  std::vector<ItemStats> item_stats_;
};

// One row per (user, candidate) pair, users in list order and items in
// ascending order. Labels come from `truth` when given.
FeatureMatrix build_matrix(const FeatureExtractor& extractor, std::span<const CandidateList> lists,
                           const GroundTruth* truth, std::size_t threads);

// TSV rows plus a `<path>.schema.tsv` sidecar; reloads bit-exactly.
void write_matrix(const FeatureMatrix& matrix, const std::string& path,
                  const std::vector<std::string>& provenance = {});
FeatureMatrix read_matrix(const std::string& path, std::vector<std::string>* provenance = nullptr);

void write_schema(const FeatureSchema& schema, const std::string& path);
FeatureSchema read_schema(const std::string& path);

}  // namespace jobrec
