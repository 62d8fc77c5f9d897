#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "jobrec/dataset.hpp"
#include "jobrec/similarity.hpp"

namespace jobrec {

// The nine candidate categories. Codes are stable and used in file headers.
enum class GeneratorId : std::uint8_t {
  RecentInteractions = 0,
  RecentImpressions = 1,
  SimilarUserInteractions = 2,
  SimilarUserImpressions = 3,
  ContentKnnInteractions = 4,
  ContentKnnImpressions = 5,
  JobrolesTags = 6,
  JobrolesTitle = 7,
  GlobalPopular = 8,
};

inline constexpr std::size_t kGeneratorCount = 9;

// Sub-rankings of the content generators: which token field of the candidate
// item i is matched against which field of the user's history item i'.
enum class ContentVariant : std::uint8_t {
  TagsTags = 0,    // |tags(i) ∩ tags(i')|
  TitleTitle = 1,  // |title(i) ∩ title(i')|
  TagsTitle = 2,   // |tags(i) ∩ title(i')|
  TitleTags = 3,   // |title(i) ∩ tags(i')|
};

struct CandidateColumn {
  GeneratorId generator;
  std::uint8_t variant;
  std::string_view name;
};

// One ranked list per column; the content generators contribute four each.
inline constexpr std::size_t kCandidateColumnCount = 15;
inline constexpr std::array<CandidateColumn, kCandidateColumnCount> kCandidateColumns = {{
    {GeneratorId::RecentInteractions, 0, "recent_interactions"},
    {GeneratorId::RecentImpressions, 0, "recent_impressions"},
    {GeneratorId::SimilarUserInteractions, 0, "similar_user_interactions"},
    {GeneratorId::SimilarUserImpressions, 0, "similar_user_impressions"},
    {GeneratorId::ContentKnnInteractions, 0, "content_knn_interactions.tags_tags"},
    {GeneratorId::ContentKnnInteractions, 1, "content_knn_interactions.title_title"},
    {GeneratorId::ContentKnnInteractions, 2, "content_knn_interactions.tags_title"},
    {GeneratorId::ContentKnnInteractions, 3, "content_knn_interactions.title_tags"},
    {GeneratorId::ContentKnnImpressions, 0, "content_knn_impressions.tags_tags"},
    {GeneratorId::ContentKnnImpressions, 1, "content_knn_impressions.title_title"},
    {GeneratorId::ContentKnnImpressions, 2, "content_knn_impressions.tags_title"},
    {GeneratorId::ContentKnnImpressions, 3, "content_knn_impressions.title_tags"},
    {GeneratorId::JobrolesTags, 0, "jobroles_tags"},
    {GeneratorId::JobrolesTitle, 0, "jobroles_title"},
    {GeneratorId::GlobalPopular, 0, "global_popular"},
}};

std::size_t candidate_column(GeneratorId generator, std::uint8_t variant = 0);

using RankedItems = std::vector<ItemIdx>;
using GeneratorOutputs = std::array<RankedItems, kCandidateColumnCount>;

struct CandidateEntry {
  ItemIdx item = 0;
  // 1-based rank per column, 0 when the column did not produce the item.
  std::array<std::uint16_t, kCandidateColumnCount> rank{};

  bool operator==(const CandidateEntry&) const = default;
};

struct CandidateList {
  UserIdx user = 0;
  // Ascending item order.
  std::vector<CandidateEntry> entries;

  const CandidateEntry* find(ItemIdx item) const;
  bool operator==(const CandidateList&) const = default;
};

struct CandidateConfig {
  std::size_t cap = 60;        // per column
  std::size_t neighbors = 60;  // similar users expanded by the neighbor generators
};

class CandidateGenerator {
 public:
  CandidateGenerator(const Dataset& dataset, const SimilarityIndex& index, CandidateConfig config = {});

  // Active items from the user's positive interactions / impressions, most
  // recent week first, then event count, then item id. Uncapped.
  const RankedItems& recency_order(UserIdx u, EventSource source) const;

  RankedItems recent_interactions(UserIdx u) const;
  RankedItems recent_impressions(UserIdx u) const;
  RankedItems similar_user_items(UserIdx u, EventSource source) const;
  std::array<RankedItems, 4> content_knn(UserIdx u, EventSource source) const;
  RankedItems jobroles_match(UserIdx u, TokenField field) const;
  const RankedItems& popular() const { return popular_; }

  GeneratorOutputs run_all(UserIdx u) const;
  CandidateList generate(UserIdx u) const;
  std::vector<CandidateList> generate(std::span<const UserIdx> users, std::size_t threads) const;

  const CandidateConfig& config() const { return config_; }
  const Dataset& dataset() const { return dataset_; }

 private:
  RankedItems capped(const RankedItems& items) const;

  const Dataset& dataset_;
  const SimilarityIndex& index_;
  CandidateConfig config_;
  std::vector<RankedItems> recent_int_;
  std::vector<RankedItems> recent_imp_;
  RankedItems popular_;
};

// Union of all generator outputs restricted to active items, with every rank
// each item earned.
CandidateList merge_candidates(UserIdx u, const GeneratorOutputs& outputs, const std::vector<bool>& active);

// Fraction of ground-truth pairs present in the candidate lists.
double coverage(std::span<const CandidateList> candidates, const GroundTruth& truth, const Dataset& dataset);

// Target users present in the dataset, as dense indices.
std::vector<UserIdx> target_user_indices(const Dataset& dataset);

void write_candidates(std::span<const CandidateList> lists, const Dataset& dataset, const std::string& path,
                      const std::vector<std::string>& provenance = {});
std::vector<CandidateList> read_candidates(const Dataset& dataset, const std::string& path,
                                           std::vector<std::string>* provenance = nullptr);

}  // namespace jobrec
