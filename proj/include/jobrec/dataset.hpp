#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jobrec/common.hpp"

namespace jobrec {

struct User {
  UserId id = 0;
  std::vector<Token> jobroles;
  int career_level = 0;
  int discipline_id = 0;
  int industry_id = 0;
  int country = 0;
  int region = 0;
  int experience_n_entries_class = 0;
  int experience_years_experience = 0;
  int experience_years_in_current = 0;
  int edu_degree = 0;
  std::vector<Token> edu_fieldofstudies;

  bool operator==(const User&) const = default;
};

struct Item {
  ItemId id = 0;
  std::vector<Token> title;
  std::vector<Token> tags;
  int career_level = 0;
  int discipline_id = 0;
  int industry_id = 0;
  int country = 0;
  int region = 0;
  int employment = 0;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::optional<Timestamp> created_at;
  bool active_during_test = false;

  bool has_location() const { return latitude.has_value() && longitude.has_value(); }
  bool operator==(const Item&) const = default;
};

enum class InteractionKind : std::uint8_t { click, bookmark, reply, remove };

inline bool is_positive(InteractionKind k) { return k != InteractionKind::remove; }

struct Interaction {
  UserId user_id = 0;
  ItemId item_id = 0;
  InteractionKind kind = InteractionKind::click;
  Timestamp timestamp = 0;

  auto operator<=>(const Interaction&) const = default;
};

struct Impression {
  UserId user_id = 0;
  ItemId item_id = 0;
  // Week ordinal, see week_of_iso().
  int week = 0;

  auto operator<=>(const Impression&) const = default;
};

// Sorted id table with dense position lookup.
class IdMap {
 public:
  IdMap() = default;
  explicit IdMap(std::vector<std::int64_t> sorted_ids);

  std::optional<std::uint32_t> find(std::int64_t id) const;
  std::uint32_t at(std::int64_t id) const;
  std::int64_t id(std::uint32_t idx) const { return ids_[idx]; }
  std::size_t size() const { return ids_.size(); }

 private:
  std::vector<std::int64_t> ids_;
};

// Flat event lists plus per-user / per-item adjacency. Adjacency lists hold
// positions into the flat lists, ordered by (time, position).
class EventLog {
 public:
  EventLog() = default;
  // Every event must reference ids present in the maps.
  EventLog(std::vector<Interaction> interactions, std::vector<Impression> impressions,
           const IdMap& users, const IdMap& items);

  std::span<const Interaction> interactions() const { return interactions_; }
  std::span<const Impression> impressions() const { return impressions_; }

  UserIdx interaction_user(std::size_t k) const { return interaction_user_[k]; }
  ItemIdx interaction_item(std::size_t k) const { return interaction_item_[k]; }
  UserIdx impression_user(std::size_t k) const { return impression_user_[k]; }
  ItemIdx impression_item(std::size_t k) const { return impression_item_[k]; }

  std::span<const std::uint32_t> interactions_of_user(UserIdx u) const;
  std::span<const std::uint32_t> interactions_of_item(ItemIdx i) const;
  std::span<const std::uint32_t> impressions_of_user(UserIdx u) const;
  std::span<const std::uint32_t> impressions_of_item(ItemIdx i) const;

  // 0 when there are no interactions.
  Timestamp max_timestamp() const { return max_timestamp_; }
  Timestamp min_timestamp() const { return min_timestamp_; }
  // Impression week range; nullopt when there are no impressions.
  std::optional<int> max_week() const { return max_week_; }
  std::optional<int> min_week() const { return min_week_; }

 private:
  struct Csr {
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> values;
    std::span<const std::uint32_t> row(std::size_t r) const {
      return {values.data() + offsets[r], offsets[r + 1] - offsets[r]};
    }
  };

  std::vector<Interaction> interactions_;
  std::vector<Impression> impressions_;
  std::vector<UserIdx> interaction_user_;
  std::vector<ItemIdx> interaction_item_;
  std::vector<UserIdx> impression_user_;
  std::vector<ItemIdx> impression_item_;
  Csr int_by_user_, int_by_item_, imp_by_user_, imp_by_item_;
  Timestamp max_timestamp_ = 0;
  Timestamp min_timestamp_ = 0;
  std::optional<int> max_week_;
  std::optional<int> min_week_;
};

struct LoadReport {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t interactions = 0;
  std::size_t impressions = 0;
  std::size_t target_users = 0;
  std::size_t dropped_interactions = 0;
  std::size_t dropped_impressions = 0;
  std::size_t dropped_target_users = 0;
};

class Dataset {
 public:
  Dataset() = default;
  // Sorts entity tables by id and builds the event log. Duplicate entity ids
  // are an error; events with unknown ids follow `drop_unknown`.
  Dataset(std::vector<User> users, std::vector<Item> items, std::vector<Interaction> interactions,
          std::vector<Impression> impressions, std::vector<UserId> target_users,
          bool drop_unknown = true);

  const std::vector<User>& users() const { return users_; }
  const std::vector<Item>& items() const { return items_; }
  const std::vector<UserId>& target_users() const { return target_users_; }
  const EventLog& events() const { return events_; }
  const IdMap& user_ids() const { return user_ids_; }
  const IdMap& item_ids() const { return item_ids_; }
  const LoadReport& report() const { return report_; }

  const User& user(UserIdx u) const { return users_[u]; }
  const Item& item(ItemIdx i) const { return items_[i]; }
  std::size_t user_count() const { return users_.size(); }
  std::size_t item_count() const { return items_.size(); }

  // Per-item active_during_test flags by dense index.
  const std::vector<bool>& active_mask() const { return active_; }

 private:
  std::vector<User> users_;
  std::vector<Item> items_;
  std::vector<UserId> target_users_;
  IdMap user_ids_;
  IdMap item_ids_;
  EventLog events_;
  std::vector<bool> active_;
  LoadReport report_;
};

struct KindCodes {
  int click = 1;
  int bookmark = 2;
  int reply = 3;
  int remove = 4;
};

struct DatasetPaths {
  std::string users;
  std::string items;
  std::string interactions;
  std::string impressions;
  std::string target_users;

  // Standard file names inside a directory.
  static DatasetPaths in_directory(const std::string& dir);
};

struct LoadOptions {
  KindCodes kinds;
  // false: an event referencing an unknown user/item aborts the load.
  bool drop_unknown = true;
};

Dataset load_dataset(const DatasetPaths& paths, const LoadOptions& options = {});

// Writes the five challenge-format tables. `provenance` lines (if any) are
// emitted as leading '#' comments.
void write_dataset(const Dataset& dataset, const DatasetPaths& paths, const KindCodes& kinds = {},
                   const std::vector<std::string>& provenance = {});

struct HoldoutEvents {
  std::vector<Interaction> interactions;
  std::vector<Impression> impressions;
};

struct SplitResult {
  Dataset train;
  HoldoutEvents holdout;
  Timestamp boundary = 0;
  int holdout_first_week = 0;
  std::vector<std::string> warnings;
};

// Events with timestamp < max_timestamp - holdout_weeks * 604800 stay in
// training; impressions with week > max_week - holdout_weeks are held out.
SplitResult temporal_split(const Dataset& dataset, int holdout_weeks = 1);

// user -> sorted set of positively interacted items, non-empty sets only.
using GroundTruth = std::map<UserId, std::vector<ItemId>>;

GroundTruth build_ground_truth(std::span<const Interaction> holdout,
                               std::span<const UserId> target_users);

void write_ground_truth(const GroundTruth& truth, const std::string& path,
                        const std::vector<std::string>& provenance = {});
GroundTruth read_ground_truth(const std::string& path, std::vector<std::string>* provenance = nullptr);

}  // namespace jobrec
