#include "jobrec/dataset.hpp"

#include <array>
#include <fstream>
#include <numeric>
#include <set>

#include "jobrec/tsv.hpp"

namespace jobrec {
namespace {

constexpr std::array<std::string_view, 12> kUserColumns = {
    "id",
    "jobroles",
    "career_level",
    "discipline_id",
    "industry_id",
    "country",
    "region",
    "experience_n_entries_class",
    "experience_years_experience",
    "experience_years_in_current",
    "edu_degree",
    "edu_fieldofstudies"};

constexpr std::array<std::string_view, 13> kItemColumns = {
    "id",        "title",   "career_level", "discipline_id", "industry_id",
    "country",   "region",  "latitude",     "longitude",     "employment",
    "tags",      "created_at", "active_during_test"};

constexpr std::array<std::string_view, 4> kInteractionColumns = {"user_id", "item_id",
                                                                 "interaction_type", "created_at"};

constexpr std::array<std::string_view, 4> kImpressionColumns = {"user_id", "year", "week", "items"};

template <typename T>
T require_number(tsv::Reader& r, std::string_view field, std::string_view name) {
  auto v = tsv::parse_number<T>(field);
  if (!v) r.fail("bad value '" + std::string(field) + "' in column " + std::string(name));
  return *v;
}

// Missing scalars are the empty string and map to the 0 sentinel category.
int categorical(tsv::Reader& r, std::string_view field, std::string_view name) {
  if (field.empty()) return 0;
  return require_number<int>(r, field, name);
}

template <typename T>
std::optional<T> optional_number(tsv::Reader& r, std::string_view field, std::string_view name) {
  if (field.empty()) return std::nullopt;
  return require_number<T>(r, field, name);
}

std::vector<Token> token_list(tsv::Reader& r, std::string_view field, std::string_view name) {
  std::vector<Token> out;
  if (field.empty()) return out;
  std::vector<std::string_view> parts;
  tsv::split(field, ',', parts);
  out.reserve(parts.size());
  for (auto p : parts) {
    if (p.empty()) continue;
    out.push_back(require_number<Token>(r, p, name));
  }
  make_set(out);
  return out;
}

void expect_width(tsv::Reader& r, const std::vector<std::string_view>& fields, std::size_t n) {
  if (fields.size() != n) {
    r.fail("expected " + std::to_string(n) + " columns, got " + std::to_string(fields.size()));
  }
}

std::string join_tokens(const std::vector<Token>& tokens) {
  std::string s;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(tokens[k]);
  }
  return s;
}

template <typename Event, typename TimeOf>
void build_csr(std::size_t rows, const std::vector<std::uint32_t>& row_of, const std::vector<Event>& events,
               TimeOf time_of, std::vector<std::uint32_t>& offsets, std::vector<std::uint32_t>& values) {
  offsets.assign(rows + 1, 0);
  for (auto r : row_of) ++offsets[r + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  values.resize(row_of.size());
  std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::uint32_t k = 0; k < row_of.size(); ++k) values[cursor[row_of[k]]++] = k;
  for (std::size_t r = 0; r < rows; ++r) {
    std::stable_sort(values.begin() + offsets[r], values.begin() + offsets[r + 1],
                     [&](std::uint32_t a, std::uint32_t b) { return time_of(events[a]) < time_of(events[b]); });
  }
}

std::ofstream open_output(const std::string& path, const std::vector<std::string>& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& line : provenance) out << "# " << line << '\n';
  return out;
}

}  // namespace

IdMap::IdMap(std::vector<std::int64_t> sorted_ids) : ids_(std::move(sorted_ids)) {}

std::optional<std::uint32_t> IdMap::find(std::int64_t id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - ids_.begin());
}

std::uint32_t IdMap::at(std::int64_t id) const {
  auto idx = find(id);
  if (!idx) throw Error("unknown id " + std::to_string(id));
  return *idx;
}

EventLog::EventLog(std::vector<Interaction> interactions, std::vector<Impression> impressions,
                   const IdMap& users, const IdMap& items)
    : interactions_(std::move(interactions)), impressions_(std::move(impressions)) {
  interaction_user_.reserve(interactions_.size());
  interaction_item_.reserve(interactions_.size());
  for (const auto& e : interactions_) {
    interaction_user_.push_back(users.at(e.user_id));
    interaction_item_.push_back(items.at(e.item_id));
  }
  impression_user_.reserve(impressions_.size());
  impression_item_.reserve(impressions_.size());
  for (const auto& e : impressions_) {
    impression_user_.push_back(users.at(e.user_id));
    impression_item_.push_back(items.at(e.item_id));
  }

  auto ts = [](const Interaction& e) { return e.timestamp; };
  auto wk = [](const Impression& e) { return e.week; };
  build_csr(users.size(), interaction_user_, interactions_, ts, int_by_user_.offsets, int_by_user_.values);
  build_csr(items.size(), interaction_item_, interactions_, ts, int_by_item_.offsets, int_by_item_.values);
  build_csr(users.size(), impression_user_, impressions_, wk, imp_by_user_.offsets, imp_by_user_.values);
  build_csr(items.size(), impression_item_, impressions_, wk, imp_by_item_.offsets, imp_by_item_.values);

  if (!interactions_.empty()) {
    auto [lo, hi] = std::minmax_element(interactions_.begin(), interactions_.end(),
                                        [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    min_timestamp_ = lo->timestamp;
    max_timestamp_ = hi->timestamp;
  }
  if (!impressions_.empty()) {
    auto [lo, hi] = std::minmax_element(impressions_.begin(), impressions_.end(),
                                        [](const auto& a, const auto& b) { return a.week < b.week; });
    min_week_ = lo->week;
    max_week_ = hi->week;
  }
}

std::span<const std::uint32_t> EventLog::interactions_of_user(UserIdx u) const { return int_by_user_.row(u); }
std::span<const std::uint32_t> EventLog::interactions_of_item(ItemIdx i) const { return int_by_item_.row(i); }
std::span<const std::uint32_t> EventLog::impressions_of_user(UserIdx u) const { return imp_by_user_.row(u); }
std::span<const std::uint32_t> EventLog::impressions_of_item(ItemIdx i) const { return imp_by_item_.row(i); }

Dataset::Dataset(std::vector<User> users, std::vector<Item> items, std::vector<Interaction> interactions,
                 std::vector<Impression> impressions, std::vector<UserId> target_users, bool drop_unknown)
    : users_(std::move(users)), items_(std::move(items)) {
  std::sort(users_.begin(), users_.end(), [](const User& a, const User& b) { return a.id < b.id; });
  std::sort(items_.begin(), items_.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
  std::vector<std::int64_t> uids, iids;
  uids.reserve(users_.size());
  iids.reserve(items_.size());
  for (auto& u : users_) {
    if (!uids.empty() && uids.back() == u.id) throw Error("duplicate user id " + std::to_string(u.id));
    uids.push_back(u.id);
    make_set(u.jobroles);
    make_set(u.edu_fieldofstudies);
  }
  for (auto& i : items_) {
    if (!iids.empty() && iids.back() == i.id) throw Error("duplicate item id " + std::to_string(i.id));
    if (i.latitude.has_value() != i.longitude.has_value()) {
      throw Error("item " + std::to_string(i.id) + ": latitude and longitude must be both present or both missing");
    }
    iids.push_back(i.id);
    make_set(i.title);
    make_set(i.tags);
  }
  user_ids_ = IdMap(std::move(uids));
  item_ids_ = IdMap(std::move(iids));

  auto known = [&](UserId u, ItemId i) { return user_ids_.find(u) && item_ids_.find(i); };
  auto drop = [&](auto& events, std::size_t& dropped, const char* what) {
    const auto before = events.size();
    std::erase_if(events, [&](const auto& e) { return !known(e.user_id, e.item_id); });
    dropped = before - events.size();
    if (dropped && !drop_unknown) {
      throw Error(std::to_string(dropped) + " " + what + " reference unknown users or items");
    }
  };
  drop(interactions, report_.dropped_interactions, "interactions");
  drop(impressions, report_.dropped_impressions, "impressions");

  make_set(target_users);
  const auto targets_before = target_users.size();
  std::erase_if(target_users, [&](UserId u) { return !user_ids_.find(u); });
  report_.dropped_target_users = targets_before - target_users.size();
  if (report_.dropped_target_users && !drop_unknown) throw Error("target users reference unknown users");
  target_users_ = std::move(target_users);

  events_ = EventLog(std::move(interactions), std::move(impressions), user_ids_, item_ids_);
  active_.resize(items_.size());
  for (std::size_t k = 0; k < items_.size(); ++k) active_[k] = items_[k].active_during_test;

  report_.users = users_.size();
  report_.items = items_.size();
  report_.interactions = events_.interactions().size();
  report_.impressions = events_.impressions().size();
  report_.target_users = target_users_.size();
}

DatasetPaths DatasetPaths::in_directory(const std::string& dir) {
  return {dir + "/users.tsv", dir + "/items.tsv", dir + "/interactions.tsv", dir + "/impressions.tsv",
          dir + "/target_users.tsv"};
}

Dataset load_dataset(const DatasetPaths& paths, const LoadOptions& options) {
  std::vector<std::string_view> f;

  std::vector<User> users;
  {
    tsv::Reader r(paths.users);
    r.expect_header(kUserColumns);
    while (r.next(f)) {
      expect_width(r, f, kUserColumns.size());
      User u;
      u.id = require_number<UserId>(r, f[0], "id");
      u.jobroles = token_list(r, f[1], "jobroles");
      u.career_level = categorical(r, f[2], "career_level");
      u.discipline_id = categorical(r, f[3], "discipline_id");
      u.industry_id = categorical(r, f[4], "industry_id");
      u.country = categorical(r, f[5], "country");
      u.region = categorical(r, f[6], "region");
      u.experience_n_entries_class = categorical(r, f[7], "experience_n_entries_class");
      u.experience_years_experience = categorical(r, f[8], "experience_years_experience");
      u.experience_years_in_current = categorical(r, f[9], "experience_years_in_current");
      u.edu_degree = categorical(r, f[10], "edu_degree");
      u.edu_fieldofstudies = token_list(r, f[11], "edu_fieldofstudies");
      users.push_back(std::move(u));
    }
  }

  std::vector<Item> items;
  {
    tsv::Reader r(paths.items);
    r.expect_header(kItemColumns);
    while (r.next(f)) {
      expect_width(r, f, kItemColumns.size());
      Item it;
      it.id = require_number<ItemId>(r, f[0], "id");
      it.title = token_list(r, f[1], "title");
      it.career_level = categorical(r, f[2], "career_level");
      it.discipline_id = categorical(r, f[3], "discipline_id");
      it.industry_id = categorical(r, f[4], "industry_id");
      it.country = categorical(r, f[5], "country");
      it.region = categorical(r, f[6], "region");
      it.latitude = optional_number<double>(r, f[7], "latitude");
      it.longitude = optional_number<double>(r, f[8], "longitude");
      if (it.latitude.has_value() != it.longitude.has_value()) {
        r.fail("latitude and longitude must be both present or both missing");
      }
      it.employment = categorical(r, f[9], "employment");
      it.tags = token_list(r, f[10], "tags");
      it.created_at = optional_number<Timestamp>(r, f[11], "created_at");
      it.active_during_test = categorical(r, f[12], "active_during_test") != 0;
      items.push_back(std::move(it));
    }
  }

  std::vector<Interaction> interactions;
  {
    tsv::Reader r(paths.interactions);
    r.expect_header(kInteractionColumns);
    const auto& k = options.kinds;
    while (r.next(f)) {
      expect_width(r, f, kInteractionColumns.size());
      Interaction e;
      e.user_id = require_number<UserId>(r, f[0], "user_id");
      e.item_id = require_number<ItemId>(r, f[1], "item_id");
      const int code = require_number<int>(r, f[2], "interaction_type");
      if (code == k.click) {
        e.kind = InteractionKind::click;
      } else if (code == k.bookmark) {
        e.kind = InteractionKind::bookmark;
      } else if (code == k.reply) {
        e.kind = InteractionKind::reply;
      } else if (code == k.remove) {
        e.kind = InteractionKind::remove;
      } else {
        r.fail("unknown interaction_type " + std::to_string(code));
      }
      e.timestamp = require_number<Timestamp>(r, f[3], "created_at");
      if (e.timestamp <= 0) r.fail("timestamp must be positive");
      interactions.push_back(e);
    }
  }

  std::vector<Impression> impressions;
  {
    tsv::Reader r(paths.impressions);
    r.expect_header(kImpressionColumns);
    std::vector<std::string_view> ids;
    while (r.next(f)) {
      expect_width(r, f, kImpressionColumns.size());
      const auto user = require_number<UserId>(r, f[0], "user_id");
      const int year = require_number<int>(r, f[1], "year");
      const int week = require_number<int>(r, f[2], "week");
      if (week < 1 || week > 53) r.fail("week out of range");
      const int ordinal = week_of_iso(year, week);
      tsv::split(f[3], ',', ids);
      for (auto s : ids) {
        if (s.empty()) continue;
        impressions.push_back({user, require_number<ItemId>(r, s, "items"), ordinal});
      }
    }
  }

  std::vector<UserId> targets;
  {
    tsv::Reader r(paths.target_users);
    bool first = true;
    while (r.next(f)) {
      if (f.size() == 1 && f[0].empty()) continue;
      auto id = tsv::parse_number<UserId>(f[0]);
      if (!id) {
        if (first) {  // header row
          first = false;
          continue;
        }
        r.fail("bad user id '" + std::string(f[0]) + "'");
      }
      first = false;
      targets.push_back(*id);
    }
  }

  Dataset ds(std::move(users), std::move(items), std::move(interactions), std::move(impressions),
             std::move(targets), options.drop_unknown);
  const auto& rep = ds.report();
  log_info("loaded users=" + std::to_string(rep.users) + " items=" + std::to_string(rep.items) +
           " interactions=" + std::to_string(rep.interactions) + " impressions=" + std::to_string(rep.impressions) +
           " target_users=" + std::to_string(rep.target_users));
  if (rep.dropped_interactions || rep.dropped_impressions || rep.dropped_target_users) {
    log_warning("dropped events with unknown ids: interactions=" + std::to_string(rep.dropped_interactions) +
                " impressions=" + std::to_string(rep.dropped_impressions) +
                " target_users=" + std::to_string(rep.dropped_target_users));
  }
  return ds;
}

void write_dataset(const Dataset& ds, const DatasetPaths& paths, const KindCodes& kinds,
                   const std::vector<std::string>& provenance) {
  auto header = [](std::ofstream& out, auto columns) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "\t" : "") << columns[k];
    out << '\n';
  };
  {
    auto out = open_output(paths.users, provenance);
    header(out, kUserColumns);
    for (const auto& u : ds.users()) {
      out << u.id << '\t' << join_tokens(u.jobroles) << '\t' << u.career_level << '\t' << u.discipline_id << '\t'
          << u.industry_id << '\t' << u.country << '\t' << u.region << '\t' << u.experience_n_entries_class << '\t'
          << u.experience_years_experience << '\t' << u.experience_years_in_current << '\t' << u.edu_degree << '\t'
          << join_tokens(u.edu_fieldofstudies) << '\n';
    }
  }
  {
    auto out = open_output(paths.items, provenance);
    header(out, kItemColumns);
    for (const auto& i : ds.items()) {
      out << i.id << '\t' << join_tokens(i.title) << '\t' << i.career_level << '\t' << i.discipline_id << '\t'
          << i.industry_id << '\t' << i.country << '\t' << i.region << '\t'
          << (i.latitude ? tsv::format_double(*i.latitude) : "") << '\t'
          << (i.longitude ? tsv::format_double(*i.longitude) : "") << '\t' << i.employment << '\t'
          << join_tokens(i.tags) << '\t' << (i.created_at ? std::to_string(*i.created_at) : "") << '\t'
          << (i.active_during_test ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_output(paths.interactions, provenance);
    header(out, kInteractionColumns);
    for (const auto& e : ds.events().interactions()) {
      int code = kinds.click;
      switch (e.kind) {
        case InteractionKind::click: code = kinds.click; break;
        case InteractionKind::bookmark: code = kinds.bookmark; break;
        case InteractionKind::reply: code = kinds.reply; break;
        case InteractionKind::remove: code = kinds.remove; break;
      }
      out << e.user_id << '\t' << e.item_id << '\t' << code << '\t' << e.timestamp << '\n';
    }
  }
  {
    auto out = open_output(paths.impressions, provenance);
    header(out, kImpressionColumns);
    // One row per (user, week) run in flat-list order.
    const auto imps = ds.events().impressions();
    std::size_t k = 0;
    while (k < imps.size()) {
      std::size_t end = k + 1;
      while (end < imps.size() && imps[end].user_id == imps[k].user_id && imps[end].week == imps[k].week) ++end;
      auto [year, week] = iso_of_week(imps[k].week);
      out << imps[k].user_id << '\t' << year << '\t' << week << '\t';
      for (std::size_t j = k; j < end; ++j) out << (j > k ? "," : "") << imps[j].item_id;
      out << '\n';
      k = end;
    }
  }
  {
    auto out = open_output(paths.target_users, provenance);
    out << "user_id\n";
    for (auto u : ds.target_users()) out << u << '\n';
  }
}

SplitResult temporal_split(const Dataset& ds, int holdout_weeks) {
  if (holdout_weeks < 0) throw Error("holdout_weeks must be non-negative");
  const auto& log = ds.events();
  SplitResult result;
  if (holdout_weeks == 0) {
    result.train = ds;
    result.boundary = log.max_timestamp() + 1;
    result.holdout_first_week = log.max_week().value_or(0) + 1;
    return result;
  }

  std::set<int> weeks;
  for (const auto& e : log.interactions()) weeks.insert(week_of_timestamp(e.timestamp));
  for (const auto& e : log.impressions()) weeks.insert(e.week);
  if (weeks.size() < 2) throw Error("temporal split needs events from at least two distinct weeks");

  result.boundary = log.max_timestamp() - static_cast<Timestamp>(holdout_weeks) * kSecondsPerWeek;
  result.holdout_first_week = log.max_week().value_or(0) - holdout_weeks + 1;

  std::vector<Interaction> train_int;
  for (const auto& e : log.interactions()) {
    if (e.timestamp < result.boundary) {
      train_int.push_back(e);
    } else {
      result.holdout.interactions.push_back(e);
    }
  }
  std::vector<Impression> train_imp;
  for (const auto& e : log.impressions()) {
    if (e.week < result.holdout_first_week) {
      train_imp.push_back(e);
    } else {
      result.holdout.impressions.push_back(e);
    }
  }
  if (train_int.empty() && !log.interactions().empty()) {
    result.warnings.emplace_back("all interactions fall inside the holdout window; training side is empty");
    log_warning(result.warnings.back());
  }
  result.train = Dataset(ds.users(), ds.items(), std::move(train_int), std::move(train_imp), ds.target_users());
  return result;
}

GroundTruth build_ground_truth(std::span<const Interaction> holdout, std::span<const UserId> target_users) {
  std::vector<UserId> targets(target_users.begin(), target_users.end());
  make_set(targets);
  GroundTruth truth;
  for (const auto& e : holdout) {
    if (!is_positive(e.kind)) continue;
    if (!std::binary_search(targets.begin(), targets.end(), e.user_id)) continue;
    truth[e.user_id].push_back(e.item_id);
  }
  for (auto& [u, items] : truth) make_set(items);
  return truth;
}

void write_ground_truth(const GroundTruth& truth, const std::string& path, const std::vector<std::string>& provenance) {
  auto out = open_output(path, provenance);
  out << "user_id\titems\n";
  for (const auto& [u, items] : truth) {
    out << u << '\t';
    for (std::size_t k = 0; k < items.size(); ++k) out << (k ? "," : "") << items[k];
    out << '\n';
  }
}

GroundTruth read_ground_truth(const std::string& path, std::vector<std::string>* provenance) {
  tsv::Reader r(path);
  constexpr std::array<std::string_view, 2> cols = {"user_id", "items"};
  r.expect_header(cols);
  GroundTruth truth;
  std::vector<std::string_view> f, ids;
  while (r.next(f)) {
    expect_width(r, f, 2);
    const auto u = require_number<UserId>(r, f[0], "user_id");
    tsv::split(f[1], ',', ids);
    std::vector<ItemId> items;
    for (auto s : ids) {
      if (!s.empty()) items.push_back(require_number<ItemId>(r, s, "items"));
    }
    make_set(items);
    if (items.empty()) r.fail("empty ground-truth set");
    if (!truth.emplace(u, std::move(items)).second) r.fail("duplicate user");
  }
  if (provenance) *provenance = r.comments();
  return truth;
}

}  // namespace jobrec
