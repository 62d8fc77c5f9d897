#include "jobrec/features.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "jobrec/tsv.hpp"

namespace jobrec {
namespace {

constexpr double kMissing = -1.0;
constexpr double kMissingCoordinate = -999.0;
constexpr double kMissingAge = -1e12;

constexpr std::array<std::string_view, 5> kSharedAttributes = {"career_level", "discipline", "industry", "country",
                                                               "region"};
constexpr std::array<std::string_view, 7> kWeekdays = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};

std::array<int, 5> shared_attributes(const Item& i) {
  return {i.career_level, i.discipline_id, i.industry_id, i.country, i.region};
}

std::array<int, 5> shared_attributes(const User& u) {
  return {u.career_level, u.discipline_id, u.industry_id, u.country, u.region};
}

FeatureSchema make_default_schema() {
  std::vector<FeatureSpec> f;
  auto add = [&](std::string name, std::string group, std::string subgroup = {}, double sentinel = kMissing) {
    f.push_back({std::move(name), std::move(group), std::move(subgroup), sentinel});
  };

  for (std::string_view src : {"int", "imp"}) {
    for (auto a : kSharedAttributes) add("event_" + std::string(src) + "_match_" + std::string(a), "event_based");
    add("event_" + std::string(src) + "_match_tags", "event_based", "tags_title");
    add("event_" + std::string(src) + "_match_title", "event_based", "tags_title");
  }
  for (auto a : kSharedAttributes) add("event_users_match_" + std::string(a), "event_based");

  add("pop_clicks", "item_popularity");
  add("pop_positives", "item_popularity");
  add("pop_impressions", "item_popularity");
  add("pop_week_trend", "item_popularity", "trend");
  for (auto d : kWeekdays) add("pop_weekday_trend_" + std::string(d), "item_popularity", "weekday");

  add("cf_max_item_jaccard", "cf_most_similar", "item_clicked_by_user");
  add("cf_max_item_common_users", "cf_most_similar", "item_clicked_by_user");
  add("cf_max_user_int_jaccard", "cf_most_similar", "user_who_clicked_item");
  add("cf_max_user_imp_jaccard", "cf_most_similar", "user_who_clicked_item");

  add("user_events", "user_total_events");
  add("user_unique_items", "user_total_events");
  add("user_events_last_week", "user_total_events", "in_last_week");
  add("user_unique_items_last_week", "user_total_events", "in_last_week");
  add("user_clicks", "user_total_events");
  add("user_bookmarks", "user_total_events");
  add("user_replies", "user_total_events");
  add("user_deletes", "user_total_events");
  add("user_impressions", "user_total_events");
  add("user_unique_impressions", "user_total_events");

  add("secs_anchor_minus_last_pair_event", "seconds_from_last_activity");
  add("secs_last_user_event_minus_last_pair_event", "seconds_from_last_activity");
  add("secs_anchor_minus_last_user_event", "seconds_from_last_activity");
  add("weeks_anchor_minus_last_pair_impression", "seconds_from_last_activity", "impressions");
  add("weeks_last_user_impression_minus_last_pair_impression", "seconds_from_last_activity", "impressions");
  add("weeks_anchor_minus_last_user_impression", "seconds_from_last_activity", "impressions");

  add("max_common_tags_int", "max_common_tags");
  add("max_common_title_int", "max_common_tags");
  add("max_common_tags_imp", "max_common_tags");
  add("max_common_title_imp", "max_common_tags");

  for (const auto& c : kCandidateColumns) add("position_" + std::string(c.name), "candidate_position");

  add("pair_events_user_last_week", "user_item_recent_count");
  add("pair_events_dataset_last_week", "user_item_recent_count");
  add("pair_events_total", "user_item_recent_count");
  add("pair_impressions_total", "user_item_recent_count");

  add("item_created_at", "item_properties", "created_at");
  add("item_age_seconds", "item_properties", "created_at", kMissingAge);
  add("item_latitude", "item_properties", "latitude", kMissingCoordinate);
  add("item_longitude", "item_properties", "longitude", kMissingCoordinate);
  add("item_career_level", "item_properties");
  add("item_discipline", "item_properties");
  add("item_industry", "item_properties");
  add("item_country", "item_properties");
  add("item_region", "item_properties");
  add("item_employment", "item_properties");
  add("item_tag_count", "item_properties");
  add("item_title_count", "item_properties");

  // The difference is never missing; the sentinel lies outside its range.
  add("career_level_difference", "content_similarity", "career_level_difference", -999.0);
  add("jobroles_title_common", "content_similarity", "jobroles_title");
  add("jobroles_tags_common", "content_similarity", "jobroles_tags");
  add("same_discipline", "content_similarity");
  add("same_industry", "content_similarity");
  add("same_country", "content_similarity");
  add("same_region", "content_similarity");

  add("min_distance_int", "geo_distance");
  add("min_distance_imp", "geo_distance");

  add("in_cluster_of_clicked", "item_cluster");
  add("clicked_items_clustered_with", "item_cluster");
  return FeatureSchema(std::move(f));
}

double trend(double last, double prev) { return (last + 1.0) / (prev + 1.0); }

HistoryProfile make_profile(const Dataset& ds, std::span<const Token> items) {
  HistoryProfile p;
  p.items.reserve(items.size());
  for (Token t : items) p.items.push_back(static_cast<ItemIdx>(t));
  for (std::uint32_t k = 0; k < p.items.size(); ++k) {
    const auto& it = ds.item(p.items[k]);
    const auto attrs = shared_attributes(it);
    for (std::size_t a = 0; a < attrs.size(); ++a) ++p.attribute_counts[a][attrs[a]];
    for (Token t : it.tags) p.tag_members[t].push_back(k);
    for (Token t : it.title) p.title_members[t].push_back(k);
  }
  return p;
}

struct OverlapStats {
  std::uint32_t matched = 0;      // history items sharing at least one token
  std::uint32_t max_overlap = 0;  // largest shared-token count
};

OverlapStats overlap_stats(const std::unordered_map<Token, std::vector<std::uint32_t>>& members,
                           std::span<const Token> tokens, std::vector<std::uint32_t>& scratch, std::size_t n) {
  if (scratch.size() < n) scratch.resize(n, 0);
  OverlapStats s;
  std::vector<std::uint32_t> touched;
  for (Token t : tokens) {
    auto it = members.find(t);
    if (it == members.end()) continue;
    for (auto k : it->second) {
      if (scratch[k]++ == 0) touched.push_back(k);
      s.max_overlap = std::max(s.max_overlap, scratch[k]);
    }
  }
  s.matched = static_cast<std::uint32_t>(touched.size());
  for (auto k : touched) scratch[k] = 0;
  return s;
}

std::vector<double> event_fractions(const HistoryProfile& p, const Item& item, std::vector<std::uint32_t>& scratch) {
  std::vector<double> out(7, kMissing);
  if (p.items.empty()) return out;
  const double n = static_cast<double>(p.items.size());
  const auto attrs = shared_attributes(item);
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    auto it = p.attribute_counts[a].find(attrs[a]);
    out[a] = it == p.attribute_counts[a].end() ? 0.0 : static_cast<double>(it->second) / n;
  }
  out[5] = overlap_stats(p.tag_members, item.tags, scratch, p.items.size()).matched / n;
  out[6] = overlap_stats(p.title_members, item.title, scratch, p.items.size()).matched / n;
  return out;
}

double min_distance(const Dataset& ds, const HistoryProfile& p, const Item& item) {
  if (!item.has_location()) return kMissing;
  double best = -1.0;
  for (auto k : p.items) {
    const auto& other = ds.item(k);
    if (!other.has_location()) continue;
    const double dlat = *item.latitude - *other.latitude;
    const double dlon = *item.longitude - *other.longitude;
    const double d = std::sqrt(dlat * dlat + dlon * dlon);
    if (best < 0 || d < best) best = d;
  }
  return best < 0 ? kMissing : best;
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  for (std::size_t a = 0; a < features_.size(); ++a) {
    for (std::size_t b = a + 1; b < features_.size(); ++b) {
      if (features_[a].name == features_[b].name) throw Error("duplicate feature name " + features_[a].name);
    }
  }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t k = 0; k < features_.size(); ++k) {
    if (features_[k].name == name) return k;
  }
  return std::nullopt;
}

std::size_t FeatureSchema::at(std::string_view name) const {
  auto k = index_of(name);
  if (!k) throw Error("unknown feature " + std::string(name));
  return *k;
}

std::vector<std::string> FeatureSchema::groups() const {
  std::vector<std::string> out;
  for (const auto& f : features_) {
    if (std::find(out.begin(), out.end(), f.group) == out.end()) out.push_back(f.group);
  }
  return out;
}

std::uint64_t FeatureSchema::fingerprint() const {
  std::uint64_t h = fnv1a("feature-schema");
  for (const auto& f : features_) {
    h = fnv1a(f.name, h);
    h = fnv1a(f.group, h);
    h = fnv1a(f.subgroup, h);
    h = fnv1a(tsv::format_double(f.sentinel), h);
  }
  return h;
}

const FeatureSchema& default_feature_schema() {
  static const FeatureSchema schema = make_default_schema();
  return schema;
}

ItemClusterIndex::ItemClusterIndex(const Dataset& ds, Timestamp window_seconds) {
  const auto& log = ds.events();
  std::vector<std::vector<ItemIdx>> adj(ds.item_count());
  std::vector<std::pair<Timestamp, ItemIdx>> events;
  for (UserIdx u = 0; u < ds.user_count(); ++u) {
    events.clear();
    for (auto k : log.interactions_of_user(u)) {
      if (is_positive(log.interactions()[k].kind)) {
        events.emplace_back(log.interactions()[k].timestamp, log.interaction_item(k));
      }
    }
    // interactions_of_user is already time-ordered
    std::size_t lo = 0;
    for (std::size_t hi = 0; hi < events.size(); ++hi) {
      while (events[hi].first - events[lo].first > window_seconds) ++lo;
      for (std::size_t k = lo; k < hi; ++k) {
        const ItemIdx a = events[k].second;
        const ItemIdx b = events[hi].second;
        if (a == b) continue;
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
    }
  }
  offsets_.assign(1, 0);
  for (auto& list : adj) {
    make_set(list);
    members_.insert(members_.end(), list.begin(), list.end());
    offsets_.push_back(static_cast<std::uint32_t>(members_.size()));
  }
}

std::span<const ItemIdx> ItemClusterIndex::cluster(ItemIdx item) const {
  return {members_.data() + offsets_[item], offsets_[item + 1] - offsets_[item]};
}

bool ItemClusterIndex::contains(ItemIdx item, ItemIdx other) const {
  const auto c = cluster(item);
  return std::binary_search(c.begin(), c.end(), other);
}

FeatureExtractor::FeatureExtractor(const Dataset& dataset, const SimilarityIndex& index,
                                   const ItemClusterIndex& clusters, std::optional<Timestamp> time_anchor)
    : dataset_(dataset), index_(index), clusters_(clusters) {
  const auto& log = dataset.events();
  now_ = time_anchor.value_or(log.max_timestamp());
  now_week_ = log.max_week().value_or(week_of_timestamp(now_));

  item_stats_.resize(dataset.item_count());
  for (std::size_t k = 0; k < log.interactions().size(); ++k) {
    const auto& e = log.interactions()[k];
    auto& s = item_stats_[log.interaction_item(k)];
    if (is_positive(e.kind)) ++s.positives;
    if (e.kind != InteractionKind::click) continue;
    ++s.clicks;
    if (e.timestamp > now_) continue;
    const Timestamp age = now_ - e.timestamp;
    if (age < kSecondsPerWeek) {
      ++s.clicks_last_week;
      ++s.weekday_last[static_cast<std::size_t>(weekday_of_timestamp(e.timestamp))];
    } else if (age < 2 * kSecondsPerWeek) {
      ++s.clicks_prev_week;
      ++s.weekday_prev[static_cast<std::size_t>(weekday_of_timestamp(e.timestamp))];
    }
  }
  for (std::size_t k = 0; k < log.impressions().size(); ++k) ++item_stats_[log.impression_item(k)].impressions;
}

UserContext FeatureExtractor::prepare(UserIdx u) const {
  const auto& log = dataset_.events();
  UserContext ctx;
  ctx.user = u;
  const auto& user_int = index_.user_items(EventSource::interactions);
  const auto& user_imp = index_.user_items(EventSource::impressions);
  const auto& item_int = index_.item_users(EventSource::interactions);
  ctx.interactions = make_profile(dataset_, user_int.tokens(u));
  ctx.impressions = make_profile(dataset_, user_imp.tokens(u));

  for (auto k : log.interactions_of_user(u)) {
    const auto& e = log.interactions()[k];
    if (is_positive(e.kind)) ctx.last_positive = std::max(ctx.last_positive, e.timestamp);
  }
  for (auto k : log.impressions_of_user(u)) {
    ctx.last_impression_week = std::max(ctx.last_impression_week, log.impressions()[k].week);
  }
  for (auto k : log.interactions_of_user(u)) {
    const auto& e = log.interactions()[k];
    if (!is_positive(e.kind)) continue;
    auto& p = ctx.pairs[log.interaction_item(k)];
    p.last_positive = std::max(p.last_positive, e.timestamp);
    ++p.positives;
    if (ctx.last_positive - e.timestamp < kSecondsPerWeek) ++p.positives_user_week;
    if (e.timestamp <= now_ && now_ - e.timestamp < kSecondsPerWeek) ++p.positives_dataset_week;
  }
  for (auto k : log.impressions_of_user(u)) {
    auto& p = ctx.pairs[log.impression_item(k)];
    p.last_impression_week = std::max(p.last_impression_week, log.impressions()[k].week);
    ++p.impressions;
  }

  // Item-side collaborative similarity: co-occurrence rows of every history item.
  const std::size_t n_items = dataset_.item_count();
  ctx.best_item_jaccard.assign(n_items, kMissing);
  ctx.best_item_common_users.assign(n_items, kMissing);
  std::vector<std::uint32_t> co(n_items, 0);
  std::vector<std::uint32_t> touched;
  for (ItemIdx prev : ctx.interactions.items) {
    touched.clear();
    item_int.accumulate_overlap(item_int.tokens(prev), co, touched);
    const std::size_t prev_size = item_int.set_size(prev);
    for (auto j : touched) {
      if (j != prev) {
        const double jac = jaccard_from_counts(co[j], prev_size, item_int.set_size(j));
        ctx.best_item_jaccard[j] = std::max(ctx.best_item_jaccard[j], jac);
        ctx.best_item_common_users[j] = std::max(ctx.best_item_common_users[j], static_cast<double>(co[j]));
      }
      co[j] = 0;
    }
  }

  // User-side: Jaccard with every user sharing an item.
  auto user_similarity = [&](const SetIndex& sets, std::unordered_map<UserIdx, double>& out) {
    const auto mine = sets.tokens(u);
    std::vector<std::uint32_t> counts(dataset_.user_count(), 0);
    std::vector<std::uint32_t> hit;
    sets.accumulate_overlap(mine, counts, hit);
    out.reserve(hit.size());
    for (auto v : hit) {
      if (v != u) out.emplace(v, jaccard_from_counts(counts[v], mine.size(), sets.set_size(v)));
    }
  };
  user_similarity(user_int, ctx.int_similarity);
  user_similarity(user_imp, ctx.imp_similarity);
  return ctx;
}

std::vector<double> FeatureExtractor::event_match(const UserContext& ctx, ItemIdx i) const {
  const auto& item = dataset_.item(i);
  auto out = event_fractions(ctx.interactions, item, ctx.scratch);
  auto imp = event_fractions(ctx.impressions, item, ctx.scratch);
  out.insert(out.end(), imp.begin(), imp.end());

  // Dual: users who positively interacted with i, matched on u's attributes.
  const auto users = index_.item_users(EventSource::interactions).tokens(i);
  const auto mine = shared_attributes(dataset_.user(ctx.user));
  std::array<double, 5> same{};
  for (Token v : users) {
    const auto theirs = shared_attributes(dataset_.user(static_cast<UserIdx>(v)));
    for (std::size_t a = 0; a < 5; ++a) same[a] += theirs[a] == mine[a] ? 1.0 : 0.0;
  }
  for (std::size_t a = 0; a < 5; ++a) {
    out.push_back(users.empty() ? kMissing : same[a] / static_cast<double>(users.size()));
  }
  return out;
}

std::vector<double> FeatureExtractor::popularity(ItemIdx i) const {
  const auto& s = item_stats_[i];
  std::vector<double> out = {s.clicks, s.positives, s.impressions, trend(s.clicks_last_week, s.clicks_prev_week)};
  for (std::size_t d = 0; d < 7; ++d) out.push_back(trend(s.weekday_last[d], s.weekday_prev[d]));
  return out;
}

std::vector<double> FeatureExtractor::cf_similarity(const UserContext& ctx, ItemIdx i) const {
  std::vector<double> out;
  const bool has_history = !ctx.interactions.items.empty();
  out.push_back(has_history ? std::max(0.0, ctx.best_item_jaccard[i]) : kMissing);
  out.push_back(has_history ? std::max(0.0, ctx.best_item_common_users[i]) : kMissing);

  auto best_user = [&](EventSource source, const std::unordered_map<UserIdx, double>& sims) {
    const auto users = index_.item_users(source).tokens(i);
    bool any = false;
    double best = 0.0;
    for (Token v : users) {
      if (static_cast<UserIdx>(v) == ctx.user) continue;
      any = true;
      auto it = sims.find(static_cast<UserIdx>(v));
      if (it != sims.end()) best = std::max(best, it->second);
    }
    return any ? best : kMissing;
  };
  out.push_back(best_user(EventSource::interactions, ctx.int_similarity));
  out.push_back(best_user(EventSource::impressions, ctx.imp_similarity));
  return out;
}

std::vector<double> FeatureExtractor::user_activity(UserIdx u) const {
  const auto& log = dataset_.events();
  double events = 0, events_week = 0;
  std::array<double, 4> kinds{};
  std::vector<ItemIdx> all, week;
  for (auto k : log.interactions_of_user(u)) {
    const auto& e = log.interactions()[k];
    ++kinds[static_cast<std::size_t>(e.kind)];
    if (!is_positive(e.kind)) continue;
    ++events;
    all.push_back(log.interaction_item(k));
    if (e.timestamp <= now_ && now_ - e.timestamp < kSecondsPerWeek) {
      ++events_week;
      week.push_back(log.interaction_item(k));
    }
  }
  make_set(all);
  make_set(week);
  std::vector<ItemIdx> shown;
  for (auto k : log.impressions_of_user(u)) shown.push_back(log.impression_item(k));
  const double impressions = static_cast<double>(shown.size());
  make_set(shown);
  return {events,
          static_cast<double>(all.size()),
          events_week,
          static_cast<double>(week.size()),
          kinds[0],
          kinds[1],
          kinds[2],
          kinds[3],
          impressions,
          static_cast<double>(shown.size())};
}

std::vector<double> FeatureExtractor::recency(const UserContext& ctx, ItemIdx i) const {
  std::vector<double> out(6, kMissing);
  auto it = ctx.pairs.find(i);
  const PairStats* p = it == ctx.pairs.end() ? nullptr : &it->second;
  if (p && p->last_positive >= 0) {
    out[0] = static_cast<double>(now_ - p->last_positive);
    out[1] = static_cast<double>(ctx.last_positive - p->last_positive);
  }
  if (ctx.last_positive >= 0) out[2] = static_cast<double>(now_ - ctx.last_positive);
  if (p && p->last_impression_week >= 0) {
    out[3] = static_cast<double>(now_week_ - p->last_impression_week);
    out[4] = static_cast<double>(ctx.last_impression_week - p->last_impression_week);
  }
  if (ctx.last_impression_week >= 0) out[5] = static_cast<double>(now_week_ - ctx.last_impression_week);
  return out;
}

std::vector<double> FeatureExtractor::common_tokens(const UserContext& ctx, ItemIdx i) const {
  const auto& item = dataset_.item(i);
  std::vector<double> out;
  for (const auto* p : {&ctx.interactions, &ctx.impressions}) {
    if (p->items.empty()) {
      out.push_back(kMissing);
      out.push_back(kMissing);
      continue;
    }
    out.push_back(overlap_stats(p->tag_members, item.tags, ctx.scratch, p->items.size()).max_overlap);
    out.push_back(overlap_stats(p->title_members, item.title, ctx.scratch, p->items.size()).max_overlap);
  }
  return out;
}

std::vector<double> FeatureExtractor::candidate_positions(const CandidateEntry& entry) const {
  std::vector<double> out;
  out.reserve(kCandidateColumnCount);
  for (auto r : entry.rank) out.push_back(r == 0 ? kMissing : static_cast<double>(r));
  return out;
}

std::vector<double> FeatureExtractor::user_item_recent_count(const UserContext& ctx, ItemIdx i) const {
  auto it = ctx.pairs.find(i);
  if (it == ctx.pairs.end()) return {0.0, 0.0, 0.0, 0.0};
  const auto& p = it->second;
  return {p.positives_user_week, p.positives_dataset_week, p.positives, p.impressions};
}

std::vector<double> FeatureExtractor::item_properties(ItemIdx i) const {
  const auto& it = dataset_.item(i);
  return {it.created_at ? static_cast<double>(*it.created_at) : kMissing,
          it.created_at ? static_cast<double>(now_ - *it.created_at) : kMissingAge,
          it.latitude ? *it.latitude : kMissingCoordinate,
          it.longitude ? *it.longitude : kMissingCoordinate,
          static_cast<double>(it.career_level),
          static_cast<double>(it.discipline_id),
          static_cast<double>(it.industry_id),
          static_cast<double>(it.country),
          static_cast<double>(it.region),
          static_cast<double>(it.employment),
          static_cast<double>(it.tags.size()),
          static_cast<double>(it.title.size())};
}

std::vector<double> FeatureExtractor::content_similarity(UserIdx u, ItemIdx i) const {
  const auto& user = dataset_.user(u);
  const auto& item = dataset_.item(i);
  return {static_cast<double>(item.career_level - user.career_level),
          static_cast<double>(intersection_size<Token>(user.jobroles, item.title)),
          static_cast<double>(intersection_size<Token>(user.jobroles, item.tags)),
          user.discipline_id == item.discipline_id ? 1.0 : 0.0,
          user.industry_id == item.industry_id ? 1.0 : 0.0,
          user.country == item.country ? 1.0 : 0.0,
          user.region == item.region ? 1.0 : 0.0};
}

std::vector<double> FeatureExtractor::geo_distance(const UserContext& ctx, ItemIdx i) const {
  const auto& item = dataset_.item(i);
  return {min_distance(dataset_, ctx.interactions, item), min_distance(dataset_, ctx.impressions, item)};
}

std::vector<double> FeatureExtractor::cluster(const UserContext& ctx, ItemIdx i) const {
  const auto members = clusters_.cluster(i);
  const auto& history = ctx.interactions.items;  // sorted
  const auto n = intersection_size<ItemIdx>(members, history);
  return {n > 0 ? 1.0 : 0.0, static_cast<double>(n)};
}

void FeatureExtractor::extract(const UserContext& ctx, const CandidateEntry& entry, std::span<double> out) const {
  const ItemIdx i = entry.item;
  std::size_t pos = 0;
  auto put = [&](const std::vector<double>& values) {
    std::copy(values.begin(), values.end(), out.begin() + static_cast<std::ptrdiff_t>(pos));
    pos += values.size();
  };
  put(event_match(ctx, i));
  put(popularity(i));
  put(cf_similarity(ctx, i));
  put(user_activity(ctx.user));
  put(recency(ctx, i));
  put(common_tokens(ctx, i));
  put(candidate_positions(entry));
  put(user_item_recent_count(ctx, i));
  put(item_properties(i));
  put(content_similarity(ctx.user, i));
  put(geo_distance(ctx, i));
  put(cluster(ctx, i));
  if (pos != out.size()) throw Error("feature row width does not match the schema");
}

std::vector<double> FeatureExtractor::extract(UserIdx u, const CandidateList& candidates, ItemIdx i) const {
  if (candidates.user != u) throw Error("candidate list belongs to another user");
  const auto* entry = candidates.find(i);
  if (!entry) throw Error("item is not among the user's candidates");
  std::vector<double> row(schema().size());
  extract(prepare(u), *entry, row);
  return row;
}

FeatureMatrix build_matrix(const FeatureExtractor& extractor, std::span<const CandidateList> lists,
                           const GroundTruth* truth, std::size_t threads) {
  const auto& ds_schema = extractor.schema();
  FeatureMatrix m;
  m.schema = ds_schema;
  std::vector<std::size_t> offsets(lists.size() + 1, 0);
  for (std::size_t k = 0; k < lists.size(); ++k) offsets[k + 1] = offsets[k] + lists[k].entries.size();
  const std::size_t rows = offsets.back();
  const std::size_t cols = ds_schema.size();
  m.user_ids.resize(rows);
  m.item_ids.resize(rows);
  m.values.resize(rows * cols);
  if (truth) m.labels.resize(rows);

  const Dataset& ds = extractor.dataset();
  parallel_for(lists.size(), threads, [&](std::size_t k) {
    const auto& list = lists[k];
    if (list.entries.empty()) return;
    const auto ctx = extractor.prepare(list.user);
    const UserId user_id = ds.user(list.user).id;
    const auto* positives = truth ? [&]() -> const std::vector<ItemId>* {
      auto it = truth->find(user_id);
      return it == truth->end() ? nullptr : &it->second;
    }() : nullptr;
    for (std::size_t e = 0; e < list.entries.size(); ++e) {
      const std::size_t r = offsets[k] + e;
      const ItemId item_id = ds.item(list.entries[e].item).id;
      m.user_ids[r] = user_id;
      m.item_ids[r] = item_id;
      if (truth) {
        m.labels[r] = positives && std::binary_search(positives->begin(), positives->end(), item_id) ? 1 : 0;
      }
      extractor.extract(ctx, list.entries[e], std::span<double>(m.values.data() + r * cols, cols));
    }
  });
  return m;
}

void write_schema(const FeatureSchema& schema, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "name\tgroup\tsubgroup\tsentinel\n";
  for (const auto& f : schema.features()) {
    out << f.name << '\t' << f.group << '\t' << f.subgroup << '\t' << tsv::format_double(f.sentinel) << '\n';
  }
}

FeatureSchema read_schema(const std::string& path) {
  tsv::Reader r(path);
  constexpr std::array<std::string_view, 4> cols = {"name", "group", "subgroup", "sentinel"};
  r.expect_header(cols);
  std::vector<FeatureSpec> features;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    if (f.size() != 4) r.fail("unexpected column count");
    auto sentinel = tsv::parse_number<double>(f[3]);
    if (!sentinel) r.fail("bad sentinel");
    features.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2]), *sentinel});
  }
  return FeatureSchema(std::move(features));
}

void write_matrix(const FeatureMatrix& m, const std::string& path, const std::vector<std::string>& provenance) {
  write_schema(m.schema, path + ".schema.tsv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "user_id\titem_id";
  if (m.labeled()) out << "\tlabel";
  for (const auto& f : m.schema.features()) out << '\t' << f.name;
  out << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << m.user_ids[r] << '\t' << m.item_ids[r];
    if (m.labeled()) out << '\t' << static_cast<int>(m.labels[r]);
    for (double v : m.row(r)) out << '\t' << tsv::format_double(v);
    out << '\n';
  }
}

FeatureMatrix read_matrix(const std::string& path, std::vector<std::string>* provenance) {
  FeatureMatrix m;
  m.schema = read_schema(path + ".schema.tsv");
  tsv::Reader r(path);
  std::vector<std::string_view> f;
  if (!r.next(f)) r.fail("missing header row");
  if (f.size() < 2 || f[0] != "user_id" || f[1] != "item_id") r.fail("unexpected header");
  const bool labeled = f.size() > 2 && f[2] == "label";
  const std::size_t first = labeled ? 3 : 2;
  if (f.size() != first + m.schema.size()) r.fail("header width does not match the schema sidecar");
  for (std::size_t c = 0; c < m.schema.size(); ++c) {
    if (f[first + c] != m.schema[c].name) r.fail("header column differs from the schema sidecar");
  }
  while (r.next(f)) {
    if (f.size() != first + m.schema.size()) r.fail("unexpected column count");
    auto u = tsv::parse_number<UserId>(f[0]);
    auto i = tsv::parse_number<ItemId>(f[1]);
    if (!u || !i) r.fail("bad id");
    m.user_ids.push_back(*u);
    m.item_ids.push_back(*i);
    if (labeled) {
      if (f[2] != "0" && f[2] != "1") r.fail("label must be 0 or 1");
      m.labels.push_back(f[2] == "1" ? 1 : 0);
    }
    for (std::size_t c = 0; c < m.schema.size(); ++c) {
      auto v = tsv::parse_number<double>(f[first + c]);
      if (!v) r.fail("bad feature value");
      m.values.push_back(*v);
    }
  }
  if (provenance) *provenance = r.comments();
  return m;
}

}  // namespace jobrec
