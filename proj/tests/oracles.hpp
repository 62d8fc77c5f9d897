#pragma once

// Brute-force reference implementations and random fixtures shared by the
// unit and acceptance tests. Everything here scans flat event lists directly
// and never touches the library's indexes.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "jobrec/candidates.hpp"
#include "jobrec/dataset.hpp"
#include "jobrec/evaluation.hpp"
#include "jobrec/similarity.hpp"

namespace oracle {

using namespace jobrec;

struct FixtureShape {
  std::size_t users = 30;
  std::size_t items = 40;
  std::size_t interactions = 200;
  std::size_t impressions = 300;
  int tokens = 20;
  int weeks = 4;
  double active_share = 0.7;
  double delete_share = 0.1;
  std::size_t max_set = 5;
};

inline Dataset random_dataset(std::uint64_t seed, const FixtureShape& s = {}) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto coin = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };
  auto tokens = [&]() {
    std::vector<Token> t;
    const auto n = pick(s.max_set + 1);
    for (std::size_t k = 0; k < n; ++k) t.push_back(static_cast<Token>(pick(static_cast<std::size_t>(s.tokens))));
    return t;
  };
  const Timestamp start = 1439164800;
  std::vector<User> users(s.users);
  for (std::size_t u = 0; u < s.users; ++u) {
    users[u].id = static_cast<UserId>(10 + 3 * u);
    users[u].jobroles = tokens();
    users[u].career_level = static_cast<int>(pick(4));
    users[u].discipline_id = static_cast<int>(pick(3));
    users[u].industry_id = static_cast<int>(pick(3));
    users[u].country = static_cast<int>(pick(2));
    users[u].region = static_cast<int>(pick(3));
  }
  std::vector<Item> items(s.items);
  for (std::size_t i = 0; i < s.items; ++i) {
    items[i].id = static_cast<ItemId>(100 + 7 * i);
    items[i].tags = tokens();
    items[i].title = tokens();
    items[i].career_level = static_cast<int>(pick(4));
    items[i].discipline_id = static_cast<int>(pick(3));
    items[i].industry_id = static_cast<int>(pick(3));
    items[i].country = static_cast<int>(pick(2));
    items[i].region = static_cast<int>(pick(3));
    if (coin(0.7)) {
      items[i].latitude = static_cast<double>(pick(10));
      items[i].longitude = static_cast<double>(pick(10));
    }
    if (coin(0.8)) items[i].created_at = start - static_cast<Timestamp>(pick(1000000));
    items[i].active_during_test = coin(s.active_share);
  }
  std::vector<Interaction> ints;
  for (std::size_t k = 0; k < s.interactions; ++k) {
    InteractionKind kind = coin(s.delete_share) ? InteractionKind::remove : static_cast<InteractionKind>(pick(3));
    ints.push_back({users[pick(s.users)].id, items[pick(s.items)].id, kind,
                    start + static_cast<Timestamp>(pick(static_cast<std::size_t>(s.weeks) * kSecondsPerWeek))});
  }
  std::vector<Impression> imps;
  const int first_week = week_of_timestamp(start);
  for (std::size_t k = 0; k < s.impressions; ++k) {
    imps.push_back({users[pick(s.users)].id, items[pick(s.items)].id,
                    first_week + static_cast<int>(pick(static_cast<std::size_t>(s.weeks)))});
  }
  std::vector<UserId> targets;
  for (const auto& u : users) {
    if (coin(0.6)) targets.push_back(u.id);
  }
  return Dataset(users, items, ints, imps, targets);
}

// ---- similarity ----

inline double jaccard(const std::set<std::int64_t>& a, const std::set<std::int64_t>& b) {
  std::size_t common = 0;
  for (auto x : a) common += b.count(x);
  std::set<std::int64_t> uni = a;
  uni.insert(b.begin(), b.end());
  return uni.empty() ? 0.0 : static_cast<double>(common) / static_cast<double>(uni.size());
}

// item (dense) sets per user from a flat scan
inline std::vector<std::set<std::int64_t>> user_sets(const Dataset& ds, EventSource source) {
  std::vector<std::set<std::int64_t>> out(ds.user_count());
  const auto& log = ds.events();
  if (source == EventSource::interactions) {
    for (std::size_t k = 0; k < log.interactions().size(); ++k) {
      const auto& e = log.interactions()[k];
      if (e.kind == InteractionKind::remove) continue;
      out[ds.user_ids().at(e.user_id)].insert(ds.item_ids().at(e.item_id));
    }
  } else {
    for (const auto& e : log.impressions()) out[ds.user_ids().at(e.user_id)].insert(ds.item_ids().at(e.item_id));
  }
  return out;
}

inline std::vector<std::set<std::int64_t>> item_user_sets(const Dataset& ds) {
  std::vector<std::set<std::int64_t>> out(ds.item_count());
  for (const auto& e : ds.events().interactions()) {
    if (e.kind == InteractionKind::remove) continue;
    out[ds.item_ids().at(e.item_id)].insert(ds.user_ids().at(e.user_id));
  }
  return out;
}

inline std::vector<Neighbor> rank(std::vector<Neighbor> all, std::size_t k) {
  std::vector<Neighbor> kept;
  for (const auto& n : all) {
    if (n.score > 0) kept.push_back(n);
  }
  // insertion sort: deliberately a different algorithm from the library
  for (std::size_t a = 1; a < kept.size(); ++a) {
    for (std::size_t b = a; b > 0; --b) {
      const auto& x = kept[b - 1];
      const auto& y = kept[b];
      const bool swap = y.score > x.score || (y.score == x.score && y.entity < x.entity);
      if (!swap) break;
      std::swap(kept[b - 1], kept[b]);
    }
  }
  if (kept.size() > k) kept.resize(k);
  return kept;
}

inline std::vector<Neighbor> top_k_jaccard(const std::vector<std::set<std::int64_t>>& sets, std::uint32_t e,
                                           std::size_t k) {
  std::vector<Neighbor> all;
  for (std::uint32_t o = 0; o < sets.size(); ++o) {
    if (o != e) all.push_back({o, jaccard(sets[e], sets[o])});
  }
  return rank(all, k);
}

inline std::vector<Neighbor> top_k_overlap(const Dataset& ds, const std::vector<Token>& query, TokenField field,
                                           std::size_t k) {
  std::set<Token> q(query.begin(), query.end());
  std::vector<Neighbor> all;
  for (ItemIdx i = 0; i < ds.item_count(); ++i) {
    if (!ds.item(i).active_during_test) continue;
    const auto& tokens = field == TokenField::tags ? ds.item(i).tags : ds.item(i).title;
    double n = 0;
    for (auto t : tokens) n += q.count(t);
    all.push_back({i, n});
  }
  return rank(all, k);
}

// ---- candidate generators ----

inline std::vector<ItemIdx> ids(const std::vector<Neighbor>& ns) {
  std::vector<ItemIdx> out;
  for (const auto& n : ns) out.push_back(n.entity);
  return out;
}

// Distinct active items ordered by latest week desc, occurrences desc, id asc.
inline std::vector<ItemIdx> recency(const Dataset& ds, UserIdx u, EventSource source) {
  std::map<ItemIdx, std::pair<int, int>> acc;  // item -> (latest week, count)
  const UserId uid = ds.user(u).id;
  auto add = [&](ItemIdx i, int week) {
    if (!ds.item(i).active_during_test) return;
    auto it = acc.find(i);
    if (it == acc.end()) {
      acc[i] = {week, 1};
    } else {
      it->second.first = std::max(it->second.first, week);
      ++it->second.second;
    }
  };
  if (source == EventSource::interactions) {
    for (const auto& e : ds.events().interactions()) {
      if (e.user_id == uid && e.kind != InteractionKind::remove) add(ds.item_ids().at(e.item_id), week_of_timestamp(e.timestamp));
    }
  } else {
    for (const auto& e : ds.events().impressions()) {
      if (e.user_id == uid) add(ds.item_ids().at(e.item_id), e.week);
    }
  }
  std::vector<std::tuple<int, int, ItemIdx>> keys;
  for (const auto& [i, wc] : acc) keys.emplace_back(-wc.first, -wc.second, i);
  std::sort(keys.begin(), keys.end());
  std::vector<ItemIdx> out;
  for (const auto& t : keys) out.push_back(std::get<2>(t));
  return out;
}

inline std::vector<ItemIdx> capped(std::vector<ItemIdx> v, std::size_t cap) {
  if (v.size() > cap) v.resize(cap);
  return v;
}

inline std::vector<ItemIdx> similar_user_items(const Dataset& ds, UserIdx u, EventSource source, std::size_t cap,
                                               std::size_t neighbors) {
  const auto sets = user_sets(ds, source);
  std::vector<ItemIdx> out;
  std::set<ItemIdx> seen;
  for (const auto& n : top_k_jaccard(sets, u, neighbors)) {
    for (auto i : recency(ds, n.entity, source)) {
      if (out.size() == cap) return out;
      if (seen.insert(i).second) out.push_back(i);
    }
  }
  return out;
}

// Variant v: 0 tags/tags, 1 title/title, 2 tags(i)/title(i'), 3 title(i)/tags(i').
inline std::vector<ItemIdx> content_knn(const Dataset& ds, UserIdx u, EventSource source, int v, std::size_t cap) {
  const auto history = user_sets(ds, source)[u];
  std::vector<Neighbor> all;
  for (ItemIdx i = 0; i < ds.item_count(); ++i) {
    if (!ds.item(i).active_during_test) continue;
    double best = 0;
    for (auto h : history) {
      const auto& prev = ds.item(static_cast<ItemIdx>(h));
      const auto& mine = (v == 0 || v == 2) ? ds.item(i).tags : ds.item(i).title;
      const auto& theirs = (v == 0 || v == 3) ? prev.tags : prev.title;
      double n = 0;
      for (auto a : mine) {
        for (auto b : theirs) n += a == b ? 1 : 0;
      }
      best = std::max(best, n);
    }
    all.push_back({i, best});
  }
  return ids(rank(all, cap));
}

inline std::vector<ItemIdx> jobroles_match(const Dataset& ds, UserIdx u, TokenField field, std::size_t cap) {
  return ids(top_k_overlap(ds, ds.user(u).jobroles, field, cap));
}

inline std::vector<ItemIdx> popular(const Dataset& ds, std::size_t cap) {
  std::vector<Neighbor> all;
  for (ItemIdx i = 0; i < ds.item_count(); ++i) {
    if (!ds.item(i).active_during_test) continue;
    double n = 0;
    for (const auto& e : ds.events().interactions()) n += (e.item_id == ds.item(i).id && e.kind != InteractionKind::remove) ? 1 : 0;
    // +1 keeps zero-count active items in the ranking
    all.push_back({i, n + 1});
  }
  return ids(rank(all, cap));
}

// ---- evaluation ----

// One pass over positions with running counters.
inline double user_score(const std::vector<ItemId>& pred, const std::vector<ItemId>& truth, bool corrected) {
  if (truth.empty()) return 0.0;
  double hits = 0, h2 = 0, h4 = 0, h6 = 0, h20 = 0;
  for (std::size_t pos = 0; pos < 30; ++pos) {
    bool hit = false;
    if (pos < pred.size()) {
      for (auto t : truth) hit = hit || t == pred[pos];
    }
    if (hit) hits += 1;
    if (pos == 1) h2 = hits;
    if (pos == 3) h4 = hits;
    if (pos == 5) h6 = hits;
    if (pos == 19) h20 = hits;
  }
  const double denom = corrected ? std::max<double>(1, static_cast<double>(truth.size()))
                                 : std::min<double>(1, static_cast<double>(truth.size()));
  const double us = hits > 0 ? 1 : 0;
  return 20 * (h2 / 2 + h4 / 4 + us + hits / denom) + 10 * (h6 / 6 + h20 / 20);
}

}  // namespace oracle
