#include "jobrec/candidates.hpp"

#include <fstream>
#include <unordered_map>

#include "jobrec/tsv.hpp"

namespace jobrec {
namespace {

struct RecencyKey {
  ItemIdx item;
  int week;
  std::uint32_t count;
};

RankedItems order_by_recency(std::vector<RecencyKey> keys) {
  std::sort(keys.begin(), keys.end(), [](const RecencyKey& a, const RecencyKey& b) {
    if (a.week != b.week) return a.week > b.week;
    if (a.count != b.count) return a.count > b.count;
    return a.item < b.item;
  });
  RankedItems out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(k.item);
  return out;
}

// Collapses (item, week) events into one key per item: latest week, count.
template <typename Events>
RankedItems recency_list(const Events& events, const std::vector<bool>& active) {
  std::unordered_map<ItemIdx, RecencyKey> acc;
  for (auto [item, week] : events) {
    if (!active[item]) continue;
    auto [it, fresh] = acc.try_emplace(item, RecencyKey{item, week, 0});
    it->second.week = std::max(it->second.week, week);
    ++it->second.count;
  }
  std::vector<RecencyKey> keys;
  keys.reserve(acc.size());
  for (const auto& [item, key] : acc) keys.push_back(key);
  return order_by_recency(std::move(keys));
}

RankedItems ranked_from_neighbors(const std::vector<Neighbor>& ranked) {
  RankedItems out;
  out.reserve(ranked.size());
  for (const auto& n : ranked) out.push_back(n.entity);
  return out;
}

}  // namespace

std::size_t candidate_column(GeneratorId generator, std::uint8_t variant) {
  for (std::size_t c = 0; c < kCandidateColumns.size(); ++c) {
    if (kCandidateColumns[c].generator == generator && kCandidateColumns[c].variant == variant) return c;
  }
  throw Error("no candidate column for generator " + std::to_string(static_cast<int>(generator)) + " variant " +
              std::to_string(variant));
}

const CandidateEntry* CandidateList::find(ItemIdx item) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), item,
                             [](const CandidateEntry& e, ItemIdx i) { return e.item < i; });
  return it != entries.end() && it->item == item ? &*it : nullptr;
}

CandidateGenerator::CandidateGenerator(const Dataset& dataset, const SimilarityIndex& index, CandidateConfig config)
    : dataset_(dataset), index_(index), config_(config) {
  const auto& log = dataset.events();
  const auto& active = dataset.active_mask();
  recent_int_.resize(dataset.user_count());
  recent_imp_.resize(dataset.user_count());
  std::vector<std::pair<ItemIdx, int>> events;
  for (UserIdx u = 0; u < dataset.user_count(); ++u) {
    events.clear();
    for (auto k : log.interactions_of_user(u)) {
      const auto& e = log.interactions()[k];
      if (is_positive(e.kind)) events.emplace_back(log.interaction_item(k), week_of_timestamp(e.timestamp));
    }
    recent_int_[u] = recency_list(events, active);
    events.clear();
    for (auto k : log.impressions_of_user(u)) events.emplace_back(log.impression_item(k), log.impressions()[k].week);
    recent_imp_[u] = recency_list(events, active);
  }

  std::vector<std::uint32_t> counts(dataset.item_count(), 0);
  for (std::size_t k = 0; k < log.interactions().size(); ++k) {
    if (is_positive(log.interactions()[k].kind)) ++counts[log.interaction_item(k)];
  }
  std::vector<Neighbor> pool;
  for (ItemIdx i = 0; i < dataset.item_count(); ++i) {
    if (active[i]) pool.push_back({i, static_cast<double>(counts[i])});
  }
  popular_ = ranked_from_neighbors(select_top_k(std::move(pool), config_.cap));
}

RankedItems CandidateGenerator::capped(const RankedItems& items) const {
  const auto n = std::min(items.size(), config_.cap);
  return RankedItems(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n));
}

const RankedItems& CandidateGenerator::recency_order(UserIdx u, EventSource source) const {
  return source == EventSource::interactions ? recent_int_[u] : recent_imp_[u];
}

RankedItems CandidateGenerator::recent_interactions(UserIdx u) const { return capped(recent_int_[u]); }

RankedItems CandidateGenerator::recent_impressions(UserIdx u) const { return capped(recent_imp_[u]); }

RankedItems CandidateGenerator::similar_user_items(UserIdx u, EventSource source) const {
  RankedItems out;
  if (config_.cap == 0) return out;
  std::vector<bool> emitted(dataset_.item_count(), false);
  for (const auto& n : index_.top_k_similar_users(u, source, config_.neighbors)) {
    for (ItemIdx i : recency_order(n.entity, source)) {
      if (emitted[i]) continue;
      emitted[i] = true;
      out.push_back(i);
      if (out.size() == config_.cap) return out;
    }
  }
  return out;
}

std::array<RankedItems, 4> CandidateGenerator::content_knn(UserIdx u, EventSource source) const {
  const auto history = index_.user_items(source).tokens(u);
  std::array<RankedItems, 4> out;
  if (history.empty()) return out;

  const auto& tag_index = index_.active_item_tokens(TokenField::tags);
  const auto& title_index = index_.active_item_tokens(TokenField::title);
  const std::size_t n = dataset_.item_count();
  std::vector<std::uint32_t> counts(n, 0);
  std::vector<std::uint32_t> touched;

  for (std::size_t v = 0; v < 4; ++v) {
    const auto variant = static_cast<ContentVariant>(v);
    // Candidate-side index and which field of the history item is the query.
    const bool candidate_tags = variant == ContentVariant::TagsTags || variant == ContentVariant::TagsTitle;
    const bool query_tags = variant == ContentVariant::TagsTags || variant == ContentVariant::TitleTags;
    const SetIndex& index = candidate_tags ? tag_index : title_index;

    std::vector<std::uint32_t> best(n, 0);
    std::vector<std::uint32_t> best_touched;
    for (Token t : history) {
      const auto& prev = dataset_.item(static_cast<ItemIdx>(t));
      touched.clear();
      index.accumulate_overlap(query_tags ? prev.tags : prev.title, counts, touched);
      for (auto i : touched) {
        if (best[i] == 0) best_touched.push_back(i);
        best[i] = std::max(best[i], counts[i]);
        counts[i] = 0;
      }
    }
    std::vector<Neighbor> pool;
    pool.reserve(best_touched.size());
    for (auto i : best_touched) pool.push_back({i, static_cast<double>(best[i])});
    out[v] = ranked_from_neighbors(select_top_k(std::move(pool), config_.cap));
  }
  return out;
}

RankedItems CandidateGenerator::jobroles_match(UserIdx u, TokenField field) const {
  return ranked_from_neighbors(index_.top_k_by_token_overlap(dataset_.user(u).jobroles, field, config_.cap));
}

GeneratorOutputs CandidateGenerator::run_all(UserIdx u) const {
  GeneratorOutputs out;
  out[candidate_column(GeneratorId::RecentInteractions)] = recent_interactions(u);
  out[candidate_column(GeneratorId::RecentImpressions)] = recent_impressions(u);
  out[candidate_column(GeneratorId::SimilarUserInteractions)] = similar_user_items(u, EventSource::interactions);
  out[candidate_column(GeneratorId::SimilarUserImpressions)] = similar_user_items(u, EventSource::impressions);
  auto knn_int = content_knn(u, EventSource::interactions);
  auto knn_imp = content_knn(u, EventSource::impressions);
  for (std::uint8_t v = 0; v < 4; ++v) {
    out[candidate_column(GeneratorId::ContentKnnInteractions, v)] = std::move(knn_int[v]);
    out[candidate_column(GeneratorId::ContentKnnImpressions, v)] = std::move(knn_imp[v]);
  }
  out[candidate_column(GeneratorId::JobrolesTags)] = jobroles_match(u, TokenField::tags);
  out[candidate_column(GeneratorId::JobrolesTitle)] = jobroles_match(u, TokenField::title);
  out[candidate_column(GeneratorId::GlobalPopular)] = capped(popular_);
  return out;
}

CandidateList CandidateGenerator::generate(UserIdx u) const {
  return merge_candidates(u, run_all(u), dataset_.active_mask());
}

std::vector<CandidateList> CandidateGenerator::generate(std::span<const UserIdx> users, std::size_t threads) const {
  std::vector<CandidateList> out(users.size());
  parallel_for(users.size(), threads, [&](std::size_t k) { out[k] = generate(users[k]); });
  return out;
}

CandidateList merge_candidates(UserIdx u, const GeneratorOutputs& outputs, const std::vector<bool>& active) {
  std::unordered_map<ItemIdx, std::size_t> slot;
  CandidateList list{u, {}};
  for (std::size_t c = 0; c < outputs.size(); ++c) {
    for (std::size_t r = 0; r < outputs[c].size(); ++r) {
      const ItemIdx item = outputs[c][r];
      if (!active[item]) continue;
      auto [it, fresh] = slot.try_emplace(item, list.entries.size());
      if (fresh) list.entries.push_back({item, {}});
      auto& rank = list.entries[it->second].rank[c];
      if (rank == 0) rank = static_cast<std::uint16_t>(r + 1);
    }
  }
  std::sort(list.entries.begin(), list.entries.end(),
            [](const CandidateEntry& a, const CandidateEntry& b) { return a.item < b.item; });
  return list;
}

double coverage(std::span<const CandidateList> candidates, const GroundTruth& truth, const Dataset& dataset) {
  std::size_t total = 0;
  for (const auto& [u, items] : truth) total += items.size();
  if (total == 0) throw Error("coverage of an empty ground truth is undefined");
  std::unordered_map<UserIdx, const CandidateList*> by_user;
  for (const auto& list : candidates) by_user[list.user] = &list;
  std::size_t hits = 0;
  for (const auto& [user_id, items] : truth) {
    auto u = dataset.user_ids().find(user_id);
    if (!u) continue;
    auto it = by_user.find(*u);
    if (it == by_user.end()) continue;
    for (ItemId item_id : items) {
      auto i = dataset.item_ids().find(item_id);
      if (i && it->second->find(*i)) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<UserIdx> target_user_indices(const Dataset& dataset) {
  std::vector<UserIdx> out;
  out.reserve(dataset.target_users().size());
  for (auto id : dataset.target_users()) out.push_back(dataset.user_ids().at(id));
  return out;
}

void write_candidates(std::span<const CandidateList> lists, const Dataset& dataset, const std::string& path,
                      const std::vector<std::string>& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "user_id\titem_id";
  for (const auto& c : kCandidateColumns) out << '\t' << c.name;
  out << '\n';
  for (const auto& list : lists) {
    const auto user_id = dataset.user(list.user).id;
    for (const auto& e : list.entries) {
      out << user_id << '\t' << dataset.item(e.item).id;
      for (auto r : e.rank) {
        out << '\t';
        if (r) out << r;
      }
      out << '\n';
    }
  }
}

std::vector<CandidateList> read_candidates(const Dataset& dataset, const std::string& path,
                                           std::vector<std::string>* provenance) {
  tsv::Reader r(path);
  std::vector<std::string_view> header = {"user_id", "item_id"};
  for (const auto& c : kCandidateColumns) header.push_back(c.name);
  r.expect_header(header);

  std::vector<CandidateList> lists;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    if (f.size() != header.size()) r.fail("unexpected column count");
    auto uid = tsv::parse_number<UserId>(f[0]);
    auto iid = tsv::parse_number<ItemId>(f[1]);
    if (!uid || !iid) r.fail("bad id");
    auto u = dataset.user_ids().find(*uid);
    auto i = dataset.item_ids().find(*iid);
    if (!u || !i) r.fail("candidate references an id missing from the dataset");
    if (lists.empty() || lists.back().user != *u) {
      lists.push_back({*u, {}});
    } else if (lists.back().entries.back().item >= *i) {
      r.fail("candidate rows must be grouped by user with ascending item ids");
    }
    CandidateEntry entry{*i, {}};
    for (std::size_t c = 0; c < kCandidateColumnCount; ++c) {
      if (f[c + 2].empty()) continue;
      auto rank = tsv::parse_number<std::uint16_t>(f[c + 2]);
      if (!rank || *rank == 0) r.fail("bad rank");
      entry.rank[c] = *rank;
    }
    lists.back().entries.push_back(entry);
  }
  if (provenance) *provenance = r.comments();
  return lists;
}

}  // namespace jobrec
