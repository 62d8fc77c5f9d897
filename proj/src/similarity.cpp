#include "jobrec/similarity.hpp"

#include <numeric>

namespace jobrec {

double jaccard(std::span<const Token> a, std::span<const Token> b) {
  return jaccard_from_counts(intersection_size(a, b), a.size(), b.size());
}

SetIndex::SetIndex(std::vector<std::vector<Token>> forward) {
  forward_offsets_.reserve(forward.size() + 1);
  forward_offsets_.push_back(0);
  for (auto& set : forward) {
    make_set(set);
    forward_.insert(forward_.end(), set.begin(), set.end());
    forward_offsets_.push_back(static_cast<std::uint32_t>(forward_.size()));
  }

  vocab_ = forward_;
  make_set(vocab_);
  posting_offsets_.assign(vocab_.size() + 1, 0);
  std::vector<std::uint32_t> slot(forward_.size());
  for (std::size_t k = 0; k < forward_.size(); ++k) {
    slot[k] = static_cast<std::uint32_t>(std::lower_bound(vocab_.begin(), vocab_.end(), forward_[k]) - vocab_.begin());
    ++posting_offsets_[slot[k] + 1];
  }
  std::partial_sum(posting_offsets_.begin(), posting_offsets_.end(), posting_offsets_.begin());
  postings_.resize(forward_.size());
  std::vector<std::uint32_t> cursor(posting_offsets_.begin(), posting_offsets_.end() - 1);
  // Entities are visited in ascending order, so every posting list comes out sorted.
  for (std::uint32_t e = 0; e + 1 < forward_offsets_.size(); ++e) {
    for (auto k = forward_offsets_[e]; k < forward_offsets_[e + 1]; ++k) postings_[cursor[slot[k]]++] = e;
  }
}

std::span<const Token> SetIndex::tokens(std::uint32_t entity) const {
  return {forward_.data() + forward_offsets_[entity], forward_offsets_[entity + 1] - forward_offsets_[entity]};
}

std::span<const std::uint32_t> SetIndex::postings(Token token) const {
  auto it = std::lower_bound(vocab_.begin(), vocab_.end(), token);
  if (it == vocab_.end() || *it != token) return {};
  const auto s = static_cast<std::size_t>(it - vocab_.begin());
  return {postings_.data() + posting_offsets_[s], posting_offsets_[s + 1] - posting_offsets_[s]};
}

void SetIndex::accumulate_overlap(std::span<const Token> query, std::vector<std::uint32_t>& counts,
                                  std::vector<std::uint32_t>& touched) const {
  for (Token t : query) {
    for (auto e : postings(t)) {
      if (counts[e]++ == 0) touched.push_back(e);
    }
  }
}

std::vector<Neighbor> select_top_k(std::vector<Neighbor> pool, std::size_t k) {
  if (pool.size() > k) {
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(), neighbor_before);
    pool.resize(k);
  } else {
    std::sort(pool.begin(), pool.end(), neighbor_before);
  }
  return pool;
}

std::vector<Neighbor> SetIndex::top_k_jaccard(std::uint32_t entity, std::size_t k) const {
  const auto query = tokens(entity);
  if (query.empty() || k == 0) return {};
  std::vector<std::uint32_t> counts(entity_count(), 0);
  std::vector<std::uint32_t> touched;
  accumulate_overlap(query, counts, touched);
  std::vector<Neighbor> pool;
  pool.reserve(touched.size());
  for (auto e : touched) {
    if (e == entity) continue;
    pool.push_back({e, jaccard_from_counts(counts[e], query.size(), set_size(e))});
  }
  return select_top_k(std::move(pool), k);
}

std::vector<Neighbor> SetIndex::top_k_overlap(std::span<const Token> query, std::size_t k,
                                              const std::vector<bool>* scope) const {
  if (query.empty() || k == 0) return {};
  std::vector<Token> q(query.begin(), query.end());
  make_set(q);
  std::vector<std::uint32_t> counts(entity_count(), 0);
  std::vector<std::uint32_t> touched;
  accumulate_overlap(q, counts, touched);
  std::vector<Neighbor> pool;
  pool.reserve(touched.size());
  for (auto e : touched) {
    if (scope && !(*scope)[e]) continue;
    pool.push_back({e, static_cast<double>(counts[e])});
  }
  return select_top_k(std::move(pool), k);
}

namespace {

std::vector<std::vector<Token>> transpose(const SetIndex& index, std::size_t rows) {
  std::vector<std::vector<Token>> out(rows);
  for (std::uint32_t e = 0; e < index.entity_count(); ++e) {
    for (Token t : index.tokens(e)) out[static_cast<std::size_t>(t)].push_back(e);
  }
  return out;
}

}  // namespace

SimilarityIndex::SimilarityIndex(const Dataset& ds) {
  const auto& log = ds.events();
  std::vector<std::vector<Token>> by_user(ds.user_count());
  for (std::size_t k = 0; k < log.interactions().size(); ++k) {
    if (is_positive(log.interactions()[k].kind)) by_user[log.interaction_user(k)].push_back(log.interaction_item(k));
  }
  user_int_ = SetIndex(std::move(by_user));
  by_user.assign(ds.user_count(), {});
  for (std::size_t k = 0; k < log.impressions().size(); ++k) {
    by_user[log.impression_user(k)].push_back(log.impression_item(k));
  }
  user_imp_ = SetIndex(std::move(by_user));
  item_int_ = SetIndex(transpose(user_int_, ds.item_count()));
  item_imp_ = SetIndex(transpose(user_imp_, ds.item_count()));

  std::vector<std::vector<Token>> tags(ds.item_count()), title(ds.item_count());
  for (std::size_t i = 0; i < ds.item_count(); ++i) {
    if (!ds.item(static_cast<ItemIdx>(i)).active_during_test) continue;
    tags[i] = ds.item(static_cast<ItemIdx>(i)).tags;
    title[i] = ds.item(static_cast<ItemIdx>(i)).title;
  }
  tags_ = SetIndex(std::move(tags));
  title_ = SetIndex(std::move(title));
}

const SetIndex& SimilarityIndex::user_items(EventSource source) const {
  return source == EventSource::interactions ? user_int_ : user_imp_;
}

const SetIndex& SimilarityIndex::item_users(EventSource source) const {
  return source == EventSource::interactions ? item_int_ : item_imp_;
}

const SetIndex& SimilarityIndex::active_item_tokens(TokenField field) const {
  return field == TokenField::tags ? tags_ : title_;
}

std::vector<Neighbor> SimilarityIndex::top_k_similar_users(UserIdx u, EventSource source, std::size_t k) const {
  return user_items(source).top_k_jaccard(u, k);
}

std::vector<Neighbor> SimilarityIndex::top_k_similar_items(ItemIdx i, std::size_t k) const {
  return item_int_.top_k_jaccard(i, k);
}

std::vector<Neighbor> SimilarityIndex::top_k_by_token_overlap(std::span<const Token> query, TokenField field,
                                                              std::size_t k) const {
  return active_item_tokens(field).top_k_overlap(query, k);
}

}  // namespace jobrec
