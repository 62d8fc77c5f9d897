#pragma once

#include <vector>

#include "jobrec/common.hpp"
#include "jobrec/dataset.hpp"

namespace jobrec {

struct Neighbor {
  std::uint32_t entity = 0;
  double score = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// Ranking order for neighbor lists: score descending, then entity ascending.
inline bool neighbor_before(const Neighbor& a, const Neighbor& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.entity < b.entity;
}

// J(A, B) = |A ∩ B| / |A ∪ B| with J(∅, ∅) = 0. Inputs sorted, duplicate-free.
double jaccard(std::span<const Token> a, std::span<const Token> b);
inline double jaccard_from_counts(std::size_t common, std::size_t size_a, std::size_t size_b) {
  const std::size_t uni = size_a + size_b - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

// Forward sets (entity -> sorted unique tokens) together with the exact
// inverted transpose (token -> sorted entities).
class SetIndex {
 public:
  SetIndex() = default;
  explicit SetIndex(std::vector<std::vector<Token>> forward);

  std::size_t entity_count() const { return forward_offsets_.empty() ? 0 : forward_offsets_.size() - 1; }
  std::span<const Token> tokens(std::uint32_t entity) const;
  std::size_t set_size(std::uint32_t entity) const { return tokens(entity).size(); }
  // Entities whose set contains `token`, ascending. Empty for unseen tokens.
  std::span<const std::uint32_t> postings(Token token) const;
  std::span<const Token> vocabulary() const { return vocab_; }

  // Adds |query ∩ set(e)| into counts[e] for every entity sharing a token with
  // the query; newly touched entities are appended to `touched`. `counts` must
  // be sized entity_count() and zero for untouched entities.
  void accumulate_overlap(std::span<const Token> query, std::vector<std::uint32_t>& counts,
                          std::vector<std::uint32_t>& touched) const;

  // k entities e' != e with the largest J(set(e), set(e')) > 0.
  std::vector<Neighbor> top_k_jaccard(std::uint32_t entity, std::size_t k) const;
  // k entities in `scope` (all when null) with the largest |query ∩ set(e)| >= 1.
  std::vector<Neighbor> top_k_overlap(std::span<const Token> query, std::size_t k,
                                      const std::vector<bool>* scope = nullptr) const;

 private:
  std::vector<std::uint32_t> forward_offsets_;
  std::vector<Token> forward_;
  std::vector<Token> vocab_;  // sorted distinct tokens
  std::vector<std::uint32_t> posting_offsets_;
  std::vector<std::uint32_t> postings_;
};

// Keeps the best k of `pool` in neighbor_before order.
std::vector<Neighbor> select_top_k(std::vector<Neighbor> pool, std::size_t k);

enum class EventSource { interactions, impressions };
enum class TokenField { tags, title };

// The event-set and token-set indexes over one dataset variant.
class SimilarityIndex {
 public:
  explicit SimilarityIndex(const Dataset& dataset);

  // user -> distinct items (positive interactions or impressions)
  const SetIndex& user_items(EventSource source) const;
  // item -> distinct users, the transpose of user_items
  const SetIndex& item_users(EventSource source) const;
  // active item -> tokens of the field; inactive items hold empty sets
  const SetIndex& active_item_tokens(TokenField field) const;

  std::vector<Neighbor> top_k_similar_users(UserIdx u, EventSource source, std::size_t k) const;
  // Jaccard over the sets of positively interacting users.
  std::vector<Neighbor> top_k_similar_items(ItemIdx i, std::size_t k) const;
  std::vector<Neighbor> top_k_by_token_overlap(std::span<const Token> query, TokenField field, std::size_t k) const;

 private:
  SetIndex user_int_, user_imp_, item_int_, item_imp_, tags_, title_;
};

}  // namespace jobrec
