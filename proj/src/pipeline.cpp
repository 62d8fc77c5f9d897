#include "jobrec/pipeline.hpp"

#include <limits>
#include <numeric>
#include <random>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace jobrec {
namespace {

// Bounded draw that does not depend on the standard library's distribution
// implementation, so samples are stable across toolchains.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

// Picks `count` of `pool` uniformly without replacement; returned in pool order.
std::vector<CandidateEntry> sample_entries(const std::vector<CandidateEntry>& pool, std::size_t count,
                                           std::mt19937_64& rng) {
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  count = std::min(count, pool.size());
  for (std::size_t k = 0; k < count; ++k) {
    const auto j = k + static_cast<std::size_t>(uniform_below(rng, pool.size() - k));
    std::swap(idx[k], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  std::vector<CandidateEntry> out;
  out.reserve(count);
  for (auto k : idx) out.push_back(pool[k]);
  return out;
}

std::uint64_t user_stream(std::uint64_t seed, UserId user, std::uint64_t salt) {
  return mix64(seed ^ mix64(static_cast<std::uint64_t>(user) ^ salt));
}

}  // namespace

SamplingMode parse_sampling_mode(std::string_view text) {
  if (text == "halves") return SamplingMode::halves;
  if (text == "extended") return SamplingMode::extended;
  throw Error("unknown sampling mode '" + std::string(text) + "'");
}

std::string_view to_string(SamplingMode mode) { return mode == SamplingMode::halves ? "halves" : "extended"; }

TrainingFile build_training_file(std::span<const CandidateList> candidates, const GroundTruth& truth,
                                 const Dataset& dataset, SamplingMode mode, std::uint64_t seed) {
  struct Eligible {
    std::uint64_t key;
    UserId id;
    const CandidateList* list;
    const std::vector<ItemId>* positives;
  };
  std::vector<Eligible> eligible;
  for (const auto& list : candidates) {
    const UserId id = dataset.user(list.user).id;
    auto it = truth.find(id);
    if (it == truth.end() || it->second.empty()) continue;
    eligible.push_back({user_stream(seed, id, 0x5157), id, &list, &it->second});
  }
  if (eligible.empty()) throw Error("no user with both candidates and training ground truth");

  // Ordering by a seeded hash of the user id keeps the halves stable under
  // input reordering.
  std::sort(eligible.begin(), eligible.end(),
            [](const Eligible& a, const Eligible& b) { return a.key != b.key ? a.key < b.key : a.id < b.id; });
  const std::size_t train_users = mode == SamplingMode::halves ? (eligible.size() + 1) / 2 : eligible.size();

  TrainingFile out;
  for (std::size_t k = 0; k < eligible.size(); ++k) {
    const auto& e = eligible[k];
    std::vector<CandidateEntry> positives, negatives;
    for (const auto& entry : e.list->entries) {
      const ItemId item = dataset.item(entry.item).id;
      (std::binary_search(e.positives->begin(), e.positives->end(), item) ? positives : negatives).push_back(entry);
    }
    const std::size_t keep = mode == SamplingMode::halves ? std::min<std::size_t>(5, negatives.size())
                                                         : negatives.size() / 4;
    std::mt19937_64 rng(user_stream(seed, e.id, 0x4e45));
    auto sampled = sample_entries(negatives, keep, rng);

    CandidateList selected{e.list->user, std::move(positives)};
    selected.entries.insert(selected.entries.end(), sampled.begin(), sampled.end());
    std::sort(selected.entries.begin(), selected.entries.end(),
              [](const CandidateEntry& a, const CandidateEntry& b) { return a.item < b.item; });
    (k < train_users ? out.train : out.valid).push_back(std::move(selected));
  }
  auto by_user = [](const CandidateList& a, const CandidateList& b) { return a.user < b.user; };
  std::sort(out.train.begin(), out.train.end(), by_user);
  std::sort(out.valid.begin(), out.valid.end(), by_user);
  return out;
}

VariantIndex::VariantIndex(Dataset dataset, CandidateConfig candidates, std::optional<Timestamp> time_anchor)
    : dataset_(std::make_unique<Dataset>(std::move(dataset))),
      similarity_(std::make_unique<SimilarityIndex>(*dataset_)),
      clusters_(std::make_unique<ItemClusterIndex>(*dataset_)),
      generator_(std::make_unique<CandidateGenerator>(*dataset_, *similarity_, candidates)),
      extractor_(std::make_unique<FeatureExtractor>(*dataset_, *similarity_, *clusters_, time_anchor)) {}

std::vector<std::vector<double>> score_candidates(std::span<const gbdt::GbdtModel> models,
                                                  const FeatureExtractor& extractor,
                                                  std::span<const CandidateList> lists, std::size_t threads) {
  if (models.empty()) throw Error("at least one model is required");
  for (const auto& m : models) {
    if (!(m.schema() == extractor.schema())) throw Error("model feature schema differs from the extractor's");
  }
  std::vector<std::vector<double>> scores(lists.size());
  parallel_for(lists.size(), threads, [&](std::size_t k) {
    const auto& list = lists[k];
    auto& out = scores[k];
    out.resize(list.entries.size());
    if (list.entries.empty()) return;
    const auto ctx = extractor.prepare(list.user);
    std::vector<double> row(extractor.schema().size());
    std::vector<double> probs(models.size());
    for (std::size_t e = 0; e < list.entries.size(); ++e) {
      extractor.extract(ctx, list.entries[e], row);
      for (std::size_t m = 0; m < models.size(); ++m) probs[m] = models[m].predict(row);
      std::sort(probs.begin(), probs.end());
      double sum = 0.0;
      for (double p : probs) sum += p;
      out[e] = sum / static_cast<double>(probs.size());
    }
  });
  return scores;
}

std::vector<ItemIdx> deleted_items(const Dataset& dataset, UserIdx u) {
  const auto& log = dataset.events();
  std::vector<ItemIdx> out;
  for (auto k : log.interactions_of_user(u)) {
    if (log.interactions()[k].kind == InteractionKind::remove) out.push_back(log.interaction_item(k));
  }
  make_set(out);
  return out;
}

std::vector<Prediction> select_top(std::span<const CandidateList> lists, const std::vector<std::vector<double>>& scores,
                                   const Dataset& dataset) {
  if (scores.size() != lists.size()) throw Error("score table does not match the candidate lists");
  std::vector<Prediction> out;
  out.reserve(lists.size());
  for (std::size_t k = 0; k < lists.size(); ++k) {
    const auto& list = lists[k];
    if (scores[k].size() != list.entries.size()) throw Error("score row does not match the candidate list");
    const auto deleted = deleted_items(dataset, list.user);
    std::vector<std::size_t> order;
    for (std::size_t e = 0; e < list.entries.size(); ++e) {
      const ItemIdx item = list.entries[e].item;
      if (std::binary_search(deleted.begin(), deleted.end(), item)) continue;
      if (!dataset.item(item).active_during_test) continue;
      order.push_back(e);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[k][a] != scores[k][b]) return scores[k][a] > scores[k][b];
      return list.entries[a].item < list.entries[b].item;
    });
    if (order.size() > kPredictionLength) order.resize(kPredictionLength);
    Prediction p;
    p.user = dataset.user(list.user).id;
    for (auto e : order) {
      p.items.push_back(dataset.item(list.entries[e].item).id);
      p.scores.push_back(scores[k][e]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> rank_and_select(const gbdt::GbdtModel& model, const FeatureExtractor& extractor,
                                        std::span<const CandidateList> lists, std::size_t threads) {
  return blend(std::span<const gbdt::GbdtModel>(&model, 1), extractor, lists, threads);
}

std::vector<Prediction> blend(std::span<const gbdt::GbdtModel> models, const FeatureExtractor& extractor,
                              std::span<const CandidateList> lists, std::size_t threads) {
  return select_top(lists, score_candidates(models, extractor, lists, threads), extractor.dataset());
}

std::vector<Prediction> baseline_recency(const Dataset& dataset, std::span<const UserId> target_users) {
  const auto& log = dataset.events();
  std::vector<Prediction> out;
  for (UserId id : target_users) {
    const UserIdx u = dataset.user_ids().at(id);
    const auto deleted = deleted_items(dataset, u);
    std::unordered_set<ItemIdx> taken;
    Prediction p;
    p.user = id;
    auto admit = [&](ItemIdx i) {
      if (p.items.size() >= kPredictionLength) return;
      if (!dataset.item(i).active_during_test) return;
      if (std::binary_search(deleted.begin(), deleted.end(), i)) return;
      if (!taken.insert(i).second) return;
      p.items.push_back(dataset.item(i).id);
    };

    // Latest positive timestamp per item, newest first.
    std::unordered_map<ItemIdx, Timestamp> last;
    for (auto k : log.interactions_of_user(u)) {
      const auto& e = log.interactions()[k];
      if (!is_positive(e.kind)) continue;
      auto& t = last[log.interaction_item(k)];
      t = std::max(t, e.timestamp);
    }
    std::vector<std::pair<Timestamp, ItemIdx>> recent;
    for (auto [item, ts] : last) recent.emplace_back(ts, item);
    std::sort(recent.begin(), recent.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (auto [ts, item] : recent) admit(item);

    // Impressions by latest week, then count, then id.
    std::unordered_map<ItemIdx, std::pair<int, int>> shown;
    for (auto k : log.impressions_of_user(u)) {
      auto [it, fresh] = shown.try_emplace(log.impression_item(k), log.impressions()[k].week, 0);
      it->second.first = std::max(it->second.first, log.impressions()[k].week);
      ++it->second.second;
    }
    std::vector<std::tuple<int, int, ItemIdx>> imps;
    for (auto [item, wc] : shown) imps.emplace_back(wc.first, wc.second, item);
    std::sort(imps.begin(), imps.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) > std::get<1>(b);
      return std::get<2>(a) < std::get<2>(b);
    });
    for (const auto& t : imps) admit(std::get<2>(t));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> baseline_popular(const Dataset& dataset, std::span<const UserId> target_users) {
  const auto& log = dataset.events();
  std::vector<std::uint32_t> counts(dataset.item_count(), 0);
  for (std::size_t k = 0; k < log.interactions().size(); ++k) {
    if (is_positive(log.interactions()[k].kind)) ++counts[log.interaction_item(k)];
  }
  std::vector<ItemIdx> ranked;
  for (ItemIdx i = 0; i < dataset.item_count(); ++i) {
    if (dataset.item(i).active_during_test) ranked.push_back(i);
  }
  std::sort(ranked.begin(), ranked.end(), [&](ItemIdx a, ItemIdx b) {
    return counts[a] != counts[b] ? counts[a] > counts[b] : a < b;
  });

  std::vector<Prediction> out;
  for (UserId id : target_users) {
    const auto deleted = deleted_items(dataset, dataset.user_ids().at(id));
    Prediction p;
    p.user = id;
    for (ItemIdx i : ranked) {
      if (p.items.size() >= kPredictionLength) break;
      if (std::binary_search(deleted.begin(), deleted.end(), i)) continue;
      p.items.push_back(dataset.item(i).id);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace jobrec
