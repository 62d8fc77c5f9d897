#include "jobrec/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>

namespace jobrec {
namespace {

// Draws built on raw engine output only, so a seed gives the same data with
// any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return uniform() < p; }
  std::size_t below(std::size_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x < limit) return static_cast<std::size_t>(x % n);
    }
  }
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  int poisson(double lambda) {
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }
  // Index drawn proportionally to `weights`; weights must not all be zero.
  std::size_t weighted(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    double x = uniform() * total;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      x -= weights[k];
      if (x < 0) return k;
    }
    return weights.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
};

constexpr int kTitleVocab = 12;
constexpr int kTagVocab = 25;
constexpr int kGenericVocab = 60;
constexpr int kDisciplines = 23;
constexpr int kIndustries = 17;

Token title_token(int topic, int k) { return 1000 * (topic + 1) + k; }
Token tag_token(int topic, int k) { return 1000 * (topic + 1) + 100 + k; }
Token generic_token(int k) { return 900000 + k; }

struct ItemPlan {
  int topic = 0;
  double weight = 1;
  Timestamp created = 0;
  Timestamp expires = 0;
};

struct UserPlan {
  double rate = 0;
  int first_week = 0;
};

}  // namespace

void SynthConfig::validate() const {
  if (users < 10) throw Error("synth needs at least 10 users");
  if (items < 10) throw Error("synth needs at least 10 items");
  if (weeks < 3) throw Error("synth needs at least 3 weeks");
  if (!(target_fraction > 0.0 && target_fraction <= 1.0)) throw Error("target fraction must lie in (0, 1]");
}

SynthData synthesize(const SynthConfig& config) {
  config.validate();
  Rng rng(mix64(config.seed ^ 0x6a6f627265632d73ULL));
  const int topics = static_cast<int>(std::clamp<std::size_t>(config.items / 60, 4, 50));
  const Timestamp end = config.start + config.weeks * kSecondsPerWeek;

  std::vector<double> topic_weight(topics);
  for (int t = 0; t < topics; ++t) topic_weight[t] = 1.0 / std::sqrt(t + 1.0);

  auto mapped = [&](int topic, int modulus, double keep) {
    return rng.chance(keep) ? topic % modulus + 1 : rng.between(1, modulus);
  };
  auto token_list = [&](int topic, int n, double own, bool tags) {
    std::vector<Token> out;
    for (int k = 0; k < n; ++k) {
      if (rng.chance(own)) {
        out.push_back(tags ? tag_token(topic, rng.between(0, kTagVocab - 1))
                           : title_token(topic, rng.between(0, kTitleVocab - 1)));
      } else {
        out.push_back(generic_token(rng.between(0, kGenericVocab - 1)));
      }
    }
    make_set(out);
    return out;
  };

  SynthData data;
  data.topics = topics;

  std::vector<User> users(config.users);
  std::vector<UserPlan> user_plan(config.users);
  data.user_topic.resize(config.users);
  data.user_second.assign(config.users, -1);
  UserId next_user = 0;
  for (std::size_t k = 0; k < config.users; ++k) {
    auto& u = users[k];
    next_user += rng.between(1, 3);
    u.id = next_user;
    const int t = static_cast<int>(rng.weighted(topic_weight));
    data.user_topic[k] = t;
    if (rng.chance(0.35)) data.user_second[k] = static_cast<int>(rng.weighted(topic_weight));
    u.jobroles = token_list(t, rng.between(2, 6), 0.75, false);
    if (rng.chance(0.5)) {
      auto extra = token_list(t, rng.between(1, 2), 1.0, true);
      u.jobroles.insert(u.jobroles.end(), extra.begin(), extra.end());
      make_set(u.jobroles);
    }
    u.career_level = rng.chance(0.1) ? 0 : rng.between(1, 6);
    u.discipline_id = mapped(t, kDisciplines, 0.7);
    u.industry_id = mapped(t, kIndustries, 0.6);
    u.country = rng.chance(0.8) ? 1 : rng.between(2, 3);
    u.region = u.country == 1 ? rng.between(1, 16) : 0;
    u.experience_n_entries_class = rng.between(0, 3);
    u.experience_years_experience = rng.between(0, 7);
    u.experience_years_in_current = rng.between(0, 7);
    u.edu_degree = rng.between(0, 3);
    for (int f = rng.between(0, 2); f > 0; --f) u.edu_fieldofstudies.push_back(rng.between(1, 20));
    make_set(u.edu_fieldofstudies);

    auto& plan = user_plan[k];
    plan.rate = rng.chance(0.1) ? 0.0 : std::exp(0.8 * rng.normal() - 0.2);
    plan.first_week = rng.chance(0.3) ? rng.between(0, config.weeks / 2) : 0;
  }

  std::vector<Item> items(config.items);
  std::vector<ItemPlan> item_plan(config.items);
  std::vector<std::vector<std::size_t>> by_topic(topics);
  data.item_topic.resize(config.items);
  ItemId next_item = 0;
  for (std::size_t k = 0; k < config.items; ++k) {
    auto& it = items[k];
    auto& plan = item_plan[k];
    next_item += rng.between(1, 4);
    it.id = next_item;
    plan.topic = static_cast<int>(rng.weighted(topic_weight));
    data.item_topic[k] = plan.topic;
    by_topic[plan.topic].push_back(k);
    it.title = token_list(plan.topic, rng.between(2, 5), 0.8, false);
    it.tags = token_list(plan.topic, rng.between(3, 10), 0.85, true);
    it.career_level = rng.chance(0.1) ? 0 : rng.between(1, 6);
    it.discipline_id = mapped(plan.topic, kDisciplines, 0.8);
    it.industry_id = mapped(plan.topic, kIndustries, 0.7);
    it.country = rng.chance(0.85) ? 1 : rng.between(2, 3);
    it.region = it.country == 1 ? rng.between(1, 16) : 0;
    it.employment = rng.between(1, 5);
    if (rng.chance(0.85)) {
      it.latitude = 47.0 + (it.region % 4) * 1.5 + 0.3 * rng.normal();
      it.longitude = 6.0 + (it.region / 4) * 2.0 + 0.3 * rng.normal();
    }
    plan.weight = std::exp(0.9 * rng.normal());
    plan.created = config.start - 3 * kSecondsPerWeek +
                   static_cast<Timestamp>(rng.below(static_cast<std::size_t>((config.weeks + 3) * kSecondsPerWeek - kSecondsPerDay)));
    plan.expires = plan.created + rng.between(3, 10) * kSecondsPerWeek;
    if (!rng.chance(0.05)) it.created_at = plan.created;
    it.active_during_test = plan.expires > end;
  }

  auto alive = [&](std::size_t i, Timestamp ts) { return item_plan[i].created <= ts && ts < item_plan[i].expires; };

  std::vector<Interaction> interactions;
  // clicked[user][week] -> items
  std::vector<std::vector<std::vector<std::size_t>>> clicked(config.users,
                                                             std::vector<std::vector<std::size_t>>(config.weeks));
  std::vector<double> weights;
  std::vector<std::size_t> pool;
  for (std::size_t k = 0; k < config.users; ++k) {
    const auto& u = users[k];
    std::vector<std::size_t> history;
    std::unordered_set<std::size_t> deleted;
    for (int w = user_plan[k].first_week; w < config.weeks; ++w) {
      const Timestamp week_start = config.start + w * kSecondsPerWeek;
      const int sessions = user_plan[k].rate > 0 ? rng.poisson(user_plan[k].rate) : 0;
      for (int s = 0; s < sessions; ++s) {
        Timestamp ts = week_start + static_cast<Timestamp>(rng.below(kSecondsPerWeek - 3600));
        std::vector<std::size_t> session;
        if (!history.empty() && rng.chance(0.35)) {
          const std::size_t recent = std::min<std::size_t>(history.size(), 10);
          for (int n = rng.between(1, 2); n > 0; --n) {
            const auto i = history[history.size() - 1 - rng.below(recent)];
            if (alive(i, ts) && !deleted.contains(i)) session.push_back(i);
          }
        } else {
          int topic = data.user_topic[k];
          const double r = rng.uniform();
          if (r > 0.9) {
            topic = static_cast<int>(rng.below(static_cast<std::size_t>(topics)));
          } else if (r > 0.7 && data.user_second[k] >= 0) {
            topic = data.user_second[k];
          }
          pool.clear();
          weights.clear();
          for (auto i : by_topic[topic]) {
            if (!alive(i, ts) || deleted.contains(i)) continue;
            double wgt = item_plan[i].weight;
            if (u.career_level && items[i].career_level && std::abs(u.career_level - items[i].career_level) <= 1) wgt *= 2.0;
            if (u.region && u.region == items[i].region) wgt *= 1.5;
            pool.push_back(i);
            weights.push_back(wgt);
          }
          if (pool.empty()) continue;
          for (int n = 1 + rng.poisson(0.8); n > 0; --n) session.push_back(pool[rng.weighted(weights)]);
        }
        make_set(session);
        for (auto i : session) {
          ts = std::min(ts + 20 + static_cast<Timestamp>(rng.below(280)), week_start + kSecondsPerWeek - 1);
          interactions.push_back({u.id, items[i].id, InteractionKind::click, ts});
          clicked[k][w].push_back(i);
          history.push_back(i);
          const Timestamp last = week_start + kSecondsPerWeek - 1;
          if (rng.chance(0.06)) interactions.push_back({u.id, items[i].id, InteractionKind::bookmark, std::min(ts + 5, last)});
          if (rng.chance(0.08)) interactions.push_back({u.id, items[i].id, InteractionKind::reply, std::min(ts + 90, last)});
          if (rng.chance(0.03)) {
            interactions.push_back({u.id, items[i].id, InteractionKind::remove, std::min(ts + 60, last)});
            deleted.insert(i);
          }
        }
      }
    }
  }

  std::vector<std::size_t> hot(config.items);
  std::vector<double> hot_weight(config.items);
  for (std::size_t i = 0; i < config.items; ++i) {
    hot[i] = i;
    hot_weight[i] = item_plan[i].weight * item_plan[i].weight;
  }

  std::vector<Impression> impressions;
  for (std::size_t k = 0; k < config.users; ++k) {
    for (int w = user_plan[k].first_week; w < config.weeks; ++w) {
      const bool busy = !clicked[k][w].empty();
      if (!busy && !rng.chance(0.3)) continue;
      const Timestamp week_start = config.start + w * kSecondsPerWeek;
      const Timestamp mid = week_start + kSecondsPerWeek / 2;
      std::vector<std::size_t> shown;
      for (auto i : clicked[k][w]) {
        if (rng.chance(0.85)) shown.push_back(i);
      }
      if (w + 1 < config.weeks) {
        for (auto i : clicked[k][w + 1]) {
          if (rng.chance(0.2)) shown.push_back(i);
        }
      }
      // Fill mimics an imperfect recommender: topical items regardless of
      // popularity, plus globally popular items.
      pool.clear();
      for (auto i : by_topic[data.user_topic[k]]) {
        if (alive(i, mid)) pool.push_back(i);
      }
      if (!pool.empty()) {
        for (int n = rng.between(4, 12); n > 0; --n) shown.push_back(pool[rng.below(pool.size())]);
      }
      for (int n = rng.between(4, 12); n > 0; --n) {
        const auto i = hot[rng.weighted(hot_weight)];
        if (alive(i, mid)) shown.push_back(i);
      }
      make_set(shown);
      const int week = week_of_timestamp(week_start);
      for (auto i : shown) impressions.push_back({users[k].id, items[i].id, week});
    }
  }

  std::vector<UserId> targets;
  for (const auto& u : users) {
    if (rng.chance(config.target_fraction)) targets.push_back(u.id);
  }
  if (targets.empty()) targets.push_back(users.front().id);

  data.dataset = Dataset(std::move(users), std::move(items), std::move(interactions), std::move(impressions),
                         std::move(targets), false);
  return data;
}

}  // namespace jobrec
