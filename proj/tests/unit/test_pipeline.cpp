#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "../oracles.hpp"
#include "jobrec/pipeline.hpp"

using namespace jobrec;
using fx::ev;

namespace {

CandidateList list_of(UserIdx u, std::vector<ItemIdx> items) {
  CandidateList l{u, {}};
  for (auto i : items) l.entries.push_back({i, {}});
  return l;
}

std::vector<ItemIdx> iota_items(ItemIdx n) {
  std::vector<ItemIdx> v(n);
  for (ItemIdx k = 0; k < n; ++k) v[k] = k;
  return v;
}

gbdt::GbdtModel constant(double p) {
  return gbdt::GbdtModel(default_feature_schema(), {}, std::log(p / (1 - p)), {});
}

std::size_t positives(const CandidateList& l, const GroundTruth& g, const Dataset& ds) {
  const auto& t = g.at(ds.user(l.user).id);
  std::size_t n = 0;
  for (const auto& e : l.entries) n += std::binary_search(t.begin(), t.end(), ds.item(e.item).id);
  return n;
}

}  // namespace

TEST_CASE("halves sampling keeps all positives and five negatives") {
  Dataset ds({fx::user(1)}, fx::items(1, 14), {}, {}, {1});
  const std::vector<CandidateList> lists = {list_of(0, iota_items(14))};
  const GroundTruth g = {{1, {1, 2}}};
  const auto f = build_training_file(lists, g, ds, SamplingMode::halves, 3);
  REQUIRE(f.train.size() == 1);
  CHECK(f.valid.empty());
  CHECK(f.train[0].entries.size() == 7);
  CHECK(positives(f.train[0], g, ds) == 2);
  CHECK(build_training_file(lists, g, ds, SamplingMode::halves, 3).train == f.train);
}

TEST_CASE("extended sampling keeps a quarter of the negatives") {
  Dataset ds({fx::user(1)}, fx::items(1, 17), {}, {}, {1});
  const std::vector<CandidateList> lists = {list_of(0, iota_items(17))};
  const GroundTruth g = {{1, {1}}};
  const auto f = build_training_file(lists, g, ds, SamplingMode::extended, 9);
  REQUIRE(f.train.size() == 1);
  CHECK(f.train[0].entries.size() == 5);
  CHECK(positives(f.train[0], g, ds) == 1);
}

TEST_CASE("uncovered ground truth still makes a user eligible") {
  Dataset ds({fx::user(1)}, fx::items(1, 5), {}, {}, {1});
  const std::vector<CandidateList> lists = {list_of(0, {0, 1, 2})};
  const GroundTruth g = {{1, {5}}};
  const auto f = build_training_file(lists, g, ds, SamplingMode::halves, 1);
  REQUIRE(f.train.size() == 1);
  CHECK(f.train[0].entries.size() == 3);
  CHECK(positives(f.train[0], g, ds) == 0);
}

TEST_CASE("eligible users split in halves") {
  Dataset ds({fx::user(1), fx::user(2), fx::user(3), fx::user(4), fx::user(5), fx::user(6), fx::user(7), fx::user(8)},
             fx::items(1, 10), {}, {}, {1, 2, 3, 4, 5, 6, 7, 8});
  std::vector<CandidateList> lists;
  GroundTruth g;
  for (UserIdx u = 0; u < 8; ++u) {
    lists.push_back(list_of(u, iota_items(10)));
    if (u != 7) g[u + 1] = {static_cast<ItemId>(u + 1)};
  }
  const auto f = build_training_file(lists, g, ds, SamplingMode::halves, 5);
  CHECK(f.train.size() == 4);
  CHECK(f.valid.size() == 3);
  std::set<UserIdx> seen;
  for (const auto* half : {&f.train, &f.valid}) {
    CHECK(std::is_sorted(half->begin(), half->end(), [](const auto& a, const auto& b) { return a.user < b.user; }));
    for (const auto& l : *half) {
      CHECK(seen.insert(l.user).second);
      CHECK(l.user != 7);
      CHECK(l.entries.size() == 6);
    }
  }
  CHECK(build_training_file(lists, g, ds, SamplingMode::halves, 6).train != f.train);
  const auto ext = build_training_file(lists, g, ds, SamplingMode::extended, 5);
  CHECK(ext.train.size() == 7);
  CHECK(ext.valid.empty());
  CHECK_THROWS(build_training_file(lists, GroundTruth{}, ds, SamplingMode::halves, 1));
}

TEST_CASE("select_top orders by score") {
  Dataset ds({fx::user(1)}, fx::items(1, 3), {}, {}, {1});
  const std::vector<CandidateList> lists = {list_of(0, {0, 1, 2})};
  const auto p = select_top(lists, {{0.3, 0.7, 0.4}}, ds);
  REQUIRE(p.size() == 1);
  CHECK(p[0].user == 1);
  CHECK(p[0].items == std::vector<ItemId>{2, 3, 1});
  CHECK(p[0].scores == std::vector<double>{0.7, 0.4, 0.3});
}

TEST_CASE("select_top drops deleted and inactive items and truncates") {
  auto its = fx::items(1, 40);
  its[5].active_during_test = false;
  Dataset ds({fx::user(1)}, its, {ev(1, 1, 0, InteractionKind::remove)}, {}, {1});
  std::vector<double> scores;
  for (int k = 0; k < 40; ++k) scores.push_back(1.0 - k * 0.01);
  const std::vector<CandidateList> lists = {list_of(0, iota_items(40))};
  const auto p = select_top(lists, {scores}, ds);
  CHECK(p[0].items.size() == 30);
  CHECK(p[0].items.front() == 2);
  CHECK(std::find(p[0].items.begin(), p[0].items.end(), 6) == p[0].items.end());
  // ties fall back to the item id
  const auto tied = select_top(lists, {std::vector<double>(40, 0.5)}, ds);
  CHECK(tied[0].items[0] == 2);
  CHECK(tied[0].items[1] == 3);
}

TEST_CASE("blend averages probabilities") {
  const auto ds = oracle::random_dataset(12);
  VariantIndex v{Dataset(ds)};
  const auto lists = v.generator().generate(target_user_indices(v.dataset()), 1);
  const std::vector<gbdt::GbdtModel> models = {constant(0.2), constant(0.6)};
  const auto s = score_candidates(models, v.extractor(), lists, 1);
  for (const auto& row : s) {
    for (double x : row) CHECK(x == doctest::Approx(0.4).epsilon(1e-12));
  }
  const std::vector<gbdt::GbdtModel> swapped = {constant(0.6), constant(0.2)};
  CHECK(score_candidates(swapped, v.extractor(), lists, 1) == s);
  CHECK_THROWS(score_candidates({}, v.extractor(), lists, 1));
}

TEST_CASE("blend of one model equals rank_and_select") {
  const auto ds = oracle::random_dataset(13, {.users = 60, .items = 80, .interactions = 600, .impressions = 900});
  VariantIndex v{Dataset(ds)};
  const auto lists = v.generator().generate(target_user_indices(v.dataset()), 1);
  GroundTruth g;
  for (const auto& l : lists) {
    if (l.entries.size() > 3) g[v.dataset().user(l.user).id] = {v.dataset().item(l.entries[l.user % 3].item).id};
  }
  const auto file = build_training_file(lists, g, v.dataset(), SamplingMode::extended, 1);
  const auto m = build_matrix(v.extractor(), file.train, &g, 1);
  gbdt::TrainConfig cfg;
  cfg.num_round = 15;
  cfg.min_child_weight = 0.5;
  const auto model = gbdt::train(m, nullptr, cfg);
  const auto single = rank_and_select(model, v.extractor(), lists, 1);
  const std::vector<gbdt::GbdtModel> one = {model};
  const std::vector<gbdt::GbdtModel> two = {model, model};
  CHECK(blend(one, v.extractor(), lists, 1) == single);
  CHECK(blend(two, v.extractor(), lists, 1) == single);
  CHECK(rank_and_select(model, v.extractor(), lists, 3) == single);
}

TEST_CASE("recency baseline") {
  SUBCASE("interactions padded with impressions") {
    std::vector<Impression> imps;
    for (int k = 0; k < 50; ++k) imps.push_back({1, 10 + k, 5});
    Dataset ds({fx::user(1)}, fx::items(1, 60), {ev(1, 1, 100), ev(1, 2, 50)}, imps, {1});
    const auto p = baseline_recency(ds, ds.target_users());
    REQUIRE(p.size() == 1);
    CHECK(p[0].items.size() == 30);
    CHECK(p[0].items[0] == 1);
    CHECK(p[0].items[1] == 2);
    CHECK(p[0].items[2] == 10);
  }
  SUBCASE("deleted interactions leave impressions") {
    Dataset ds({fx::user(1)}, fx::items(1, 5),
               {ev(1, 1, 10), ev(1, 1, 20, InteractionKind::remove)}, {{1, 3, 2}, {1, 4, 3}}, {1});
    const auto p = baseline_recency(ds, ds.target_users());
    CHECK(p[0].items == std::vector<ItemId>{4, 3});
  }
  SUBCASE("duplicates keep the interaction position") {
    Dataset ds({fx::user(1)}, fx::items(1, 5), {ev(1, 3, 10), ev(1, 2, 20)}, {{1, 3, 9}, {1, 5, 9}}, {1});
    const auto p = baseline_recency(ds, ds.target_users());
    CHECK(p[0].items == std::vector<ItemId>{2, 3, 5});
  }
}

TEST_CASE("popularity baseline skips deleted items") {
  std::vector<Interaction> evs;
  for (int k = 0; k < 5; ++k) evs.push_back(ev(2, 3, k));
  for (int k = 0; k < 3; ++k) evs.push_back(ev(2, 1, k));
  evs.push_back(ev(1, 3, 99, InteractionKind::remove));
  Dataset ds({fx::user(1), fx::user(2)}, fx::items(1, 40), evs, {}, {1, 2});
  const auto p = baseline_popular(ds, ds.target_users());
  REQUIRE(p.size() == 2);
  CHECK(p[0].items.front() == 1);
  CHECK(p[1].items.front() == 3);
  CHECK(p[0].items.size() == 30);
  CHECK(deleted_items(ds, 0) == std::vector<ItemIdx>{2});
}
