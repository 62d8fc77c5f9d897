#include "doctest.h"
#include "helpers.hpp"
#include "../oracles.hpp"

using namespace jobrec;
using fx::ev;

namespace {

struct Built {
  Dataset ds;
  SimilarityIndex sim;
  CandidateGenerator gen;
  Built(Dataset d, CandidateConfig cfg = {}) : ds(std::move(d)), sim(ds), gen(ds, sim, cfg) {}
};

std::vector<ItemId> ext(const Dataset& ds, const RankedItems& r) {
  std::vector<ItemId> out;
  for (auto i : r) out.push_back(ds.item(i).id);
  return out;
}

Timestamp week_ts(int k) { return fx::T0 + k * kSecondsPerWeek; }

}  // namespace

TEST_CASE("recent interactions") {
  SUBCASE("recency order") {
    Built b(Dataset({fx::user(1)}, fx::items(1, 2), {ev(1, 1, week_ts(5)), ev(1, 2, week_ts(7))}, {}, {}));
    CHECK(ext(b.ds, b.gen.recent_interactions(0)) == std::vector<ItemId>{2, 1});
  }
  SUBCASE("count tiebreak") {
    Built b(Dataset({fx::user(1)}, fx::items(1, 2),
                    {ev(1, 1, week_ts(1)), ev(1, 1, week_ts(1) + 5), ev(1, 1, week_ts(1) + 9), ev(1, 2, week_ts(1) + 99)},
                    {}, {}));
    CHECK(ext(b.ds, b.gen.recent_interactions(0)) == std::vector<ItemId>{1, 2});
  }
  SUBCASE("cap 60") {
    std::vector<Interaction> evs;
    for (int k = 0; k < 70; ++k) evs.push_back(ev(1, k + 1, fx::T0 + k));
    Built b(Dataset({fx::user(1)}, fx::items(1, 70), evs, {}, {}));
    CHECK(b.gen.recent_interactions(0).size() == 60);
    CHECK(b.gen.recency_order(0, EventSource::interactions).size() == 70);
  }
  SUBCASE("deletes and inactive items are skipped") {
    auto its = fx::items(1, 3);
    its[2].active_during_test = false;
    Built b(Dataset({fx::user(1)}, its,
                    {ev(1, 1, fx::T0), ev(1, 2, fx::T0, InteractionKind::remove), ev(1, 3, fx::T0)}, {}, {}));
    CHECK(ext(b.ds, b.gen.recent_interactions(0)) == std::vector<ItemId>{1});
  }
}

TEST_CASE("recent impressions") {
  Built b(Dataset({fx::user(1), fx::user(2)}, fx::items(1, 2), {}, {{1, 1, 3}, {1, 2, 4}}, {}));
  CHECK(ext(b.ds, b.gen.recent_impressions(0)) == std::vector<ItemId>{2, 1});
  CHECK(b.gen.recent_impressions(1).empty());
}

TEST_CASE("similar user items") {
  SUBCASE("clone neighbor contributes its extra item") {
    Built b(Dataset({fx::user(1), fx::user(2)}, fx::items(1, 9),
                    {ev(1, 1, fx::T0), ev(1, 2, fx::T0), ev(2, 1, fx::T0), ev(2, 2, fx::T0), ev(2, 9, fx::T0 + week_ts(1))},
                    {}, {}));
    const auto r = ext(b.ds, b.gen.similar_user_items(0, EventSource::interactions));
    CHECK(r.front() == 9);
    CHECK(r.size() == 3);  // own items are not excluded
  }
  SUBCASE("better neighbor first") {
    // user 1 {1,2}; user 2 {1,2,5,6} J=0.5; user 3 {1,7,8,9,10} J=1/6... items of user 2 first
    Built b(Dataset({fx::user(1), fx::user(2), fx::user(3)}, fx::items(1, 10),
                    {ev(1, 1, 0), ev(1, 2, 0), ev(2, 1, 0), ev(2, 2, 0), ev(2, 5, 0), ev(2, 6, 0), ev(3, 1, 0),
                     ev(3, 7, 0), ev(3, 8, 0), ev(3, 9, 0), ev(3, 10, 0)},
                    {}, {}));
    const auto r = ext(b.ds, b.gen.similar_user_items(0, EventSource::interactions));
    CHECK(r == std::vector<ItemId>{1, 2, 5, 6, 7, 8, 9, 10});
  }
}

TEST_CASE("content knn") {
  Built b(Dataset({fx::user(1)}, {fx::item(1, {1, 2}, {8}), fx::item(2, {1, 2}, {}), fx::item(3, {1}, {1}), fx::item(4, {}, {})},
                  {ev(1, 1, 0)}, {}, {}));
  const auto r = b.gen.content_knn(0, EventSource::interactions);
  // tags x tags: self and item 2 score 2, item 3 scores 1
  CHECK(ext(b.ds, r[0]) == std::vector<ItemId>{1, 2, 3});
  CHECK(ext(b.ds, r[1]) == std::vector<ItemId>{1});
  // tags(i) vs title(i'): only the title token 8, nobody has tag 8
  CHECK(r[2].empty());
  // title(i) vs tags(i'): item 3 has title {1}
  CHECK(ext(b.ds, r[3]) == std::vector<ItemId>{3});
}

TEST_CASE("jobroles match") {
  Built b(Dataset({fx::user(1, {3, 4}), fx::user(2, {99})}, {fx::item(1, {4}), fx::item(2, {3}, {4}), fx::item(3, {7})},
                  {}, {}, {}));
  CHECK(ext(b.ds, b.gen.jobroles_match(0, TokenField::tags)) == std::vector<ItemId>{1, 2});
  CHECK(ext(b.ds, b.gen.jobroles_match(0, TokenField::title)) == std::vector<ItemId>{2});
  CHECK(b.gen.jobroles_match(1, TokenField::tags).empty());
}

TEST_CASE("global popular") {
  auto its = fx::items(1, 4);
  its[3].active_during_test = false;
  std::vector<Interaction> evs;
  for (int k = 0; k < 5; ++k) evs.push_back(ev(1, 1, k));
  for (int k = 0; k < 9; ++k) evs.push_back(ev(1, 2, k));
  for (int k = 0; k < 20; ++k) evs.push_back(ev(1, 4, k));
  for (int k = 0; k < 5; ++k) evs.push_back(ev(1, 3, k));
  Built b(Dataset({fx::user(1)}, its, evs, {}, {}));
  CHECK(ext(b.ds, b.gen.popular()) == std::vector<ItemId>{2, 1, 3});
}

TEST_CASE("merge keeps every rank") {
  GeneratorOutputs out;
  out[0] = {4, 7};
  out[2] = {1, 2, 3, 4, 5, 6, 7};
  out[14] = {7};
  std::vector<bool> active(10, true);
  active[5] = false;
  out[1] = {5};
  const auto list = merge_candidates(3, out, active);
  CHECK(list.user == 3);
  REQUIRE(list.entries.size() == 6);
  const auto* e = list.find(7);
  REQUIRE(e);
  CHECK(e->rank[0] == 2);
  CHECK(e->rank[2] == 7);
  CHECK(e->rank[14] == 1);
  CHECK(e->rank[1] == 0);
  CHECK(list.find(5) == nullptr);
  CHECK(std::is_sorted(list.entries.begin(), list.entries.end(),
                       [](const auto& a, const auto& c) { return a.item < c.item; }));
}

TEST_CASE("user without events or jobroles gets the populars") {
  std::vector<Interaction> evs;
  for (int k = 0; k < 80; ++k) evs.push_back(ev(1, k + 1, k));
  Built b(Dataset({fx::user(1), fx::user(2)}, fx::items(1, 80), evs, {}, {}));
  const auto list = b.gen.generate(1);
  CHECK(list.entries.size() == 60);
  for (const auto& e : list.entries) {
    for (std::size_t c = 0; c < kCandidateColumnCount; ++c) CHECK((e.rank[c] != 0) == (c == 14));
  }
}

TEST_CASE("per-user bound") {
  const auto ds = oracle::random_dataset(3, {.users = 40, .items = 900, .interactions = 3000, .impressions = 3000,
                                             .tokens = 10, .weeks = 4, .active_share = 1.0, .delete_share = 0.0,
                                             .max_set = 8});
  Built b{Dataset(ds)};
  for (UserIdx u = 0; u < b.ds.user_count(); ++u) CHECK(b.gen.generate(u).entries.size() <= 15 * 60);
}

TEST_CASE("coverage") {
  auto its = fx::items(1, 3);
  its[2].active_during_test = false;
  Built b(Dataset({fx::user(1)}, its, {ev(1, 1, 0), ev(1, 2, 0)}, {}, {1}));
  const std::vector<CandidateList> lists = {b.gen.generate(0)};
  CHECK(coverage(lists, GroundTruth{{1, {1, 2}}}, b.ds) == 1.0);
  CHECK(coverage(lists, GroundTruth{{1, {3}}}, b.ds) == 0.0);
  CHECK(coverage(lists, GroundTruth{{1, {1, 3}}}, b.ds) == 0.5);
}

TEST_CASE("generators agree with brute force") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    oracle::FixtureShape shape;
    shape.max_set = 4;
    const auto ds = oracle::random_dataset(100 + seed, shape);
    CandidateConfig cfg{.cap = 8, .neighbors = 4};
    Built b(Dataset(ds), cfg);
    const auto pop = oracle::capped(oracle::popular(b.ds, 1000), 8);
    for (UserIdx u = 0; u < b.ds.user_count(); ++u) {
      const auto out = b.gen.run_all(u);
      CHECK(out[0] == oracle::capped(oracle::recency(b.ds, u, EventSource::interactions), 8));
      CHECK(out[1] == oracle::capped(oracle::recency(b.ds, u, EventSource::impressions), 8));
      CHECK(out[2] == oracle::similar_user_items(b.ds, u, EventSource::interactions, 8, 4));
      CHECK(out[3] == oracle::similar_user_items(b.ds, u, EventSource::impressions, 8, 4));
      for (int v = 0; v < 4; ++v) {
        CHECK(out[4 + v] == oracle::content_knn(b.ds, u, EventSource::interactions, v, 8));
        CHECK(out[8 + v] == oracle::content_knn(b.ds, u, EventSource::impressions, v, 8));
      }
      CHECK(out[12] == oracle::jobroles_match(b.ds, u, TokenField::tags, 8));
      CHECK(out[13] == oracle::jobroles_match(b.ds, u, TokenField::title, 8));
      CHECK(out[14] == pop);
    }
  }
}

TEST_CASE("candidate file round trip") {
  fx::TempDir dir;
  const auto ds = oracle::random_dataset(5);
  Built b{Dataset(ds)};
  const auto users = target_user_indices(b.ds);
  const auto lists = b.gen.generate(users, 2);
  write_candidates(lists, b.ds, dir.file("c.tsv"), {"p"});
  std::vector<std::string> prov;
  CHECK(read_candidates(b.ds, dir.file("c.tsv"), &prov) == lists);
  CHECK(prov == std::vector<std::string>{"p"});
  // threaded generation equals serial generation
  CHECK(b.gen.generate(users, 1) == lists);
}
