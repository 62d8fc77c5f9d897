#include "doctest.h"
#include "helpers.hpp"
#include "../oracles.hpp"

using namespace jobrec;
using fx::ev;

namespace {
double J(std::vector<Token> a, std::vector<Token> b) { return jaccard(a, b); }
}

TEST_CASE("jaccard") {
  CHECK(J({1, 2}, {1, 2}) == 1.0);
  CHECK(J({1, 2}, {3, 4}) == 0.0);
  CHECK(J({1, 2}, {2, 3}) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(J({}, {}) == 0.0);
}

TEST_CASE("set index transpose") {
  SetIndex idx({{3, 1, 3}, {}, {1, 7}});
  CHECK(idx.entity_count() == 3);
  CHECK(std::vector<Token>(idx.tokens(0).begin(), idx.tokens(0).end()) == std::vector<Token>{1, 3});
  const auto p = idx.postings(1);
  CHECK(std::vector<std::uint32_t>(p.begin(), p.end()) == std::vector<std::uint32_t>{0, 2});
  CHECK(idx.postings(99).empty());
}

TEST_CASE("user jaccard neighbors") {
  // u={i1,i2}, u'={i2,i3}, u''={i9}
  Dataset ds({fx::user(1), fx::user(2), fx::user(3)}, {fx::item(1), fx::item(2), fx::item(3), fx::item(9)},
             {ev(1, 1, 0), ev(1, 2, 0), ev(2, 2, 0), ev(2, 3, 0), ev(3, 9, 0)}, {}, {});
  SimilarityIndex sim(ds);
  const auto n = sim.top_k_similar_users(0, EventSource::interactions, 60);
  REQUIRE(n.size() == 1);
  CHECK(n[0].entity == 1);
  CHECK(n[0].score == doctest::Approx(1.0 / 3));
  CHECK(sim.top_k_similar_users(2, EventSource::interactions, 60).empty());
}

TEST_CASE("identical users are mutual top-1") {
  Dataset ds({fx::user(1), fx::user(2), fx::user(3)}, fx::items(1, 3),
             {ev(1, 1, 0), ev(1, 2, 0), ev(2, 1, 0), ev(2, 2, 0), ev(3, 2, 0), ev(3, 3, 0)}, {}, {});
  SimilarityIndex sim(ds);
  CHECK(sim.top_k_similar_users(0, EventSource::interactions, 1) == std::vector<Neighbor>{{1, 1.0}});
  CHECK(sim.top_k_similar_users(1, EventSource::interactions, 1) == std::vector<Neighbor>{{0, 1.0}});
}

TEST_CASE("item jaccard neighbors") {
  // i users {u1,u2}, i' users {u2,u3}, i'' users {u4}
  Dataset ds({fx::user(1), fx::user(2), fx::user(3), fx::user(4)}, fx::items(1, 3),
             {ev(1, 1, 0), ev(2, 1, 0), ev(2, 2, 0), ev(3, 2, 0), ev(4, 3, 0)}, {}, {});
  SimilarityIndex sim(ds);
  const auto n = sim.top_k_similar_items(0, 10);
  REQUIRE(n.size() == 1);
  CHECK(n[0].entity == 1);
  CHECK(n[0].score == doctest::Approx(1.0 / 3));
  CHECK(sim.top_k_similar_items(2, 10).empty());
}

TEST_CASE("deletes do not count as item membership") {
  Dataset ds({fx::user(1), fx::user(2)}, fx::items(1, 2),
             {ev(1, 1, 0), ev(1, 2, 0, InteractionKind::remove), ev(2, 2, 0)}, {}, {});
  SimilarityIndex sim(ds);
  CHECK(sim.top_k_similar_users(0, EventSource::interactions, 5).empty());
}

TEST_CASE("token overlap") {
  Dataset ds({}, {fx::item(1, {5}), fx::item(2, {7, 9}), fx::item(3, {1}), fx::item(4, {5, 7}, {}, false)}, {}, {},
             {});
  SimilarityIndex sim(ds);
  const std::vector<Token> q = {5, 7};
  CHECK(sim.top_k_by_token_overlap(q, TokenField::tags, 10) == std::vector<Neighbor>{{0, 1.0}, {1, 1.0}});
  CHECK(sim.top_k_by_token_overlap(q, TokenField::tags, 0).empty());
  CHECK(sim.top_k_by_token_overlap({}, TokenField::tags, 3).empty());
  // self match
  const std::vector<Token> self = {7, 9};
  CHECK(sim.top_k_by_token_overlap(self, TokenField::tags, 1) == std::vector<Neighbor>{{1, 2.0}});
}

TEST_CASE("k beyond the pool returns only positive scores") {
  Dataset ds({fx::user(1), fx::user(2), fx::user(3)}, fx::items(1, 3), {ev(1, 1, 0), ev(2, 1, 0), ev(3, 3, 0)},
             {}, {});
  SimilarityIndex sim(ds);
  CHECK(sim.top_k_similar_users(0, EventSource::interactions, 1000).size() == 1);
}

TEST_CASE("select_top_k order") {
  std::vector<Neighbor> pool = {{5, 0.5}, {2, 0.5}, {9, 0.7}, {1, 0.1}};
  CHECK(select_top_k(pool, 3) == std::vector<Neighbor>{{9, 0.7}, {2, 0.5}, {5, 0.5}});
}

TEST_CASE("random fixtures agree with brute force") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    oracle::FixtureShape shape;
    shape.users = 25;
    shape.items = 30;
    shape.interactions = 120;
    shape.impressions = 150;
    const auto ds = oracle::random_dataset(seed, shape);
    SimilarityIndex sim(ds);
    for (auto src : {EventSource::interactions, EventSource::impressions}) {
      const auto sets = oracle::user_sets(ds, src);
      for (UserIdx u = 0; u < ds.user_count(); ++u) {
        CHECK(sim.top_k_similar_users(u, src, 7) == oracle::top_k_jaccard(sets, u, 7));
      }
    }
    const auto isets = oracle::item_user_sets(ds);
    for (ItemIdx i = 0; i < ds.item_count(); ++i) {
      CHECK(sim.top_k_similar_items(i, 5) == oracle::top_k_jaccard(isets, i, 5));
    }
    for (UserIdx u = 0; u < ds.user_count(); ++u) {
      for (auto f : {TokenField::tags, TokenField::title}) {
        CHECK(sim.top_k_by_token_overlap(ds.user(u).jobroles, f, 6) ==
              oracle::top_k_overlap(ds, ds.user(u).jobroles, f, 6));
      }
    }
  }
}
