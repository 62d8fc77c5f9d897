#include "doctest.h"
#include "helpers.hpp"
#include "../oracles.hpp"

using namespace jobrec;
using fx::ev;

TEST_CASE("week ordinals") {
  CHECK(week_of_timestamp(0) == 0);
  CHECK(weekday_of_timestamp(0) == 3);
  CHECK(weekday_of_timestamp(fx::T0) == 0);
  // sunday 23:59:59 and monday 00:00 fall in different weeks
  CHECK(week_of_timestamp(fx::T0 - 1) + 1 == week_of_timestamp(fx::T0));
  CHECK(week_of_timestamp(fx::T0) == week_of_iso(2015, 33));
  for (int y : {2014, 2015, 2016, 2020}) {
    for (int w : {1, 10, 52}) {
      CHECK(iso_of_week(week_of_iso(y, w)) == std::pair{y, w});
    }
  }
  CHECK(iso_of_week(week_of_iso(2015, 53)) == std::pair{2015, 53});
}

TEST_CASE("id map") {
  IdMap m({3, 8, 20});
  CHECK(m.at(8) == 1);
  CHECK_FALSE(m.find(9).has_value());
  CHECK_THROWS(m.at(9));
}

TEST_CASE("dataset sorts entities and rejects duplicates") {
  Dataset ds({fx::user(5), fx::user(2)}, {fx::item(9), fx::item(1)}, {ev(5, 9, 10)}, {}, {5});
  CHECK(ds.user(0).id == 2);
  CHECK(ds.item(0).id == 1);
  CHECK(ds.events().interaction_user(0) == 1);
  CHECK(ds.events().interaction_item(0) == 1);
  CHECK_THROWS_AS(Dataset({fx::user(1), fx::user(1)}, {}, {}, {}, {}), Error);
}

TEST_CASE("unknown ids follow drop_unknown") {
  Dataset kept({fx::user(1)}, {fx::item(1)}, {ev(1, 1, 5), ev(2, 1, 6)}, {{1, 7, 3}}, {1, 4});
  CHECK(kept.events().interactions().size() == 1);
  CHECK(kept.report().dropped_interactions == 1);
  CHECK(kept.report().dropped_impressions == 1);
  CHECK_THROWS_AS(Dataset({fx::user(1)}, {fx::item(1)}, {ev(2, 1, 6)}, {}, {}, false), Error);
}

TEST_CASE("load and write round trip") {
  fx::TempDir dir;
  const auto ds = oracle::random_dataset(7);
  const auto paths = DatasetPaths::in_directory(dir.path.string());
  write_dataset(ds, paths, {}, {"jobrec stage=test root=r seed=1 config=x"});
  const auto back = load_dataset(paths);
  CHECK(back.users() == ds.users());
  CHECK(back.items() == ds.items());
  CHECK(back.target_users() == ds.target_users());
  CHECK(std::equal(back.events().interactions().begin(), back.events().interactions().end(),
                   ds.events().interactions().begin(), ds.events().interactions().end()));
  CHECK(std::equal(back.events().impressions().begin(), back.events().impressions().end(),
                   ds.events().impressions().begin(), ds.events().impressions().end()));
}

TEST_CASE("empty interactions file loads") {
  fx::TempDir dir;
  const auto paths = DatasetPaths::in_directory(dir.path.string());
  write_dataset(Dataset({fx::user(1)}, {fx::item(1)}, {}, {}, {1}), paths);
  const auto ds = load_dataset(paths);
  CHECK(ds.events().interactions().empty());
  CHECK(ds.user_count() == 1);
}

TEST_CASE("duplicate interaction rows are kept") {
  const auto e = ev(1, 1, 100);
  Dataset ds({fx::user(1)}, {fx::item(1), fx::item(2)}, {e, e, ev(1, 2, 50)}, {}, {});
  CHECK(ds.events().interactions().size() == 3);
}

TEST_CASE("adjacency lists are time ordered") {
  Dataset ds({fx::user(1)}, fx::items(1, 3), {ev(1, 1, 30), ev(1, 2, 10), ev(1, 3, 20)}, {}, {});
  std::vector<Timestamp> ts;
  for (auto k : ds.events().interactions_of_user(0)) ts.push_back(ds.events().interactions()[k].timestamp);
  CHECK(ts == std::vector<Timestamp>{10, 20, 30});
}

TEST_CASE("temporal split boundary") {
  Dataset ds({fx::user(1)}, fx::items(1, 2), {ev(1, 1, 100), ev(1, 2, 700000)}, {}, {1});
  const auto s = temporal_split(ds, 1);
  CHECK(s.boundary == 95200);
  CHECK(s.train.events().interactions().size() == 1);
  CHECK(s.holdout.interactions.size() == 1);
  CHECK(s.warnings.empty());
}

TEST_CASE("temporal split impressions by week") {
  const int w = week_of_timestamp(fx::T0);
  Dataset ds({fx::user(1)}, fx::items(1, 2), {ev(1, 1, fx::T0), ev(1, 2, fx::T0 + 2 * kSecondsPerWeek)},
             {{1, 1, w}, {1, 2, w + 1}, {1, 2, w + 2}}, {1});
  const auto s = temporal_split(ds, 1);
  CHECK(s.train.events().impressions().size() == 2);
  CHECK(s.holdout.impressions.size() == 1);
  CHECK(s.holdout_first_week == w + 2);
}

TEST_CASE("temporal split degenerate cases") {
  const int w = week_of_timestamp(fx::T0);
  Dataset last_week({fx::user(1)}, fx::items(1, 2), {ev(1, 1, fx::T0 + 10), ev(1, 2, fx::T0 + 20)},
                    {{1, 1, w - 3}}, {1});
  const auto s = temporal_split(last_week, 1);
  CHECK(s.train.events().interactions().empty());
  CHECK(s.warnings.size() == 1);

  const auto same = temporal_split(last_week, 0);
  CHECK(same.holdout.interactions.empty());
  CHECK(same.holdout.impressions.empty());
  CHECK(same.train.events().interactions().size() == 2);
  CHECK_THROWS(temporal_split(last_week, -1));
}

TEST_CASE("ground truth") {
  using K = InteractionKind;
  SUBCASE("delete excluded") {
    const std::vector<Interaction> h = {ev(1, 1, 0), ev(1, 2, 0, K::remove)};
    const std::vector<UserId> t = {1};
    CHECK(build_ground_truth(h, t) == GroundTruth{{1, {1}}});
  }
  SUBCASE("set semantics") {
    const std::vector<Interaction> h = {ev(1, 1, 0, K::bookmark), ev(1, 1, 5, K::reply)};
    const std::vector<UserId> t = {1};
    CHECK(build_ground_truth(h, t) == GroundTruth{{1, {1}}});
  }
  SUBCASE("non-target filtered") {
    const std::vector<Interaction> h = {ev(2, 1, 0), ev(1, 3, 0)};
    const std::vector<UserId> t = {1};
    CHECK(build_ground_truth(h, t) == GroundTruth{{1, {3}}});
  }
  SUBCASE("file round trip") {
    fx::TempDir dir;
    const GroundTruth g = {{1, {3, 4}}, {7, {1}}};
    write_ground_truth(g, dir.file("gt.tsv"), {"hello"});
    std::vector<std::string> prov;
    CHECK(read_ground_truth(dir.file("gt.tsv"), &prov) == g);
    CHECK(prov == std::vector<std::string>{"hello"});
  }
}
