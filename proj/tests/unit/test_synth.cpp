#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "jobrec/synth.hpp"

using namespace jobrec;

TEST_CASE("size validation") {
  SynthConfig c;
  c.users = 9;
  CHECK_THROWS(c.validate());
  c = {};
  c.items = 5;
  CHECK_THROWS(c.validate());
  c = {};
  c.weeks = 2;
  CHECK_THROWS(c.validate());
  c = {};
  c.target_fraction = 0;
  CHECK_THROWS(synthesize(c));
}

TEST_CASE("output is deterministic and referentially consistent") {
  SynthConfig c;
  const auto a = synthesize(c);
  const auto b = synthesize(c);
  fx::TempDir da, db;
  write_dataset(a.dataset, DatasetPaths::in_directory(da.path.string()));
  write_dataset(b.dataset, DatasetPaths::in_directory(db.path.string()));
  for (auto name : {"users.tsv", "items.tsv", "interactions.tsv", "impressions.tsv", "target_users.tsv"}) {
    std::ifstream fa(da.file(name)), fb(db.file(name));
    REQUIRE(fa);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
    CHECK_FALSE(sa.empty());
  }
  const auto& ds = a.dataset;
  CHECK(ds.user_count() == 200);
  CHECK(ds.item_count() == 400);
  CHECK(ds.report().dropped_interactions == 0);
  CHECK(ds.report().dropped_impressions == 0);
  CHECK_FALSE(ds.target_users().empty());
  CHECK(ds.events().interactions().size() > 1000);
  const int weeks = week_of_timestamp(ds.events().max_timestamp()) - week_of_timestamp(ds.events().min_timestamp()) + 1;
  CHECK(weeks <= 12);
  CHECK(weeks >= 10);
  std::size_t deletes = 0;
  for (const auto& e : ds.events().interactions()) deletes += e.kind == InteractionKind::remove;
  CHECK(deletes > 0);
  CHECK(deletes * 10 < ds.events().interactions().size());

  SynthConfig other;
  other.seed = 2;
  CHECK_FALSE(synthesize(other).dataset.events().interactions().size() == ds.events().interactions().size());
}

TEST_CASE("held-out clicks follow the planted topics") {
  SynthConfig c;
  c.users = 400;
  c.items = 600;
  c.weeks = 8;
  const auto s = synthesize(c);
  const auto split = temporal_split(s.dataset, 1);
  std::vector<double> topic_share(static_cast<std::size_t>(s.topics), 0.0);
  for (auto t : s.item_topic) topic_share[static_cast<std::size_t>(t)] += 1.0 / static_cast<double>(s.item_topic.size());
  double on_topic = 0, chance = 0, n = 0;
  for (const auto& e : split.holdout.interactions) {
    if (!is_positive(e.kind)) continue;
    const auto u = s.dataset.user_ids().at(e.user_id);
    const auto i = s.dataset.item_ids().at(e.item_id);
    const int t = s.user_topic[u];
    on_topic += s.item_topic[i] == t;
    chance += topic_share[static_cast<std::size_t>(t)];
    ++n;
  }
  REQUIRE(n > 100);
  MESSAGE("on-topic share " << on_topic / n << ", chance " << chance / n);
  CHECK(on_topic / n > 4 * chance / n);
}
