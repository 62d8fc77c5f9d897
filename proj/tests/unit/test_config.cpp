#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "jobrec/config.hpp"

using namespace jobrec;

TEST_CASE("defaults validate") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.candidates.cap == 60);
  CHECK(c.recall == RecallMode::corrected);
  CHECK(c.model_configs().size() == 1);
}

TEST_CASE("set and canonical lines") {
  PipelineConfig c;
  c.set("cap", "30");
  c.set("eta", " 0.05 ");
  c.set("blend", "4/4, 6/6");
  c.set("early_stopping_rounds", "20");
  c.set("sampling", "extended");
  CHECK(c.candidates.cap == 30);
  CHECK(c.train.eta == 0.05);
  REQUIRE(c.blend.size() == 2);
  CHECK(c.blend[1] == std::pair<int, double>{6, 6.0});
  const auto cfgs = c.model_configs();
  REQUIRE(cfgs.size() == 3);
  CHECK(cfgs[1].max_depth == 4);
  CHECK(cfgs[2].min_child_weight == 6.0);
  CHECK(cfgs[2].eta == 0.05);
  const auto lines = c.to_lines();
  CHECK(std::is_sorted(lines.begin(), lines.end()));
  CHECK(std::find(lines.begin(), lines.end(), "blend=4/4,6/6") != lines.end());
  c.set("early_stopping_rounds", "none");
  CHECK_FALSE(c.train.early_stopping_rounds.has_value());

  CHECK_THROWS_WITH(c.set("colour", "red"), doctest::Contains("unknown config key"));
  CHECK_THROWS(c.set("cap", "ten"));
  CHECK_THROWS(c.set("blend", "4"));
  CHECK_THROWS(c.set("sampling", "all"));
}

TEST_CASE("invalid values are rejected") {
  PipelineConfig c;
  c.set("cap", "0");
  CHECK_THROWS(c.validate());
  c = {};
  c.set("cap", "70000");
  CHECK_THROWS(c.validate());
  c = {};
  c.set("blend", "0/1");
  CHECK_THROWS(c.validate());
  c = {};
  c.set("holdout_weeks", "0");
  CHECK_THROWS(c.validate());
}

TEST_CASE("hash ignores paths and threads") {
  PipelineConfig a, b;
  b.set("data", "/elsewhere");
  b.set("work", "/tmp/x");
  b.set("threads", "7");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.set("seed", "2");
  CHECK(a.hash() != b.hash());
}

TEST_CASE("config file with comments and errors") {
  fx::TempDir dir;
  {
    std::ofstream out(dir.file("c.conf"));
    out << "# settings\n\ncap = 25\nsampling=extended\n";
  }
  const auto c = read_config(dir.file("c.conf"));
  CHECK(c.candidates.cap == 25);
  CHECK(c.sampling == SamplingMode::extended);
  {
    std::ofstream out(dir.file("bad.conf"));
    out << "cap=25\nnonsense\n";
  }
  CHECK_THROWS_WITH(read_config(dir.file("bad.conf")), doctest::Contains(":2:"));
  CHECK_THROWS(read_config(dir.file("none.conf")));
}

TEST_CASE("provenance round trip") {
  PipelineConfig c;
  c.set("seed", "9");
  auto p = make_provenance("train", "synth-1", c);
  p.anchor = 12345;
  const auto back = Provenance::parse(p.lines());
  REQUIRE(back.has_value());
  CHECK(back->stage == "train");
  CHECK(back->root == "synth-1");
  CHECK(back->seed == 9);
  CHECK(back->config_hash == c.hash());
  CHECK(back->config == c.to_lines());
  CHECK(back->anchor == 12345);
  CHECK_FALSE(Provenance::parse({"some comment"}).has_value());
  CHECK_FALSE(Provenance::parse(make_provenance("x", "r", c).lines())->anchor.has_value());
}

TEST_CASE("dataset roots") {
  fx::TempDir dir;
  const auto paths = DatasetPaths::in_directory(dir.path.string());
  Dataset ds({fx::user(1)}, {fx::item(1)}, {fx::ev(1, 1, 5)}, {}, {1});
  write_dataset(ds, paths);
  const auto hashed = dataset_root(paths);
  CHECK(hashed.size() == 16);
  CHECK_FALSE(dataset_anchor(paths).has_value());
  write_dataset(ds, paths, {}, make_provenance("synth", "synth-abc", PipelineConfig{}).lines());
  CHECK(dataset_root(paths) == "synth-abc");
  CHECK(read_comment_header(paths.users).size() > 1);
}
