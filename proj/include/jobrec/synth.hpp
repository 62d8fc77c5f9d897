#pragma once

#include <cstdint>
#include <vector>

#include "jobrec/dataset.hpp"

namespace jobrec {

struct SynthConfig {
  std::size_t users = 200;
  std::size_t items = 400;
  int weeks = 12;
  std::uint64_t seed = 1;
  double target_fraction = 0.5;
  // Monday 2015-08-10 00:00 UTC.
  Timestamp start = 1439164800;

  void validate() const;
};

// Generated tables plus the planted structure behind them.
struct SynthData {
  Dataset dataset;
  std::vector<int> user_topic;       // primary topic, by dense user index
  std::vector<int> user_second;      // secondary topic, -1 if none
  std::vector<int> item_topic;       // by dense item index
  int topics = 0;
};

// Latent-topic generator: users and items share topic vocabularies for
// jobroles, tags and titles; clicks favour the user's topics and popular
// items, arrive in short sessions and repeat; impressions are noisy
// supersets of clicks. Output depends only on the config.
SynthData synthesize(const SynthConfig& config);

}  // namespace jobrec
