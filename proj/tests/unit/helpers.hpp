#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "jobrec/dataset.hpp"

namespace fx {

using namespace jobrec;

inline constexpr Timestamp T0 = 1439164800;  // a Monday

inline User user(UserId id, std::vector<Token> jobroles = {}) {
  User u;
  u.id = id;
  u.jobroles = std::move(jobroles);
  return u;
}

inline Item item(ItemId id, std::vector<Token> tags = {}, std::vector<Token> title = {}, bool active = true) {
  Item i;
  i.id = id;
  i.tags = std::move(tags);
  i.title = std::move(title);
  i.active_during_test = active;
  return i;
}

inline Interaction ev(UserId u, ItemId i, Timestamp ts, InteractionKind k = InteractionKind::click) {
  return {u, i, k, ts};
}

inline std::vector<Item> items(ItemId first, std::size_t n, bool active = true) {
  std::vector<Item> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(item(first + static_cast<ItemId>(k), {}, {}, active));
  return out;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("jobrec_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace fx
