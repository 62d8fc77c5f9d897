#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jobrec {

using UserId = std::int64_t;
using ItemId = std::int64_t;
using Token = std::int64_t;
using Timestamp = std::int64_t;

// Dense positions into Dataset::users / Dataset::items. Both tables are kept
// sorted by external id, so ordering by index is ordering by id.
using UserIdx = std::uint32_t;
using ItemIdx = std::uint32_t;

inline constexpr Timestamp kSecondsPerDay = 86400;
inline constexpr Timestamp kSecondsPerWeek = 7 * kSecondsPerDay;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Monday-based week ordinal, shared by interaction timestamps and the
// (year, ISO week) pairs impressions carry. 1970-01-01 was a Thursday.
int week_of_timestamp(Timestamp ts);
int week_of_iso(int year, int iso_week);
// Inverse of week_of_iso: the ISO (year, week) whose Monday opens the ordinal.
std::pair<int, int> iso_of_week(int week_ordinal);
// 0 = Monday ... 6 = Sunday
int weekday_of_timestamp(Timestamp ts);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);
std::uint64_t mix64(std::uint64_t x);

// Worker count: RECSYS_THREADS if set and positive, else hardware concurrency.
std::size_t default_thread_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is visited
// exactly once; callers write results into per-index slots.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

void log_info(std::string_view msg);
void log_warning(std::string_view msg);
void set_quiet(bool quiet);

// Sorts and removes duplicates in place.
template <typename T>
void make_set(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// |a ∩ b| for sorted duplicate-free ranges.
template <typename T>
std::size_t intersection_size(std::span<const T> a, std::span<const T> b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace jobrec
