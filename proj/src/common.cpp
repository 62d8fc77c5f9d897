#include "jobrec/common.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

namespace jobrec {
namespace {

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr std::int64_t year_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return y + (m <= 2);
}

constexpr std::int64_t weekday_of_days(std::int64_t days) {
  return ((days + 3) % 7 + 7) % 7;
}

constexpr std::int64_t iso_week1_monday(std::int64_t year) {
  const std::int64_t jan4 = days_from_civil(year, 1, 4);
  return jan4 - weekday_of_days(jan4);
}

std::atomic<bool> g_quiet{false};
std::mutex g_log_mutex;

}  // namespace

int week_of_timestamp(Timestamp ts) {
  return static_cast<int>(floor_div(floor_div(ts, kSecondsPerDay) + 3, 7));
}

int week_of_iso(int year, int iso_week) {
  const std::int64_t monday = iso_week1_monday(year) + 7 * (iso_week - 1);
  return static_cast<int>(floor_div(monday + 3, 7));
}

std::pair<int, int> iso_of_week(int week_ordinal) {
  const std::int64_t monday = static_cast<std::int64_t>(week_ordinal) * 7 - 3;
  const std::int64_t year = year_from_days(monday + 3);
  const std::int64_t week = (monday - iso_week1_monday(year)) / 7 + 1;
  return {static_cast<int>(year), static_cast<int>(week)};
}

int weekday_of_timestamp(Timestamp ts) {
  return static_cast<int>(weekday_of_days(floor_div(ts, kSecondsPerDay)));
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("RECSYS_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

void set_quiet(bool quiet) { g_quiet = quiet; }

void log_info(std::string_view msg) {
  if (g_quiet) return;
  std::lock_guard lock(g_log_mutex);
  std::cerr << "[jobrec] " << msg << '\n';
}

void log_warning(std::string_view msg) {
  std::lock_guard lock(g_log_mutex);
  std::cerr << "[jobrec] warning: " << msg << '\n';
}

}  // namespace jobrec
