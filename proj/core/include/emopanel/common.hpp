#pragma once

#include <chrono>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emopanel {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. Carries the 1-based line number
/// when the problem can be pinned to a line of an input file (0 otherwise).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Caller violated a precondition (bad argument, shape mismatch, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double x) noexcept { return x != x; }

// ---------------------------------------------------------------------------
// Calendar dates and timestamps

/// A calendar date (no time zone). Ordered, hashable through days_since_epoch.
class Date {
 public:
  constexpr Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Parses "YYYY-MM-DD". Throws DataError on anything else.
  static Date parse(std::string_view iso);

  std::chrono::sys_days sys_days() const noexcept { return days_; }
  std::int64_t days_since_epoch() const noexcept {
    return days_.time_since_epoch().count();
  }
  int year() const;
  unsigned month() const;
  unsigned day() const;
  /// 0 = Sunday ... 6 = Saturday.
  unsigned weekday() const;
  bool is_weekend() const { return weekday() == 0 || weekday() == 6; }
  /// Calendar quarter 1..4.
  unsigned quarter() const { return (month() - 1) / 3 + 1; }

  Date plus_days(int n) const { return Date(days_ + std::chrono::days(n)); }
  std::string iso() const;

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

std::ostream& operator<<(std::ostream& os, const Date& d);

/// UTC instant with second resolution.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  explicit Timestamp(std::chrono::sys_seconds t) : t_(t) {}

  /// Accepts "YYYY-MM-DDTHH:MM:SS" followed by "Z", "+HH:MM" or "-HH:MM"
  /// (offset normalized to UTC). A bare date-time without zone is read as UTC.
  static Timestamp parse(std::string_view iso);

  std::chrono::sys_seconds sys_seconds() const noexcept { return t_; }
  Date date() const;
  /// Seconds since midnight UTC.
  int seconds_of_day() const;
  std::string iso() const;  // always "...Z"

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

 private:
  std::chrono::sys_seconds t_{};
};

// ---------------------------------------------------------------------------
// Deterministic random numbers. Distributions are implemented here instead of
// <random> so that streams are identical across standard libraries.

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i - 1)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_[4];
  std::optional<double> spare_normal_;
};

/// Derives an independent stream seed from a base seed and a label.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

// ---------------------------------------------------------------------------
// Small text helpers shared by the file readers.

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

double parse_double(std::string_view s, std::size_t line = 0);
std::int64_t parse_int(std::string_view s, std::size_t line = 0);

/// Shortest round-trippable decimal representation; NaN written as "".
std::string format_double(double x);

/// Reads a comma-separated file with a header line. Fields are not quoted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws DataError if absent.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable read_csv(std::istream& in, const std::string& source = "<stream>");

/// 64-bit FNV-1a over bytes; used for manifests and content checks.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Whole file as a string. Throws DataError when unreadable.
std::string read_file(const std::string& path);

}  // namespace emopanel
