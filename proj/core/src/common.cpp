#include "emopanel/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace emopanel {

DataError::DataError(const std::string& what, std::size_t line)
    : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) throw DataError("truncated date/time '" + std::string(s) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') throw DataError("bad digit in date/time '" + std::string(s) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

std::chrono::year_month_day ymd_of(std::chrono::sys_days d) { return std::chrono::year_month_day(d); }

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year(year), std::chrono::month(month),
                                  std::chrono::day(day)};
  if (!ymd.ok()) throw DataError("invalid calendar date");
  days_ = std::chrono::sys_days(ymd);
}

Date Date::parse(std::string_view iso) {
  iso = trim(iso);
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-')
    throw DataError("expected YYYY-MM-DD, got '" + std::string(iso) + "'");
  return Date(parse_fixed(iso, 0, 4), static_cast<unsigned>(parse_fixed(iso, 5, 2)),
              static_cast<unsigned>(parse_fixed(iso, 8, 2)));
}

int Date::year() const { return static_cast<int>(ymd_of(days_).year()); }
unsigned Date::month() const { return static_cast<unsigned>(ymd_of(days_).month()); }
unsigned Date::day() const { return static_cast<unsigned>(ymd_of(days_).day()); }
unsigned Date::weekday() const { return std::chrono::weekday(days_).c_encoding(); }

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

std::ostream& operator<<(std::ostream& os, const Date& d) { return os << d.iso(); }

Timestamp Timestamp::parse(std::string_view iso) {
  iso = trim(iso);
  if (iso.size() < 19 || (iso[10] != 'T' && iso[10] != ' ') || iso[13] != ':' || iso[16] != ':')
    throw DataError("expected ISO-8601 timestamp, got '" + std::string(iso) + "'");
  Date d = Date::parse(iso.substr(0, 10));
  int hh = parse_fixed(iso, 11, 2), mm = parse_fixed(iso, 14, 2), ss = parse_fixed(iso, 17, 2);
  if (hh > 23 || mm > 59 || ss > 60) throw DataError("time of day out of range in '" + std::string(iso) + "'");
  std::size_t pos = 19;
  if (pos < iso.size() && iso[pos] == '.') {  // fractional seconds ignored
    ++pos;
    while (pos < iso.size() && iso[pos] >= '0' && iso[pos] <= '9') ++pos;
  }
  int offset_sec = 0;
  if (pos < iso.size()) {
    char z = iso[pos];
    if (z == 'Z' && pos + 1 == iso.size()) {
    } else if ((z == '+' || z == '-') && iso.size() == pos + 6 && iso[pos + 3] == ':') {
      int oh = parse_fixed(iso, pos + 1, 2), om = parse_fixed(iso, pos + 4, 2);
      offset_sec = (oh * 3600 + om * 60) * (z == '+' ? 1 : -1);
    } else {
      throw DataError("bad time zone designator in '" + std::string(iso) + "'");
    }
  }
  auto t = std::chrono::sys_seconds(d.sys_days()) + std::chrono::seconds(hh * 3600 + mm * 60 + ss) -
           std::chrono::seconds(offset_sec);
  return Timestamp(t);
}

Date Timestamp::date() const { return Date(std::chrono::floor<std::chrono::days>(t_)); }

int Timestamp::seconds_of_day() const {
  auto midnight = std::chrono::floor<std::chrono::days>(t_);
  return static_cast<int>((t_ - midnight).count());
}

std::string Timestamp::iso() const {
  int s = seconds_of_day();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", date().iso().c_str(), s / 3600, (s / 60) % 60, s % 60);
  return buf;
}

// xoshiro256** seeded through splitmix64.
namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvalidArgument("uniform_int: empty range");
  auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next_u64());
  // Rejection sampling removes modulo bias.
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return lo + static_cast<std::int64_t>(r % span);
}

double Rng::normal() {
  if (spare_normal_) {
    double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * 3.14159265358979323846 * u2;
  spare_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  std::uint64_t h = fnv1a64(label, 0xcbf29ce484222325ULL ^ base);
  return splitmix64(h);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return s.substr(b, e - b);
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

double parse_double(std::string_view s, std::size_t line) {
  s = trim(s);
  if (s.empty()) return kNaN;
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError("not a number: '" + std::string(s) + "'", line);
  return v;
}

std::int64_t parse_int(std::string_view s, std::size_t line) {
  s = trim(s);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw DataError("not an integer: '" + std::string(s) + "'", line);
  return v;
}

std::string format_double(double x) {
  if (is_missing(x)) return "";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError("missing CSV column '" + std::string(name) + "'");
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty()) continue;
    auto fields = split(body, ',');
    for (auto& f : fields) f = std::string(trim(f));
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw DataError(source + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                          std::to_string(fields.size()),
                      lineno);
    t.rows.push_back(std::move(fields));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_csv(in, path);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace emopanel
