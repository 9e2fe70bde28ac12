#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace nodality {

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Half-open interval [start, end) of UTC seconds.
struct TimeWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool contains(std::int64_t t) const { return t >= start && t < end; }
  std::int64_t length() const { return end - start; }
  bool empty() const { return end <= start; }
  bool operator==(const TimeWindow&) const = default;
  auto operator<=>(const TimeWindow&) const = default;
};

// ISO-8601 UTC timestamps. Accepts "YYYY-MM-DD" (midnight) and
// "YYYY-MM-DDThh:mm:ss" with an optional fractional part (truncated) and an
// optional "Z" suffix. Offsets other than Z/+00:00 are rejected.
std::optional<std::int64_t> parse_iso8601(const std::string& text);

std::string format_iso8601(std::int64_t utc_seconds);
std::string format_iso_date(std::int64_t utc_seconds);

}  // namespace nodality
