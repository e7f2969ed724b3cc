// File formats and ingestion rules.
//
// Event CSV:
//   # stormqueue-events v1, tz_offset_minutes=<int>
//   region,failure_time,duration_hours
//   Z1,2008-09-12T07:15,3.250000
//
// Counts CSV (rates CSV has the same layout with `rate` values and an extra
// `kind=<name>` header field):
//   # stormqueue-counts v1, step_minutes=<int>, tz_offset_minutes=<int>
//   timestamp,region,count
//
// Timestamps are local wall-clock minutes, YYYY-MM-DDTHH:MM, with the
// declared offset from UTC. In memory every timestamp is UTC minutes since the
// Unix epoch.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stormqueue/core.hpp"

namespace stormqueue {

/// Malformed or inconsistent input. `line` is 1-based, 0 when not tied to a line.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class ParseMode { strict, lenient };

/// YYYY-MM-DDTHH:MM local time -> UTC minutes since epoch.
std::int64_t parse_timestamp(std::string_view text, int tz_offset_minutes);
std::string format_timestamp(std::int64_t utc_minutes, int tz_offset_minutes);

struct RawEvent {
  std::string region;
  std::int64_t failure_minute = 0;  // UTC minutes since epoch
  double duration_hours = 0.0;

  bool operator==(const RawEvent&) const = default;
};

struct EventTable {
  int tz_offset_minutes = 0;
  std::vector<RawEvent> rows;
  std::vector<std::string> warnings;
};

/// Throws InputError (with line number) on malformed rows in strict mode; in
/// lenient mode malformed rows are skipped and reported in `warnings`. If
/// `known` is given, rows naming other regions are errors.
EventTable read_event_csv(std::istream& in, ParseMode mode = ParseMode::strict,
                          const RegionPartition* known = nullptr);
EventTable read_event_csv(const std::filesystem::path& path, ParseMode mode = ParseMode::strict,
                          const RegionPartition* known = nullptr);
void write_event_csv(std::ostream& out, const EventTable& table);

struct PreprocessReport {
  std::size_t raw = 0;      // rows in
  std::size_t grouped = 0;  // entities after burst grouping
  std::size_t dropped = 0;  // entities dropped for negative duration
  std::size_t output = 0;   // entities out
};

struct PreprocessResult {
  std::vector<RawEvent> events;  // sorted by (failure_minute, region)
  PreprocessReport report;
};

/// Rows sharing (region, failure minute) collapse to one entity whose
/// duration is the burst maximum; entities with negative duration are then
/// dropped.
PreprocessResult preprocess_events(std::span<const RawEvent> rows);

/// Regions in order of first appearance.
RegionPartition partition_of(std::span<const RawEvent> rows);

/// Times relative to `origin_minutes`, in hours. Throws InputError for rows
/// whose region is not in `partition`.
std::vector<Event> to_events(std::span<const RawEvent> rows, std::int64_t origin_minutes,
                             const RegionPartition& partition);

/// Failure times rounded to the nearest minute, durations to 1e-6 h.
std::vector<RawEvent> to_raw_events(std::span<const Event> events, std::int64_t origin_minutes,
                                    const RegionPartition& partition);

struct CountsTable {
  int step_minutes = 0;
  int tz_offset_minutes = 0;
  std::optional<CountSeries> series;  // empty data section -> nullopt
  std::vector<std::string> warnings;
};

CountsTable read_counts_csv(std::istream& in, ParseMode mode = ParseMode::strict);
CountsTable read_counts_csv(const std::filesystem::path& path, ParseMode mode = ParseMode::strict);
void write_counts_csv(std::ostream& out, const CountSeries& counts, int tz_offset_minutes);

struct RatesTable {
  int step_minutes = 0;
  int tz_offset_minutes = 0;
  std::string kind;
  std::optional<RateSeries> series;
};

RatesTable read_rates_csv(std::istream& in);
RatesTable read_rates_csv(const std::filesystem::path& path);
void write_rates_csv(std::ostream& out, const RateSeries& rates, int tz_offset_minutes,
                     std::string_view kind);

/// Grid step in whole minutes; throws InputError if the step is not.
int step_minutes_of(const TimeGrid& grid);

}  // namespace stormqueue
