#include "stormqueue/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace stormqueue {

InputError::InputError(const std::string& what, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// "# stormqueue-<kind> v1, key=value, ..." -> key/value map.
std::map<std::string, std::string> parse_header(const std::string& line, std::string_view kind) {
  const std::string magic = "# stormqueue-" + std::string(kind) + " v1";
  auto fields = split(trim(line), ',');
  if (fields.empty() || trim(fields[0]) != magic) {
    throw InputError("expected header '" + magic + ", ...'", 1);
  }
  std::map<std::string, std::string> out;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    const auto kv = trim(fields[i]);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw InputError("malformed header field '" + std::string(kv) + "'", 1);
    out.emplace(std::string(trim(kv.substr(0, eq))), std::string(trim(kv.substr(eq + 1))));
  }
  return out;
}

int header_int(const std::map<std::string, std::string>& header, const std::string& key) {
  const auto it = header.find(key);
  if (it == header.end()) throw InputError("header is missing '" + key + "'", 1);
  const auto v = parse_number<int>(it->second);
  if (!v) throw InputError("header field '" + key + "' is not an integer", 1);
  return *v;
}

void expect_columns(std::istream& in, const std::string& expected) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != expected) {
    throw InputError("expected column header '" + expected + "'", 2);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

/// Shared reader for timestamp,region,value tables on a uniform grid.
template <typename Value, typename ParseValue>
struct GridTable {
  std::optional<TimeGrid> grid;
  std::vector<std::string> regions;
  std::vector<std::vector<Value>> values;
  std::vector<std::string> warnings;
};

template <typename Value, typename ParseValue>
GridTable<Value, ParseValue> read_grid_table(std::istream& in, int step_minutes, int tz_offset,
                                             ParseMode mode, ParseValue parse_value) {
  GridTable<Value, ParseValue> table;
  if (step_minutes <= 0) throw InputError("step_minutes must be positive", 1);
  struct Cell {
    std::int64_t ts;
    std::size_t region;
    Value value;
  };
  std::vector<Cell> cells;
  std::map<std::string, std::size_t> region_index;
  std::optional<std::int64_t> first_ts;
  std::int64_t last_ts = 0;
  std::string line;
  std::size_t lineno = 2;

  auto reject = [&](const std::string& msg) {
    if (mode == ParseMode::strict) throw InputError(msg, lineno);
    table.warnings.push_back("line " + std::to_string(lineno) + ": " + msg + " (skipped)");
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 3) {
      reject("expected 3 fields, got " + std::to_string(fields.size()));
      continue;
    }
    std::int64_t ts = 0;
    try {
      ts = parse_timestamp(trim(fields[0]), tz_offset);
    } catch (const InputError& e) {
      reject(e.what());
      continue;
    }
    const std::string region(trim(fields[1]));
    if (region.empty()) {
      reject("empty region id");
      continue;
    }
    std::string why;
    const auto value = parse_value(trim(fields[2]), why);
    if (!value) {
      reject(why);
      continue;
    }
    if (first_ts && ts < last_ts) {
      reject("timestamps must be nondecreasing");
      continue;
    }
    if (first_ts && (ts - *first_ts) % step_minutes != 0) {
      reject("timestamp is not on the " + std::to_string(step_minutes) + "-minute grid");
      continue;
    }
    if (!first_ts) first_ts = ts;
    last_ts = ts;
    auto [it, inserted] = region_index.emplace(region, table.regions.size());
    if (inserted) table.regions.push_back(region);
    cells.push_back({ts, it->second, *value});
  }
  if (!first_ts) return table;

  const auto count = static_cast<std::size_t>((last_ts - *first_ts) / step_minutes + 1);
  table.grid = TimeGrid(*first_ts, step_minutes / 60.0, count);
  std::vector<std::vector<std::optional<Value>>> slots(table.regions.size(),
                                                       std::vector<std::optional<Value>>(count));
  for (const auto& c : cells) {
    auto& slot = slots[c.region][static_cast<std::size_t>((c.ts - *first_ts) / step_minutes)];
    if (slot) {
      if (mode == ParseMode::strict) {
        throw InputError("duplicate entry for region '" + table.regions[c.region] + "' at " +
                         format_timestamp(c.ts, tz_offset));
      }
      table.warnings.push_back("duplicate entry for region '" + table.regions[c.region] +
                               "' ignored");
      continue;
    }
    slot = c.value;
  }
  for (std::size_t r = 0; r < slots.size(); ++r) {
    std::vector<Value> filled(count);
    Value carry{};
    for (std::size_t i = 0; i < count; ++i) {
      if (!slots[r][i]) {
        const std::string msg = "no entry for region '" + table.regions[r] + "' at " +
                                format_timestamp(*first_ts + static_cast<std::int64_t>(i) * step_minutes, tz_offset);
        if (mode == ParseMode::strict) throw InputError(msg);
        table.warnings.push_back(msg + " (previous value carried)");
      } else {
        carry = *slots[r][i];
      }
      filled[i] = carry;
    }
    table.values.push_back(std::move(filled));
  }
  return table;
}

}  // namespace

std::int64_t parse_timestamp(std::string_view text, int tz_offset_minutes) {
  // YYYY-MM-DDTHH:MM
  if (text.size() != 16 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':') {
    throw InputError("malformed timestamp '" + std::string(text) + "', expected YYYY-MM-DDTHH:MM");
  }
  const auto y = parse_number<int>(text.substr(0, 4));
  const auto mo = parse_number<unsigned>(text.substr(5, 2));
  const auto d = parse_number<unsigned>(text.substr(8, 2));
  const auto h = parse_number<int>(text.substr(11, 2));
  const auto mi = parse_number<int>(text.substr(14, 2));
  if (!y || !mo || !d || !h || !mi || *h > 23 || *mi > 59) {
    throw InputError("malformed timestamp '" + std::string(text) + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{*y}, month{*mo}, day{*d}};
  if (!ymd.ok()) throw InputError("invalid date in '" + std::string(text) + "'");
  const std::int64_t days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return days_since_epoch * 1440 + *h * 60 + *mi - tz_offset_minutes;
}

std::string format_timestamp(std::int64_t utc_minutes, int tz_offset_minutes) {
  using namespace std::chrono;
  const std::int64_t local = utc_minutes + tz_offset_minutes;
  const std::int64_t day_count = floor_div(local, 1440);
  const std::int64_t minute_of_day = local - day_count * 1440;
  const year_month_day ymd{sys_days{days{day_count}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(minute_of_day / 60), static_cast<int>(minute_of_day % 60));
  return buf;
}

// ---------------------------------------------------------------------------
// Events

EventTable read_event_csv(std::istream& in, ParseMode mode, const RegionPartition* known) {
  EventTable table;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty file; expected an events header", 1);
  const auto header = parse_header(line, "events");
  table.tz_offset_minutes = header_int(header, "tz_offset_minutes");
  expect_columns(in, "region,failure_time,duration_hours");

  std::size_t lineno = 2;
  auto reject = [&](const std::string& msg) {
    if (mode == ParseMode::strict) throw InputError(msg, lineno);
    table.warnings.push_back("line " + std::to_string(lineno) + ": " + msg + " (skipped)");
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (fields.size() != 3) {
      reject("expected 3 fields, got " + std::to_string(fields.size()));
      continue;
    }
    RawEvent row;
    row.region = std::string(trim(fields[0]));
    if (row.region.empty()) {
      reject("empty region id");
      continue;
    }
    if (known != nullptr && !known->index_of(row.region)) {
      reject("unknown region '" + row.region + "'");
      continue;
    }
    try {
      row.failure_minute = parse_timestamp(trim(fields[1]), table.tz_offset_minutes);
    } catch (const InputError& e) {
      reject(e.what());
      continue;
    }
    const auto d = parse_number<double>(trim(fields[2]));
    if (!d || !std::isfinite(*d)) {
      reject("malformed duration '" + std::string(trim(fields[2])) + "'");
      continue;
    }
    row.duration_hours = *d;
    table.rows.push_back(std::move(row));
  }
  return table;
}

EventTable read_event_csv(const std::filesystem::path& path, ParseMode mode,
                          const RegionPartition* known) {
  auto in = open_input(path);
  return read_event_csv(in, mode, known);
}

void write_event_csv(std::ostream& out, const EventTable& table) {
  out << "# stormqueue-events v1, tz_offset_minutes=" << table.tz_offset_minutes << '\n'
      << "region,failure_time,duration_hours\n";
  char buf[64];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.duration_hours);
    out << r.region << ',' << format_timestamp(r.failure_minute, table.tz_offset_minutes) << ','
        << buf << '\n';
  }
}

PreprocessResult preprocess_events(std::span<const RawEvent> rows) {
  std::map<std::pair<std::int64_t, std::string>, double> bursts;
  for (const auto& r : rows) {
    auto [it, inserted] = bursts.emplace(std::make_pair(r.failure_minute, r.region), r.duration_hours);
    if (!inserted) it->second = std::max(it->second, r.duration_hours);
  }
  PreprocessResult out;
  out.report.raw = rows.size();
  out.report.grouped = bursts.size();
  for (const auto& [key, duration] : bursts) {
    if (duration < 0.0) {
      ++out.report.dropped;
      continue;
    }
    out.events.push_back({key.second, key.first, duration});
  }
  out.report.output = out.events.size();
  return out;
}

RegionPartition partition_of(std::span<const RawEvent> rows) {
  std::vector<std::string> ids;
  for (const auto& r : rows) {
    if (std::find(ids.begin(), ids.end(), r.region) == ids.end()) ids.push_back(r.region);
  }
  if (ids.empty()) throw InputError("no events, cannot derive regions");
  return RegionPartition::from_ids(ids);
}

std::vector<Event> to_events(std::span<const RawEvent> rows, std::int64_t origin_minutes,
                             const RegionPartition& partition) {
  std::vector<Event> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    const auto j = partition.index_of(r.region);
    if (!j) throw InputError("unknown region '" + r.region + "'");
    out.push_back({*j, static_cast<double>(r.failure_minute - origin_minutes) / 60.0, r.duration_hours});
  }
  return out;
}

std::vector<RawEvent> to_raw_events(std::span<const Event> events, std::int64_t origin_minutes,
                                    const RegionPartition& partition) {
  std::vector<RawEvent> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    out.push_back({partition[e.region].id,
                   origin_minutes + std::llround(e.failure_time * 60.0),
                   std::round(e.duration * 1e6) / 1e6});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Counts and rates

int step_minutes_of(const TimeGrid& grid) {
  const double minutes = grid.step() * 60.0;
  const double rounded = std::round(minutes);
  if (rounded < 1.0 || std::abs(minutes - rounded) > 1e-9) {
    throw InputError("grid step of " + std::to_string(grid.step()) + " h is not a whole number of minutes");
  }
  return static_cast<int>(rounded);
}

CountsTable read_counts_csv(std::istream& in, ParseMode mode) {
  CountsTable out;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty file; expected a counts header", 1);
  const auto header = parse_header(line, "counts");
  out.step_minutes = header_int(header, "step_minutes");
  out.tz_offset_minutes = header_int(header, "tz_offset_minutes");
  expect_columns(in, "timestamp,region,count");
  auto parse = [](std::string_view s, std::string& why) -> std::optional<std::int64_t> {
    const auto v = parse_number<std::int64_t>(s);
    if (!v) {
      why = "malformed count '" + std::string(s) + "'";
      return std::nullopt;
    }
    if (*v < 0) {
      why = "negative count " + std::string(s);
      return std::nullopt;
    }
    return v;
  };
  auto table = read_grid_table<std::int64_t>(in, out.step_minutes, out.tz_offset_minutes, mode, parse);
  out.warnings = std::move(table.warnings);
  if (table.grid) out.series = CountSeries(*table.grid, std::move(table.regions), std::move(table.values));
  return out;
}

CountsTable read_counts_csv(const std::filesystem::path& path, ParseMode mode) {
  auto in = open_input(path);
  return read_counts_csv(in, mode);
}

void write_counts_csv(std::ostream& out, const CountSeries& counts, int tz_offset_minutes) {
  const auto& grid = counts.grid();
  const int step = step_minutes_of(grid);
  out << "# stormqueue-counts v1, step_minutes=" << step << ", tz_offset_minutes=" << tz_offset_minutes
      << '\n'
      << "timestamp,region,count\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto ts = format_timestamp(grid.origin_minutes() + static_cast<std::int64_t>(i) * step, tz_offset_minutes);
    for (std::size_t r = 0; r < counts.region_count(); ++r) {
      out << ts << ',' << counts.regions()[r] << ',' << counts.counts(r)[i] << '\n';
    }
  }
}

RatesTable read_rates_csv(std::istream& in) {
  RatesTable out;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty file; expected a rates header", 1);
  const auto header = parse_header(line, "rates");
  out.step_minutes = header_int(header, "step_minutes");
  out.tz_offset_minutes = header_int(header, "tz_offset_minutes");
  if (const auto it = header.find("kind"); it != header.end()) out.kind = it->second;
  expect_columns(in, "timestamp,region,rate");
  auto parse = [](std::string_view s, std::string& why) -> std::optional<double> {
    const auto v = parse_number<double>(s);
    if (!v || !std::isfinite(*v) || *v < 0.0) {
      why = "malformed or negative rate '" + std::string(s) + "'";
      return std::nullopt;
    }
    return v;
  };
  auto table = read_grid_table<double>(in, out.step_minutes, out.tz_offset_minutes, ParseMode::strict, parse);
  if (table.grid) out.series = RateSeries(*table.grid, std::move(table.regions), std::move(table.values));
  return out;
}

RatesTable read_rates_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_rates_csv(in);
}

void write_rates_csv(std::ostream& out, const RateSeries& rates, int tz_offset_minutes,
                     std::string_view kind) {
  const auto& grid = rates.grid();
  const int step = step_minutes_of(grid);
  out << "# stormqueue-rates v1, step_minutes=" << step << ", tz_offset_minutes=" << tz_offset_minutes
      << ", kind=" << kind << '\n'
      << "timestamp,region,rate\n";
  char buf[64];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto ts = format_timestamp(grid.origin_minutes() + static_cast<std::int64_t>(i) * step, tz_offset_minutes);
    for (std::size_t r = 0; r < rates.region_count(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", rates.values(r)[i]);
      out << ts << ',' << rates.regions()[r] << ',' << buf << '\n';
    }
  }
}

}  // namespace stormqueue
