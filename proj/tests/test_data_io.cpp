#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "scenarios.hpp"
#include "stormqueue/data_io.hpp"
#include "stormqueue/model_io.hpp"
#include "tables.hpp"

using namespace stormqueue;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "stormqueue_data_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const char* kEventsHeader = "# stormqueue-events v1, tz_offset_minutes=-300\nregion,failure_time,duration_hours\n";
const char* kCountsHeader = "# stormqueue-counts v1, step_minutes=15, tz_offset_minutes=0\ntimestamp,region,count\n";

}  // namespace

TEST(Timestamps, RoundTripWithOffset) {
  const auto t = parse_timestamp("2008-09-13T02:15", -300);
  EXPECT_EQ(t, parse_timestamp("2008-09-13T07:15", 0));
  EXPECT_EQ(format_timestamp(t, -300), "2008-09-13T02:15");
  EXPECT_EQ(parse_timestamp("1970-01-01T00:00", 0), 0);
  EXPECT_THROW(parse_timestamp("2008-02-30T00:00", 0), InputError);
  EXPECT_THROW(parse_timestamp("2008-09-13 02:15", 0), InputError);
  EXPECT_THROW(parse_timestamp("2008-09-13T25:00", 0), InputError);
}

TEST(Preprocess, BurstKeepsMaximumDuration) {
  const std::vector<RawEvent> rows{{"Z1", 100, 2.0}, {"Z1", 100, 5.0}, {"Z1", 100, 4.0}};
  const auto r = preprocess_events(rows);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].duration_hours, 5.0);
  EXPECT_EQ(r.report.raw, 3u);
  EXPECT_EQ(r.report.grouped, 1u);
}

TEST(Preprocess, NegativeDurationDropped) {
  const std::vector<RawEvent> rows{{"Z1", 100, -1.0}, {"Z2", 100, -1.0}, {"Z2", 100, 0.5}, {"Z1", 200, 0.0}};
  const auto r = preprocess_events(rows);
  EXPECT_EQ(r.report.dropped, 1u);
  ASSERT_EQ(r.events.size(), 2u);
  EXPECT_EQ(r.events[0], (RawEvent{"Z2", 100, 0.5}));
  EXPECT_EQ(r.events[1], (RawEvent{"Z1", 200, 0.0}));
}

TEST(Preprocess, FixtureFileCounts) {
  // 5152 rows in 465 bursts, two of which carry only negative durations.
  const auto table = read_event_csv(scenarios::data_path("fixtures/burst_events_5152.csv"));
  ASSERT_EQ(table.rows.size(), 5152u);
  const auto r = preprocess_events(table.rows);
  EXPECT_EQ(r.report.grouped, 465u);
  EXPECT_EQ(r.report.dropped, 2u);
  EXPECT_EQ(r.report.output, 463u);
  EXPECT_EQ(r.events.size(), 463u);
  EXPECT_EQ(preprocess_events(r.events).events, r.events);
}

TEST(Preprocess, Idempotent) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> minute(0, 50), region(0, 2);
  std::normal_distribution<double> d(3.0, 3.0);
  std::vector<RawEvent> rows;
  for (int i = 0; i < 500; ++i) rows.push_back({"R" + std::to_string(region(rng)), minute(rng), d(rng)});
  const auto once = preprocess_events(rows);
  const auto twice = preprocess_events(once.events);
  EXPECT_EQ(once.events, twice.events);
  EXPECT_EQ(twice.report.dropped, 0u);
  // Every surviving entity is unique in (region, minute) and nonnegative.
  for (std::size_t i = 0; i < once.events.size(); ++i) {
    EXPECT_GE(once.events[i].duration_hours, 0.0);
    if (i > 0) {
      const auto& a = once.events[i - 1];
      const auto& b = once.events[i];
      EXPECT_TRUE(a.failure_minute < b.failure_minute ||
                  (a.failure_minute == b.failure_minute && a.region < b.region));
    }
  }
  EXPECT_EQ(once.report.grouped, once.report.output + once.report.dropped);
}

TEST(EventCsv, StrictAndLenient) {
  const std::string text = std::string(kEventsHeader) +
                           "Z1,2008-09-13T01:00,2.5\n"
                           "Z1,2008-09-13T01:00\n"
                           "Z2,not-a-time,1.0\n"
                           "Z2,2008-09-13T02:00,abc\n";
  std::istringstream strict(text);
  try {
    read_event_csv(strict);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  std::istringstream lenient(text);
  const auto table = read_event_csv(lenient, ParseMode::lenient);
  EXPECT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.warnings.size(), 3u);
}

TEST(EventCsv, HeaderAndRegionChecks) {
  std::istringstream empty("");
  EXPECT_THROW(read_event_csv(empty), InputError);
  std::istringstream wrong("# stormqueue-counts v1, step_minutes=15, tz_offset_minutes=0\nregion,failure_time,duration_hours\n");
  EXPECT_THROW(read_event_csv(wrong), InputError);
  std::istringstream columns("# stormqueue-events v1, tz_offset_minutes=0\nregion,time,duration\n");
  EXPECT_THROW(read_event_csv(columns), InputError);
  const auto known = RegionPartition::from_ids({"Z1"});
  std::istringstream unknown(std::string(kEventsHeader) + "Z9,2008-09-13T01:00,2.5\n");
  EXPECT_THROW(read_event_csv(unknown, ParseMode::strict, &known), InputError);
  EXPECT_THROW(read_event_csv(temp_file("does_not_exist.csv")), InputError);
}

TEST(EventCsv, RoundTrip) {
  const auto spec = scenarios::ike_like(3);
  const auto ev = simulate_events(spec);
  EventTable table{-300, to_raw_events(ev, spec.grid.origin_minutes(), spec.partition), {}};
  std::stringstream buf;
  write_event_csv(buf, table);
  const auto back = read_event_csv(buf);
  EXPECT_EQ(back.tz_offset_minutes, -300);
  EXPECT_EQ(back.rows, table.rows);
  const auto events = to_events(back.rows, spec.grid.origin_minutes(), spec.partition);
  ASSERT_EQ(events.size(), ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    EXPECT_LE(std::abs(events[i].failure_time - ev[i].failure_time), 0.5 / 60.0 + 1e-12);
    EXPECT_NEAR(events[i].duration, ev[i].duration, 5e-7);
  }
}

TEST(EventCsv, UnknownRegionInConversion) {
  const std::vector<RawEvent> rows{{"Q", 0, 1.0}};
  EXPECT_THROW(to_events(rows, 0, RegionPartition::from_ids({"A"})), InputError);
  EXPECT_THROW(partition_of(std::vector<RawEvent>{}), InputError);
  EXPECT_EQ(partition_of(std::vector<RawEvent>{{"B", 0, 1}, {"A", 0, 1}, {"B", 1, 1}}).ids(),
            (std::vector<std::string>{"B", "A"}));
}

TEST(CountsCsv, RoundTrip) {
  const auto spec = scenarios::ike_like(4);
  const auto paths = build_counting_paths(simulate_events(spec), spec.grid, spec.partition);
  std::stringstream buf;
  write_counts_csv(buf, paths.active, -300);
  const auto back = read_counts_csv(buf);
  EXPECT_EQ(back.step_minutes, 15);
  ASSERT_TRUE(back.series);
  EXPECT_EQ(*back.series, paths.active);
}

TEST(CountsCsv, EmptyDataSection) {
  std::istringstream in(kCountsHeader);
  const auto t = read_counts_csv(in);
  EXPECT_FALSE(t.series);
}

TEST(CountsCsv, Rejections) {
  auto strict = [](const std::string& body) {
    std::istringstream in(std::string(kCountsHeader) + body);
    return read_counts_csv(in);
  };
  EXPECT_THROW(strict("2012-10-29T00:00,A,-1\n"), InputError);
  EXPECT_THROW(strict("2012-10-29T00:15,A,1\n2012-10-29T00:00,A,1\n"), InputError);
  EXPECT_THROW(strict("2012-10-29T00:00,A,1\n2012-10-29T00:20,A,1\n"), InputError);
  EXPECT_THROW(strict("2012-10-29T00:00,A,1\n2012-10-29T00:00,A,2\n"), InputError);
  EXPECT_THROW(strict("2012-10-29T00:00,A,1\n2012-10-29T00:15,B,1\n"), InputError);  // gaps
  EXPECT_THROW(strict("2012-10-29T00:00,A,1.5\n"), InputError);
  std::istringstream no_step("# stormqueue-counts v1, tz_offset_minutes=0\ntimestamp,region,count\n");
  EXPECT_THROW(read_counts_csv(no_step), InputError);
}

TEST(CountsCsv, LenientCarriesAndSkips) {
  std::istringstream in(std::string(kCountsHeader) +
                        "2012-10-29T00:00,A,1\n2012-10-29T00:00,B,4\n"
                        "2012-10-29T00:15,A,-3\n2012-10-29T00:15,B,5\n"
                        "2012-10-29T00:30,A,2\n2012-10-29T00:30,B,6\n");
  const auto t = read_counts_csv(in, ParseMode::lenient);
  ASSERT_TRUE(t.series);
  const auto a = t.series->counts(0);
  EXPECT_EQ(std::vector<std::int64_t>(a.begin(), a.end()), (std::vector<std::int64_t>{1, 1, 2}));
  EXPECT_EQ(t.warnings.size(), 2u);
}

TEST(RatesCsv, RoundTripIsExact) {
  const TimeGrid grid(parse_timestamp("2012-10-29T00:00", 0), 0.25, 50);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<std::vector<double>> v(2, std::vector<double>(50));
  for (auto& r : v) for (auto& x : r) x = u(rng);
  const RateSeries rates(grid, {"A", "B"}, v);
  std::stringstream buf;
  write_rates_csv(buf, rates, -240, "failure");
  const auto back = read_rates_csv(buf);
  EXPECT_EQ(back.kind, "failure");
  EXPECT_EQ(back.tz_offset_minutes, -240);
  ASSERT_TRUE(back.series);
  EXPECT_EQ(*back.series, rates);
}

TEST(RatesCsv, StepMustBeWholeMinutes) {
  EXPECT_EQ(step_minutes_of(TimeGrid(0, 0.25, 3)), 15);
  EXPECT_THROW(step_minutes_of(TimeGrid(0, 0.01, 3)), InputError);
}

TEST(ModelJson, RoundTrip) {
  const auto model = tables::psi_model();
  EXPECT_EQ(model_from_json(model_to_json(model)), model);
  const auto path = temp_file("model.json");
  std::ofstream(path) << model_to_json(model).dump(2);
  EXPECT_EQ(read_model_json(path), model);
}

TEST(ModelJson, Rejections) {
  auto doc = model_to_json(tables::psi_model());
  auto bad = doc;
  bad["version"] = 99;
  EXPECT_THROW(model_from_json(bad), InputError);
  bad = doc;
  bad["cells"][0]["region"] = "nowhere";
  EXPECT_THROW(model_from_json(bad), InputError);
  bad = doc;
  bad["cells"][0]["components"][0]["weight"] = 5.0;
  EXPECT_THROW(model_from_json(bad), InputError);
  bad = doc;
  bad["cells"].push_back(doc["cells"][0]);
  EXPECT_THROW(model_from_json(bad), InputError);
  bad = doc;
  bad.erase("interval_boundaries_hours");
  EXPECT_THROW(model_from_json(bad), InputError);
}
