#include <catch2/catch_amalgamated.hpp>

#include "wfr/stations.hpp"
#include "wfr/time.hpp"

using namespace wfr;
using namespace std::chrono;

TEST_CASE("timestamp parse and format round-trip") {
  for (const char* s : {"2019-09-27T03:40:00-05:00", "2019-09-27T08:40:00Z",
                        "2022-01-01T00:00:00+05:30"}) {
    Timestamp ts = parse_timestamp(s);
    CHECK(format_timestamp(ts) == s);
  }
}

TEST_CASE("offset arithmetic") {
  Timestamp ts = parse_timestamp("2019-09-27T03:40:00-05:00");
  CHECK(format_utc(ts.utc) == "2019-09-27T08:40:00Z");
  CHECK(date_to_yyyymmdd(ts.local_date()) == 20190927);
}

TEST_CASE("malformed timestamps are rejected") {
  for (const char* s : {"2019-09-27", "2019-13-27T03:40:00Z", "2019-09-27T03:40:00",
                        "not a time", "2019-09-31T00:00:00Z"}) {
    CHECK_THROWS_AS(parse_timestamp(s), Error);
  }
}

TEST_CASE("weekday names derive from the calendar") {
  CHECK(weekday_name(Date{year(2019), month(9), day(27)}) == "Friday");
  CHECK(weekday_name(Date{year(2019), month(9), day(28)}) == "Saturday");
  CHECK(weekday_name(Date{year(2022), month(1), day(1)}) == "Saturday");
  CHECK(weekday_index("friday") == 5u);
  CHECK(weekday_index("SUNDAY") == 0u);
  CHECK_FALSE(weekday_index("someday").has_value());
}

TEST_CASE("yyyymmdd helpers") {
  CHECK(yyyymmdd_string(20190927) == "20190927");
  auto d = yyyymmdd_to_date(20190927);
  REQUIRE(d.has_value());
  CHECK(date_to_yyyymmdd(*d) == 20190927);
  CHECK_FALSE(yyyymmdd_to_date(20191399).has_value());
  CHECK(date_to_yyyymmdd(add_days(*d, 3)) == 20190930);
}

TEST_CASE("US DST rules for the station zones") {
  TimeZone ny = zone_by_name("America/New_York");
  // 2021: DST began March 14, ended November 7.
  CHECK(ny.offset_at(parse_timestamp("2021-03-14T06:59:00Z").utc) == Minutes(-300));
  CHECK(ny.offset_at(parse_timestamp("2021-03-14T07:00:00Z").utc) == Minutes(-240));
  CHECK(ny.offset_at(parse_timestamp("2021-07-01T00:00:00Z").utc) == Minutes(-240));
  CHECK(ny.offset_at(parse_timestamp("2021-11-07T05:59:00Z").utc) == Minutes(-240));
  CHECK(ny.offset_at(parse_timestamp("2021-11-07T06:00:00Z").utc) == Minutes(-300));
  CHECK(ny.offset_at(parse_timestamp("2021-01-15T12:00:00Z").utc) == Minutes(-300));

  TimeZone az = zone_by_name("America/Phoenix");
  CHECK(az.offset_at(parse_timestamp("2021-07-01T00:00:00Z").utc) == Minutes(-420));
  TimeZone hi = zone_by_name("Pacific/Honolulu");
  CHECK(hi.offset_at(parse_timestamp("2021-07-01T00:00:00Z").utc) == Minutes(-600));
}

TEST_CASE("default station table covers the 31 offices") {
  const auto& t = StationTable::default_instance();
  CHECK(t.all().size() == 31);
  CHECK(t.at("ALY").city == "Albany, New York");
  CHECK(t.at("ALY").tz.name == "America/New_York");
  CHECK(t.at("HFO").tz.us_dst == false);
  CHECK(t.at("TFX").tz.name == "America/Denver");
  CHECK(t.find("XXX") == nullptr);
  std::map<std::string, int> regions;
  for (const auto& [code, s] : t.all()) regions[s.region]++;
  CHECK(regions["Northeast"] == 9);
  CHECK(regions["Northwest"] == 4);
  CHECK(regions["Southeast"] == 11);
  CHECK(regions["Southwest"] == 7);
}

TEST_CASE("shipped stations file matches the built-in table") {
  auto t = StationTable::load(std::string(WFR_SOURCE_DIR) + "/data/stations.json");
  CHECK(t.all().size() == StationTable::default_instance().all().size());
  for (const auto& [code, s] : t.all()) {
    const auto& d = StationTable::default_instance().at(code);
    CHECK(s.city == d.city);
    CHECK(s.tz.name == d.tz.name);
  }
}
