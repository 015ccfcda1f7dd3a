#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wfr/error.hpp"
#include "wfr/protocol.hpp"
#include "wfr/time.hpp"

namespace wfr {

using Json = nlohmann::ordered_json;

struct RawReport {
  std::string station;
  std::string city;
  Timestamp issued_at;
  std::string body;
};

struct DailyForecast {
  int date = 0;  // YYYYMMDD
  std::string weekday;
  std::string forecast;

  friend bool operator==(const DailyForecast&, const DailyForecast&) = default;
};

/// Weekday is always derived from the date, never taken from input.
inline DailyForecast make_daily_forecast(const Date& d, std::string forecast = "") {
  return DailyForecast{date_to_yyyymmdd(d), weekday_name(d), std::move(forecast)};
}

struct SegmentedReport {
  RawReport source;
  std::array<DailyForecast, 4> days{};
  int coverage = 0;
};

inline int count_coverage(const std::array<DailyForecast, 4>& days) {
  int n = 0;
  for (const auto& d : days)
    if (!d.forecast.empty()) ++n;
  return n;
}

struct DayAnnotation {
  int date = 0;  // YYYYMMDD
  std::set<Claim> claims;
  std::set<Aspect> aspects;

  friend bool operator==(const DayAnnotation&, const DayAnnotation&) = default;
};

struct InstanceRecord {
  std::string id;
  std::string station;
  std::string city;
  Timestamp time;
  std::vector<std::string> image_refs;
  SegmentedReport segmented;
  std::vector<DayAnnotation> annotations;
};

// ---------------------------------------------------------------------------
// JSON wire forms

inline Json to_json(const RawReport& r) {
  return Json{{"station", r.station},
              {"city", r.city},
              {"issued_at", format_timestamp(r.issued_at)},
              {"body", r.body}};
}

inline RawReport raw_report_from_json(const Json& j) {
  RawReport r;
  r.station = j.at("station").get<std::string>();
  r.city = j.value("city", "");
  r.issued_at = parse_timestamp(j.at("issued_at").get<std::string>());
  r.body = j.at("body").get<std::string>();
  require(!r.body.empty(), Errc::parse_error, "empty report body");
  return r;
}

inline Json to_json(const DailyForecast& d) {
  return Json{{"date", yyyymmdd_string(d.date)}, {"weekday", d.weekday}, {"forecast", d.forecast}};
}

inline DailyForecast daily_forecast_from_json(const Json& j) {
  std::string ds = j.at("date").is_string() ? j.at("date").get<std::string>()
                                            : std::to_string(j.at("date").get<long>());
  int v = 0;
  for (char c : ds) {
    require(c >= '0' && c <= '9', Errc::parse_error, "bad date " + ds);
    v = v * 10 + (c - '0');
  }
  auto date = yyyymmdd_to_date(v);
  require(date.has_value(), Errc::parse_error, "invalid calendar date " + ds);
  return make_daily_forecast(*date, j.value("forecast", std::string{}));
}

inline Json to_json(const SegmentedReport& s) {
  Json days = Json::array();
  for (const auto& d : s.days) days.push_back(to_json(d));
  return Json{{"station", s.source.station},
              {"city", s.source.city},
              {"issued_at", format_timestamp(s.source.issued_at)},
              {"daily_forecast", days},
              {"coverage", s.coverage}};
}

inline SegmentedReport segmented_report_from_json(const Json& j) {
  SegmentedReport s;
  s.source.station = j.value("station", "");
  s.source.city = j.value("city", "");
  if (j.contains("issued_at")) s.source.issued_at = parse_timestamp(j.at("issued_at").get<std::string>());
  if (j.contains("body")) s.source.body = j.at("body").get<std::string>();
  const auto& arr = j.at("daily_forecast");
  require(arr.is_array() && arr.size() == 4, Errc::parse_error, "daily_forecast must have 4 days");
  for (size_t i = 0; i < 4; ++i) s.days[i] = daily_forecast_from_json(arr[i]);
  s.coverage = count_coverage(s.days);
  return s;
}

inline Json to_json(const DayAnnotation& a) {
  Json claims = Json::array();
  for (Claim c : a.claims) claims.push_back(std::string(wire_name(c)));
  Json aspects = Json::array();
  for (Aspect x : a.aspects) aspects.push_back(std::string(wire_name(x)));
  return Json{{"date", yyyymmdd_string(a.date)}, {"claims", claims}, {"aspects", aspects}};
}

inline DayAnnotation day_annotation_from_json(const Json& j) {
  DayAnnotation a;
  if (j.contains("date")) {
    std::string ds = j.at("date").is_string() ? j.at("date").get<std::string>()
                                              : std::to_string(j.at("date").get<long>());
    a.date = std::stoi(ds);
  }
  for (const auto& c : j.value("claims", Json::array())) {
    auto claim = parse_claim(c.get<std::string>());
    if (!claim) fail(Errc::schema_error, "unknown claim " + c.get<std::string>());
    a.claims.insert(*claim);
  }
  for (const auto& x : j.value("aspects", Json::array())) {
    auto aspect = parse_aspect(x.get<std::string>());
    if (!aspect) fail(Errc::schema_error, "unknown aspect " + x.get<std::string>());
    a.aspects.insert(*aspect);
  }
  return a;
}

inline Json to_json(const InstanceRecord& r) {
  Json days = Json::array();
  for (const auto& d : r.segmented.days) days.push_back(to_json(d));
  Json anns = Json::array();
  for (const auto& a : r.annotations) anns.push_back(to_json(a));
  return Json{{"id", r.id},
              {"station", r.station},
              {"city", r.city},
              {"time", format_timestamp(r.time)},
              {"image_refs", r.image_refs},
              {"daily_forecast", days},
              {"annotations", anns}};
}

inline InstanceRecord instance_from_json(const Json& j, size_t expected_images = 12) {
  InstanceRecord r;
  r.id = j.at("id").get<std::string>();
  r.station = j.value("station", "");
  r.city = j.value("city", "");
  if (j.contains("time")) r.time = parse_timestamp(j.at("time").get<std::string>());
  for (const auto& p : j.value("image_refs", Json::array()))
    r.image_refs.push_back(p.get<std::string>());
  require(r.image_refs.size() == expected_images, Errc::parse_error,
          "instance " + r.id + ": expected " + std::to_string(expected_images) + " image refs, got " +
              std::to_string(r.image_refs.size()));
  const auto& arr = j.at("daily_forecast");
  require(arr.is_array() && arr.size() == 4, Errc::parse_error, "daily_forecast must have 4 days");
  for (size_t i = 0; i < 4; ++i) r.segmented.days[i] = daily_forecast_from_json(arr[i]);
  r.segmented.source.station = r.station;
  r.segmented.source.city = r.city;
  r.segmented.source.issued_at = r.time;
  r.segmented.coverage = count_coverage(r.segmented.days);
  for (const auto& a : j.value("annotations", Json::array()))
    r.annotations.push_back(day_annotation_from_json(a));
  require(r.annotations.empty() || r.annotations.size() == 4, Errc::parse_error,
          "annotations must cover the 4 days");
  return r;
}

}  // namespace wfr
