#pragma once

// Shared worked-example fixture: a four-day synopsis issued Friday
// 2019-09-27 and its reference daily split / claim labels.

#include <array>
#include <string>
#include <vector>

#include "wfr/claims.hpp"
#include "wfr/report.hpp"

namespace fixtures {

inline const char* kSynopsisBody =
    "A high pressure ridge over New England will bring mainly fair and cool weather tonight. "
    "On Saturday, a warm front followed by a cold front will bring a threat of showers and "
    "thunderstorms. On Sunday, high pressure building in from Ontario will bring fair and cool "
    "weather. Monday will start out fair, but an approaching warm front may bring a few showers "
    "late in the day.";

inline wfr::RawReport synopsis_report() {
  wfr::RawReport r;
  r.station = "ALY";
  r.city = "Albany, New York";
  r.issued_at = wfr::parse_timestamp("2019-09-27T03:40:00-04:00");
  r.body = kSynopsisBody;
  return r;
}

// The reference split rewrites the Saturday/Sunday sentences without their
// leading day phrase and keeps the rest verbatim.
inline std::array<std::string, 4> reference_day_texts() {
  return {
      "A high pressure ridge over New England will bring mainly fair and cool weather tonight.",
      "A warm front followed by a cold front will bring a threat of showers and thunderstorms.",
      "High pressure building in from Ontario will bring fair and cool weather.",
      "Monday will start out fair, but an approaching warm front may bring a few showers late in "
      "the day.",
  };
}

inline std::string reference_segmentation_reply() {
  auto texts = reference_day_texts();
  wfr::Json days = wfr::Json::array();
  const char* dates[] = {"20190927", "20190928", "20190929", "20190930"};
  const char* weekdays[] = {"Friday", "Saturday", "Sunday", "Monday"};
  for (int i = 0; i < 4; ++i)
    days.push_back(wfr::Json{{"date", dates[i]}, {"weekday", weekdays[i]}, {"forecast", texts[size_t(i)]}});
  return wfr::Json{{"daily_forecast", days}}.dump(2);
}

// Synthetic instance whose four covered days carry distinct claim sets.
inline wfr::InstanceRecord synthetic_instance(const std::string& id = "inst-1") {
  using namespace wfr;
  InstanceRecord inst;
  inst.id = id;
  inst.station = "ALY";
  inst.city = "Albany, New York";
  inst.time = parse_timestamp("2021-06-04T03:40:00-04:00");
  for (int k = 0; k < 12; ++k) inst.image_refs.push_back("images/" + id + "_" + std::to_string(k) + ".png");
  const char* texts[4] = {
      "Showers and thunderstorms today.",
      "Gusty winds with snow showers.",
      "High pressure brings cool weather.",
      "A warm front arrives with rain.",
  };
  Date issue = inst.time.local_date();
  for (int d = 0; d < 4; ++d)
    inst.segmented.days[size_t(d)] = make_daily_forecast(add_days(issue, d), texts[d]);
  inst.segmented.source.station = inst.station;
  inst.segmented.source.city = inst.city;
  inst.segmented.source.issued_at = inst.time;
  inst.segmented.coverage = count_coverage(inst.segmented.days);
  const auto& protocol = AnnotationProtocol::default_instance();
  for (int d = 0; d < 4; ++d)
    inst.annotations.push_back(extract_rule_based(inst.segmented.days[size_t(d)], protocol));
  return inst;
}

// Alternative phrasings that re-annotate to the same claims per day.
inline std::array<std::vector<std::string>, 4> equivalent_day_texts() {
  return {{
      {"Thunderstorms with rain showers develop.", "Drizzle and storms around."},
      {"Blustery with flurries.", "High winds and snowfall expected."},
      {"The high builds with colder air.", "High pressure and below normal temperatures."},
      {"Warm front lifts north bringing drizzle.", "A warm front with rainfall."},
  }};
}

inline std::array<wfr::DayAnnotation, 4> reference_annotations() {
  using wfr::Aspect;
  using wfr::Claim;
  std::array<wfr::DayAnnotation, 4> out;
  out[0].date = 20190927;
  out[0].claims = {Claim::CoolCold, Claim::HighPressure};
  out[0].aspects = {Aspect::Temperature, Aspect::PressureSystem};
  out[1].date = 20190928;
  out[1].claims = {Claim::ColdFront, Claim::WarmFront, Claim::Precipitation, Claim::Storm};
  out[1].aspects = {Aspect::FrontalSystem, Aspect::Event};
  out[2].date = 20190929;
  out[2].claims = {Claim::CoolCold, Claim::HighPressure};
  out[2].aspects = {Aspect::Temperature, Aspect::PressureSystem};
  out[3].date = 20190930;
  out[3].claims = {Claim::WarmFront, Claim::Precipitation};
  out[3].aspects = {Aspect::FrontalSystem, Aspect::Event};
  return out;
}

}  // namespace fixtures
