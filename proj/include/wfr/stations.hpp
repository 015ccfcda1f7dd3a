#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "wfr/error.hpp"
#include "wfr/time.hpp"

namespace wfr {

struct Station {
  std::string code;
  std::string city;
  std::string region;
  TimeZone tz;
};

inline TimeZone zone_by_name(std::string_view name) {
  using std::chrono::minutes;
  if (name == "America/New_York") return {"America/New_York", minutes(-300), true};
  if (name == "America/Chicago") return {"America/Chicago", minutes(-360), true};
  if (name == "America/Denver") return {"America/Denver", minutes(-420), true};
  if (name == "America/Phoenix") return {"America/Phoenix", minutes(-420), false};
  if (name == "America/Los_Angeles") return {"America/Los_Angeles", minutes(-480), true};
  if (name == "Pacific/Honolulu") return {"Pacific/Honolulu", minutes(-600), false};
  fail(Errc::config_error, "unknown timezone " + std::string(name));
}

/// The 31 forecast offices the corpus covers, keyed by AFOS code.
class StationTable {
 public:
  static StationTable from_json(const nlohmann::ordered_json& doc) {
    StationTable t;
    for (const auto& [code, meta] : doc.items()) {
      Station s;
      s.code = code;
      s.city = meta.at("city").get<std::string>();
      s.region = meta.value("region", "");
      s.tz = zone_by_name(meta.at("tz").get<std::string>());
      t.stations_.emplace(code, std::move(s));
    }
    return t;
  }

  static StationTable load(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), Errc::io_error, "cannot open " + path.string());
    nlohmann::ordered_json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::parse_error, path.string() + ": " + e.what());
    }
    return from_json(doc);
  }

  static const StationTable& default_instance();

  const Station* find(const std::string& code) const {
    auto it = stations_.find(code);
    return it == stations_.end() ? nullptr : &it->second;
  }

  const Station& at(const std::string& code) const {
    const Station* s = find(code);
    if (!s) fail(Errc::config_error, "unknown station " + code);
    return *s;
  }

  const std::map<std::string, Station>& all() const { return stations_; }

 private:
  std::map<std::string, Station> stations_;
};

inline constexpr std::string_view kDefaultStationsJson = R"json({
  "ALY": {"city": "Albany, New York", "region": "Northeast", "tz": "America/New_York"},
  "BGM": {"city": "Binghamton, New York", "region": "Northeast", "tz": "America/New_York"},
  "BOX": {"city": "Boston, Massachusetts", "region": "Northeast", "tz": "America/New_York"},
  "BTV": {"city": "Burlington, Vermont", "region": "Northeast", "tz": "America/New_York"},
  "BUF": {"city": "Buffalo, New York", "region": "Northeast", "tz": "America/New_York"},
  "CAR": {"city": "Caribou, Maine", "region": "Northeast", "tz": "America/New_York"},
  "CLE": {"city": "Cleveland, Ohio", "region": "Northeast", "tz": "America/New_York"},
  "CTP": {"city": "State College, Pennsylvania", "region": "Northeast", "tz": "America/New_York"},
  "GYX": {"city": "Portland, Maine", "region": "Northeast", "tz": "America/New_York"},
  "OTX": {"city": "Spokane, Washington", "region": "Northwest", "tz": "America/Los_Angeles"},
  "PQR": {"city": "Portland, Oregon", "region": "Northwest", "tz": "America/Los_Angeles"},
  "SEW": {"city": "Seattle, Washington", "region": "Northwest", "tz": "America/Los_Angeles"},
  "TFX": {"city": "Great Falls, Montana", "region": "Northwest", "tz": "America/Denver"},
  "AKQ": {"city": "Wakefield, Virginia", "region": "Southeast", "tz": "America/New_York"},
  "CAE": {"city": "Columbia, South Carolina", "region": "Southeast", "tz": "America/New_York"},
  "GSP": {"city": "Greer, South Carolina", "region": "Southeast", "tz": "America/New_York"},
  "ILM": {"city": "Wilmington, North Carolina", "region": "Southeast", "tz": "America/New_York"},
  "ILN": {"city": "Wilmington, Ohio", "region": "Southeast", "tz": "America/New_York"},
  "LWX": {"city": "Sterling, Virginia", "region": "Southeast", "tz": "America/New_York"},
  "MHX": {"city": "Newport, North Carolina", "region": "Southeast", "tz": "America/New_York"},
  "PHI": {"city": "Mt. Holly, New Jersey", "region": "Southeast", "tz": "America/New_York"},
  "RAH": {"city": "Raleigh, North Carolina", "region": "Southeast", "tz": "America/New_York"},
  "RLX": {"city": "Charleston, West Virginia", "region": "Southeast", "tz": "America/New_York"},
  "RNK": {"city": "Blacksburg, Virginia", "region": "Southeast", "tz": "America/New_York"},
  "ABQ": {"city": "Albuquerque, New Mexico", "region": "Southwest", "tz": "America/Denver"},
  "FGZ": {"city": "Flagstaff, Arizona", "region": "Southwest", "tz": "America/Phoenix"},
  "HFO": {"city": "Honolulu, Hawaii", "region": "Southwest", "tz": "Pacific/Honolulu"},
  "LOX": {"city": "Los Angeles, California", "region": "Southwest", "tz": "America/Los_Angeles"},
  "MTR": {"city": "San Francisco Bay Area, California", "region": "Southwest", "tz": "America/Los_Angeles"},
  "SGX": {"city": "San Diego, California", "region": "Southwest", "tz": "America/Los_Angeles"},
  "VEF": {"city": "Las Vegas, Nevada", "region": "Southwest", "tz": "America/Los_Angeles"}
})json";

inline const StationTable& StationTable::default_instance() {
  static const StationTable instance =
      from_json(nlohmann::ordered_json::parse(kDefaultStationsJson));
  return instance;
}

}  // namespace wfr
