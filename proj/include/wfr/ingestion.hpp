#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wfr/error.hpp"
#include "wfr/report.hpp"
#include "wfr/stations.hpp"
#include "wfr/time.hpp"

namespace wfr {

struct FetchOptions {
  int retry_budget = 2;
  int backoff_base_ms = 200;
  std::filesystem::path cache_dir;  // empty: no product cache
};

inline std::string cache_filename(const RawReport& r) {
  return r.station + "_" + format_utc_compact(r.issued_at.utc) + ".txt";
}

/// Pull archived products for one station and date range. The endpoint
/// answers GET /afos?station=XXX&start=YYYY-MM-DD&end=YYYY-MM-DD with a JSON
/// array of {station, issued_at_utc, body[, city]} objects.
inline std::vector<RawReport> fetch_reports(const std::string& station, const Date& start,
                                            const Date& end, const std::string& endpoint,
                                            const StationTable& stations,
                                            const FetchOptions& opts = {}) {
  const Station& meta = stations.at(station);
  require(SysDays(start) <= SysDays(end), Errc::precondition, "empty date range");

  auto date_str = [](const Date& d) { return format_civil(SysDays(d)).substr(0, 10); };
  std::string path =
      "/afos?station=" + station + "&start=" + date_str(start) + "&end=" + date_str(end);

  httplib::Result res;
  int attempts = 0;
  while (true) {
    ++attempts;
    httplib::Client client(endpoint);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    res = client.Get(path);
    bool transient = !res || res->status == 429 || res->status >= 500;
    if (!transient || attempts > opts.retry_budget) break;
    std::this_thread::sleep_for(
        std::chrono::milliseconds(opts.backoff_base_ms * (1 << (attempts - 1))));
  }
  if (!res)
    fail(Errc::network_error,
         "archive unreachable after " + std::to_string(attempts) + " attempts");
  if (res->status != 200)
    fail(Errc::network_error, "archive returned HTTP " + std::to_string(res->status) + " after " +
                                  std::to_string(attempts) + " attempts");

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, std::string("archive reply is not JSON: ") + e.what());
  }
  require(doc.is_array(), Errc::parse_error, "archive reply must be a list of products");

  std::vector<RawReport> reports;
  for (const auto& item : doc) {
    RawReport r;
    try {
      r.station = item.value("station", station);
      r.body = item.at("body").get<std::string>();
      Timestamp utc = parse_timestamp(item.at("issued_at_utc").get<std::string>());
      r.issued_at = meta.tz.to_local(utc.utc);
      r.city = item.value("city", meta.city);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::parse_error, std::string("malformed product: ") + e.what());
    }
    require(!r.body.empty(), Errc::parse_error, "product with empty body");
    require(r.station == station, Errc::parse_error, "product for foreign station " + r.station);
    reports.push_back(std::move(r));
  }
  std::sort(reports.begin(), reports.end(),
            [](const RawReport& a, const RawReport& b) { return a.issued_at < b.issued_at; });

  if (!opts.cache_dir.empty()) {
    std::filesystem::create_directories(opts.cache_dir);
    for (const auto& r : reports) {
      std::ofstream out(opts.cache_dir / cache_filename(r));
      out << r.body;
    }
  }
  return reports;
}

/// Keep at most one report per local calendar day (the first one at or after
/// local midnight), then drop the later of two survivors issued less than
/// six hours apart across a day boundary.
inline std::vector<RawReport> dedup_daily(std::span<const RawReport> reports) {
  if (reports.empty()) return {};
  for (const auto& r : reports)
    require(r.station == reports.front().station, Errc::mixed_stations,
            reports.front().station + " vs " + r.station);

  std::vector<RawReport> sorted(reports.begin(), reports.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const RawReport& a, const RawReport& b) { return a.issued_at < b.issued_at; });

  std::map<int, RawReport> per_day;  // morning report per local day
  for (const auto& r : sorted) {
    int day = date_to_yyyymmdd(r.issued_at.local_date());
    per_day.emplace(day, r);  // first = earliest, later ones ignored
  }

  std::vector<RawReport> kept;
  for (auto& [day, r] : per_day) {
    if (!kept.empty() && r.issued_at.utc - kept.back().issued_at.utc < std::chrono::hours(6))
      continue;
    kept.push_back(std::move(r));
  }
  return kept;
}

struct AlignmentRecord {
  std::string station;
  SysSeconds era5_utc{};
  Timestamp report_local_issue;
  bool matched = false;
};

/// ERA5 slots lie on the 6-hour UTC grid. A report pairs with the slot whose
/// local wall time precedes issuance by less than three hours; when no slot
/// qualifies the record keeps the latest slot at or before issuance,
/// unmatched.
inline AlignmentRecord align_era5(const RawReport& report, const TimeZone& tz) {
  using namespace std::chrono;
  AlignmentRecord rec;
  rec.station = report.station;
  rec.report_local_issue = report.issued_at;

  SysSeconds issue_local = report.issued_at.local();
  auto base = floor<days>(report.issued_at.utc) - days(1);
  SysSeconds best_before{};
  bool have_before = false;
  for (int k = 0; k <= 11; ++k) {
    SysSeconds slot = base + hours(6 * k);
    SysSeconds slot_local = slot + tz.offset_at(slot);
    auto gap = issue_local - slot_local;
    if (gap >= seconds(0)) {
      best_before = slot;
      have_before = true;
    }
    if (gap >= seconds(0) && gap < hours(3)) {
      rec.era5_utc = slot;
      rec.matched = true;
      return rec;
    }
  }
  rec.era5_utc = have_before ? best_before : base;
  rec.matched = false;
  return rec;
}

}  // namespace wfr
