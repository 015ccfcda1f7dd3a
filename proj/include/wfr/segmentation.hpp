#pragma once

#include <array>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wfr/error.hpp"
#include "wfr/report.hpp"
#include "wfr/text.hpp"
#include "wfr/time.hpp"

namespace wfr {

struct TimelineAnchor {
  std::string mention;
  size_t begin = 0;
  size_t end = 0;
  int date = 0;  // YYYYMMDD
};

namespace detail {

inline bool word_boundary(std::string_view body, size_t begin, size_t end) {
  bool left_ok = begin == 0 || !is_word_char(body[begin - 1]);
  bool right_ok = end >= body.size() || !is_word_char(body[end]);
  return left_ok && right_ok;
}

}  // namespace detail

/// Relative day expressions resolved against the local issue date. Weekday
/// names resolve to the next occurrence at or after the issue date; today,
/// tonight and this-morning/afternoon/evening stay on the issue date.
inline std::vector<TimelineAnchor> detect_anchors(std::string_view body,
                                                  const Timestamp& issue_local) {
  struct Pattern {
    std::string text;
    int kind;  // 0 = issue date, 1 = tomorrow, 2 = weekday
    unsigned weekday = 0;
  };
  static const std::vector<Pattern> patterns = [] {
    std::vector<Pattern> p{
        {"this morning", 0}, {"this afternoon", 0}, {"this evening", 0},
        {"tonight", 0},      {"today", 0},          {"tomorrow", 1},
    };
    const char* days[] = {"sunday", "monday",  "tuesday", "wednesday",
                          "thursday", "friday", "saturday"};
    for (unsigned i = 0; i < 7; ++i) p.push_back({days[i], 2, i});
    return p;
  }();

  std::string low = to_lower(body);
  Date issue = issue_local.local_date();
  unsigned issue_dow = std::chrono::weekday(SysDays(issue)).c_encoding();

  std::vector<TimelineAnchor> anchors;
  std::set<size_t> taken;  // starts already claimed by a longer mention
  for (const auto& pat : patterns) {
    size_t pos = 0;
    while ((pos = low.find(pat.text, pos)) != std::string::npos) {
      size_t end = pos + pat.text.size();
      if (detail::word_boundary(low, pos, end) && !taken.count(pos)) {
        Date resolved = issue;
        if (pat.kind == 1) resolved = add_days(issue, 1);
        if (pat.kind == 2) resolved = add_days(issue, int((pat.weekday + 7 - issue_dow) % 7));
        anchors.push_back({std::string(body.substr(pos, pat.text.size())), pos, end,
                           date_to_yyyymmdd(resolved)});
        for (size_t i = pos; i < end; ++i) taken.insert(i);
      }
      pos = end;
    }
  }
  std::sort(anchors.begin(), anchors.end(),
            [](const TimelineAnchor& a, const TimelineAnchor& b) { return a.begin < b.begin; });
  return anchors;
}

/// Produces the per-day forecast texts for the four slots.
class SegmenterBackend {
 public:
  virtual ~SegmenterBackend() = default;
  virtual std::array<std::string, 4> day_texts(const RawReport& report,
                                               std::span<const TimelineAnchor> anchors,
                                               const std::array<DailyForecast, 4>& skeleton) = 0;
};

/// Deterministic fallback: each sentence goes to the date of its first
/// contained anchor, else its nearest preceding anchor, else the issue date.
class RuleBasedSegmenter : public SegmenterBackend {
 public:
  std::array<std::string, 4> day_texts(const RawReport& report,
                                       std::span<const TimelineAnchor> anchors,
                                       const std::array<DailyForecast, 4>& skeleton) override {
    std::array<std::string, 4> texts;
    for (const auto& sp : split_sentences(report.body)) {
      int date = 0;
      bool found = false;
      for (const auto& a : anchors) {  // first anchor inside the sentence
        if (a.begin >= sp.begin && a.begin < sp.end) {
          date = a.date;
          found = true;
          break;
        }
      }
      if (!found) {  // nearest preceding anchor
        for (const auto& a : anchors) {
          if (a.begin < sp.begin) {
            date = a.date;
            found = true;
          }
        }
      }
      if (!found) date = skeleton[0].date;
      for (size_t d = 0; d < 4; ++d) {
        if (skeleton[d].date == date) {
          std::string sentence = trim(report.body.substr(sp.begin, sp.end - sp.begin));
          if (!texts[d].empty()) texts[d] += " ";
          texts[d] += sentence;
          break;
        }
      }
      // sentences anchored past the four-day horizon are dropped
    }
    return texts;
  }
};

inline std::string build_segmentation_system_prompt(const std::array<DailyForecast, 4>& skeleton) {
  Json tmpl = Json::array();
  for (const auto& d : skeleton)
    tmpl.push_back(Json{{"date", yyyymmdd_string(d.date)}, {"weekday", d.weekday}, {"forecast", ""}});
  std::string p;
  p += "You are an expert meteorological forecaster. Your task is to extract structured daily "
       "forecast information from the user's text.\n\n";
  p += "### STRICT RULES\n\n";
  p += "- Use ONLY the factual content provided in the original forecast.\n";
  p += "- DO NOT introduce new facts.\n";
  p += "- DO NOT guess missing information.\n";
  p += "- For any day where no explicit forecast is present, return an empty string.\n";
  p += "- Output MUST be valid JSON with the EXACT structure shown below.\n";
  p += "- Do NOT include commentary, explanation, or any text outside the JSON.\n";
  p += "- When splitting or extracting forecast content, **each output must be a complete, "
       "grammatically correct sentence.**\n";
  p += "- **Do NOT drop the subject or any essential clause** from the original sentence.\n";
  p += "- **Do NOT output sentence fragments. Every extracted entry must retain the original "
       "meaning and sentence structure.**\n";
  p += "- **If one sentence contains multiple time-specific clauses, you must split them into "
       "separate complete sentences, each with a proper subject.**\n\n";
  p += "### EXAMPLE OF REQUIRED SPLITTING\n\n";
  p += "Original: A cold front approaches the region from the west on Wednesday and likely stalls "
       "or washes out over the area into Thursday.\n";
  p += "Correct split:\n";
  p += "1. A cold front approaches the region from the west on Wednesday.\n";
  p += "2. The cold front washes out over the area into Thursday.\n\n";
  p += "### REQUIRED JSON OUTPUT FORMAT\n\n";
  p += Json{{"daily_forecast", tmpl}}.dump(2) + "\n";
  return p;
}

inline std::string build_segmentation_user_prompt(const RawReport& report) {
  return "Extract the corresponding forecast content for each date from the text below.\n"
         "ORIGINAL FORECAST TEXT:\n\n" +
         report.body + "\n\nReturn ONLY the JSON. No explanations.\n";
}

/// Model-backed segmentation; `chat` maps (system, user) to the reply text.
class LlmSegmenter : public SegmenterBackend {
 public:
  explicit LlmSegmenter(std::function<std::string(const std::string&, const std::string&)> chat)
      : chat_(std::move(chat)) {}

  std::array<std::string, 4> day_texts(const RawReport& report,
                                       std::span<const TimelineAnchor> /*anchors*/,
                                       const std::array<DailyForecast, 4>& skeleton) override {
    std::string reply;
    try {
      reply = chat_(build_segmentation_system_prompt(skeleton),
                    build_segmentation_user_prompt(report));
    } catch (const std::exception& e) {
      fail(Errc::backend_error, e.what());
    }
    return parse_reply(reply, skeleton);
  }

 private:
  static std::array<std::string, 4> parse_reply(const std::string& reply,
                                                const std::array<DailyForecast, 4>& skeleton) {
    std::string body = trim(reply);
    if (body.rfind("```", 0) == 0) {
      size_t nl = body.find('\n');
      size_t fence = body.rfind("```");
      if (nl != std::string::npos && fence > nl) body = trim(body.substr(nl + 1, fence - nl - 1));
    }
    Json doc;
    try {
      doc = Json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::backend_error, std::string("segmenter reply is not JSON: ") + e.what());
    }
    if (doc.is_object() && doc.contains("daily_forecast")) doc = doc["daily_forecast"];
    require(doc.is_array(), Errc::backend_error, "segmenter reply has no daily_forecast list");
    std::array<std::string, 4> texts;
    size_t pos = 0;
    for (const auto& entry : doc) {
      std::string forecast = entry.value("forecast", std::string{});
      std::string date = entry.value("date", std::string{});
      bool placed = false;
      for (size_t d = 0; d < 4; ++d) {
        if (yyyymmdd_string(skeleton[d].date) == date) {
          texts[d] = forecast;
          placed = true;
          break;
        }
      }
      if (!placed && pos < 4) texts[pos] = forecast;  // fall back to position
      ++pos;
    }
    return texts;
  }

  std::function<std::string(const std::string&, const std::string&)> chat_;
};

/// Four date-anchored slots starting at the local issue date, filled by the
/// chosen backend.
inline SegmentedReport segment(const RawReport& report, std::span<const TimelineAnchor> anchors,
                               SegmenterBackend& backend) {
  SegmentedReport seg;
  seg.source = report;
  Date issue = report.issued_at.local_date();
  for (int d = 0; d < 4; ++d) seg.days[size_t(d)] = make_daily_forecast(add_days(issue, d));
  auto texts = backend.day_texts(report, anchors, seg.days);
  for (size_t d = 0; d < 4; ++d) seg.days[d].forecast = trim(texts[d]);
  seg.coverage = count_coverage(seg.days);
  if (seg.coverage == 0) fail(Errc::no_coverage, "all four days empty");
  return seg;
}

/// Keep reports covering at least three of the first four days.
inline bool coverage_filter(const SegmentedReport& seg) { return seg.coverage >= 3; }

struct VerificationResult {
  std::array<bool, 4> substring_ok{true, true, true, true};
  std::array<bool, 4> dates_ok{true, true, true, true};
  bool passed = true;
};

/// Word-level containment check: at least 90% of a day's content words must
/// occur in the original body (sentence-completion edits keep the original
/// vocabulary), and each day's date must be the issue date or an anchor date.
inline VerificationResult verify(const RawReport& original, const SegmentedReport& seg,
                                 std::span<const TimelineAnchor> anchors) {
  VerificationResult vr;
  std::set<std::string> body_words;
  for (auto& t : tokenize(original.body)) body_words.insert(std::move(t));
  std::set<int> known_dates{date_to_yyyymmdd(original.issued_at.local_date())};
  for (const auto& a : anchors) known_dates.insert(a.date);

  for (size_t d = 0; d < 4; ++d) {
    const auto& day = seg.days[d];
    if (day.forecast.empty()) continue;
    auto words = tokenize(day.forecast);
    size_t present = 0;
    for (const auto& w : words) present += body_words.count(w);
    vr.substring_ok[d] = !words.empty() && double(present) >= 0.9 * double(words.size());
    vr.dates_ok[d] = known_dates.count(day.date) > 0;
    vr.passed = vr.passed && vr.substring_ok[d] && vr.dates_ok[d];
  }
  return vr;
}

inline Json to_json(const VerificationResult& vr) {
  return Json{{"substring_ok", vr.substring_ok}, {"dates_ok", vr.dates_ok}, {"passed", vr.passed}};
}

}  // namespace wfr
