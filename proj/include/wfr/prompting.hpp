#pragma once

#include <array>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include "wfr/error.hpp"
#include "wfr/protocol.hpp"
#include "wfr/report.hpp"
#include "wfr/time.hpp"

namespace wfr {

/// The 12 single-level variables, in the order their heatmaps are attached.
inline const std::vector<std::pair<std::string, std::string>>& default_variable_table() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"land sea mask", "The proportion of land, as opposed to ocean or inland waters."},
      {"10m u component of wind",
       "The eastward component of the 10m wind. It is the horizontal speed of air moving towards "
       "the east, at a height of ten metres above the surface of the Earth."},
      {"10m v component of wind",
       "The northward component of the 10m wind. It is the horizontal speed of air moving towards "
       "the north, at a height of ten metres above the surface of the Earth."},
      {"2m temperature",
       "The temperature of air at 2m above the surface of land, sea or in-land waters."},
      {"mean sea level pressure",
       "The pressure of the atmosphere adjusted to the height of mean sea level."},
      {"sea surface temperature", "The temperature of sea water near the surface."},
      {"snow depth", "The depth of snow from the snow-covered area."},
      {"surface pressure",
       "The pressure of the atmosphere on the surface of land, sea and in-land water."},
      {"total cloud cover", "The proportion of a grid box area covered by cloud."},
      {"total precipitation 6hr", "The total precipitation over the past 6 hours."},
      {"total column water vapour",
       "The total amount of water vapour in a vertical column of the atmosphere, from the surface "
       "to the top of the atmosphere."},
      {"total column water",
       "The total amount of liquid water in a vertical column of the atmosphere."},
  };
  return table;
}

struct FewShotExample {
  std::string city;
  int year = 0;
  int month = 0;
  std::string input;
  std::string answer;
};

struct FocusDay {
  int date = 0;  // YYYYMMDD
  std::string weekday;
  std::vector<Aspect> focus;
};

struct PromptSpec {
  std::string city;
  Timestamp issue_time;
  std::array<FocusDay, 4> days;
  std::vector<std::pair<std::string, std::string>> variables = default_variable_table();
  std::vector<FewShotExample> few_shot;
};

struct PromptBundle {
  std::string system;
  std::string user;
  std::vector<std::string> images;
  std::vector<std::string> warnings;

  std::string render() const { return system + "\n\n" + user; }

  Json to_json() const {
    return Json{{"system", system}, {"user", user}, {"images", images}};
  }
};

inline std::string day_marker(int date, const std::string& weekday) {
  return "<<" + yyyymmdd_string(date) + ", " + weekday + ">> Report:";
}

inline std::string focus_line(std::span<const Aspect> aspects) {
  std::string line = "## Focus on: ";
  for (size_t i = 0; i < aspects.size(); ++i) {
    if (i) line += ", ";
    line += display_name(aspects[i]);
  }
  return line + " ##";
}

/// Canonical structured rendering: one date marker per day, the forecast
/// body below it, a blank line between days.
inline std::string render_structured(std::span<const DailyForecast> days) {
  std::string out;
  for (const auto& d : days) {
    out += day_marker(d.date, d.weekday);
    out += "\n";
    out += d.forecast;
    out += "\n\n";
  }
  return out;
}

/// Generation prompt: system persona plus a user block holding the encoded
/// parameters, optional few-shot examples and the per-day report template
/// with optional aspect constraints.
inline PromptBundle build_generation_prompt(const PromptSpec& spec, bool aspect_control) {
  if (aspect_control)
    for (const auto& d : spec.days)
      require(!d.focus.empty(), Errc::precondition,
              "aspect control needs focus aspects for every day");

  PromptBundle bundle;
  bundle.system =
      "As an AI assistant with expertise in severe weather analysis and forecasting, you are "
      "equipped to interpret comprehensive figures that illustrate various weather variables "
      "crucial for understanding the latest weather conditions across " +
      spec.city +
      ". Your responsibility as a weather forecaster is to produce a general weather forecast "
      "for the future using the current weather condition images provided.";

  std::string user;
  user +=
      "You must generate a concise multi-day weather forecast based on a template. For each day, "
      "replace the placeholder content with a natural language summary consistent with the "
      "weather phenomena represented in the figures. Keep the description concise and focused on "
      "the keyword groups listed for each date.\n";
  if (!spec.few_shot.empty()) {
    user +=
        "<Example>Below are a few examples of weather analysis to help understand how the region "
        "and type of concern relate to different weather conditions:\n";
    int i = 0;
    for (const auto& ex : spec.few_shot) {
      ++i;
      user += "Example " + std::to_string(i) + " input:\n" + ex.input + "\n";
      user += "Example " + std::to_string(i) + " answer:\n" + ex.answer + "\n";
    }
    user += "</Example>\n";
  }
  user += "<Problem>\n";
  user += "The following " + std::to_string(spec.variables.size()) +
          " figures represent weather conditions at " + format_timestamp(spec.issue_time) +
          ", and each figure contains a weather parameter. The variable in each figure is "
          "provided as follows:\n";
  for (const auto& [name, definition] : spec.variables)
    user += "- " + name + ": " + definition + "\n";
  user += "\n";
  for (const auto& d : spec.days) {
    user += day_marker(d.date, d.weekday);
    user += "\n";
    if (aspect_control) {
      user += focus_line(d.focus);
      user += "\n";
    }
    user += "\n";
  }
  user += "</Problem>\n";
  bundle.user = std::move(user);
  return bundle;
}

/// Archive lookup for few-shot examples: same calendar month, strictly
/// earlier years, most recent first, at most n.
inline std::vector<FewShotExample> retrieve_few_shot(const Timestamp& test_time,
                                                     const std::string& city,
                                                     std::span<const FewShotExample> archive,
                                                     size_t n) {
  Date d = test_time.local_date();
  int test_year = int(d.year());
  int test_month = int(unsigned(d.month()));
  std::vector<FewShotExample> hits;
  for (const auto& ex : archive)
    if (ex.city == city && ex.month == test_month && ex.year < test_year) hits.push_back(ex);
  std::stable_sort(hits.begin(), hits.end(),
                   [](const FewShotExample& a, const FewShotExample& b) { return a.year > b.year; });
  if (hits.size() > n) hits.resize(n);
  return hits;
}

struct ParsedDay {
  std::string raw_date;
  std::string weekday;
  std::string forecast;
  bool date_valid = false;
  int date = 0;  // YYYYMMDD when valid
};

/// Split generated text on `<<DATE, WEEKDAY>> Report:` markers. Focus lines
/// echoed back by a model and trailing ## terminators are stripped from the
/// day bodies; an invalid calendar date flags the day instead of failing.
inline std::vector<ParsedDay> parse_generated(const std::string& text) {
  static const std::regex marker(R"(<<\s*(\d{8})\s*,\s*([A-Za-z]+)\s*>>\s*Report:)");
  static const std::regex focus(R"(^\s*##\s*Focus on:[^\n]*\n?)");

  std::vector<ParsedDay> days;
  auto begin = std::sregex_iterator(text.begin(), text.end(), marker);
  auto end = std::sregex_iterator();
  std::vector<std::pair<size_t, size_t>> spans;  // match position, end
  std::vector<std::pair<std::string, std::string>> captures;
  for (auto it = begin; it != end; ++it) {
    spans.emplace_back(size_t(it->position()), size_t(it->position() + it->length()));
    captures.emplace_back((*it)[1].str(), (*it)[2].str());
  }
  if (spans.empty()) fail(Errc::no_markers, "no <<date, weekday>> Report: markers found");

  for (size_t i = 0; i < spans.size(); ++i) {
    size_t body_begin = spans[i].second;
    size_t body_end = i + 1 < spans.size() ? spans[i + 1].first : text.size();
    std::string body = text.substr(body_begin, body_end - body_begin);
    body = std::regex_replace(body, focus, "");
    body = trim(body);
    while (body.size() >= 2 && body.compare(body.size() - 2, 2, "##") == 0)
      body = trim(body.substr(0, body.size() - 2));

    ParsedDay day;
    day.raw_date = captures[i].first;
    day.weekday = captures[i].second;
    day.forecast = std::move(body);
    int v = std::stoi(day.raw_date);
    if (auto date = yyyymmdd_to_date(v)) {
      day.date_valid = true;
      day.date = v;
      day.weekday = weekday_name(*date);
    }
    days.push_back(std::move(day));
  }
  return days;
}

inline std::vector<DailyForecast> to_daily_forecasts(std::span<const ParsedDay> days) {
  std::vector<DailyForecast> out;
  for (const auto& d : days) {
    DailyForecast f;
    f.date = d.date_valid ? d.date : 0;
    f.weekday = d.weekday;
    f.forecast = d.forecast;
    out.push_back(std::move(f));
  }
  return out;
}

inline constexpr size_t kRankingArity = 9;

/// Judge prompt: fixed ranking rubric plus the gold report and the nine
/// candidates labeled R1..R9.
inline PromptBundle build_ranking_prompt(const std::string& gold,
                                         std::span<const std::string> candidates) {
  require(candidates.size() == kRankingArity, Errc::wrong_arity,
          "expected " + std::to_string(kRankingArity) + " candidates, got " +
              std::to_string(candidates.size()));
  PromptBundle bundle;
  if (gold.empty()) bundle.warnings.push_back("ground truth forecast is empty");
  bundle.system =
      "You are an expert meteorological evaluator specializing in assessing the quality of "
      "generated weather forecasts.\n"
      "Here is a weather forecasting scenario, including the ground truth forecast and eight "
      "candidate predicted forecasts.\n"
      "From the perspective of a professional weather analyst, you are required to rank the "
      "quality of these responses based on the following criteria:\n"
      "(1) Consistency with the meteorological facts in the ground truth forecast (short for "
      "Fact.Cons);\n"
      "(2) Quality of summarization of key weather signals without introducing misleading "
      "emphasis or irrelevant detail (short for Summ.Qual).\n"
      "Rubric Definitions:\n"
      "- Fact.Cons evaluates whether the predicted forecast is factually consistent with the "
      "ground truth in terms of key meteorological variables (e.g., temperature, precipitation, "
      "wind, synoptic systems), temporal alignment, and physical plausibility. Hallucinated or "
      "incorrect weather events should be heavily penalized.\n"
      "- Summ.Qual evaluates how well the response summarizes the key weather signals clearly "
      "and concisely, without introducing misleading emphasis, unnecessary detail, or obscuring "
      "the main forecast narrative.\n"
      "To help you rank these responses, we additionally provide background information, "
      "including forecast period, key weather variables, and the reference forecast.\n"
      "You should generate the response in the following format:\n"
      "Fact.Cons: R9 > R2 ... > R1;\n"
      "Summ.Qual: R9 > R2 ... > R1.\n"
      "After the rankings, provide several sentences explaining your evaluation.\n"
      "Important guidelines:\n"
      "- Focus only on factual and meteorological correctness.\n"
      "- Penalize hallucinated weather events or incorrect trends heavily.\n"
      "- Overly verbose answers that obscure the core forecast should be ranked lower in "
      "Summ.Qual.\n"
      "- Minor wording differences are acceptable if the facts are preserved.";
  std::string user = "Ground Truth Forecast:\n" + gold + "\nCandidate Forecasts:\n";
  for (size_t i = 0; i < candidates.size(); ++i)
    user += "R" + std::to_string(i + 1) + ": " + candidates[i] + "\n";
  user += "Please rank them following the required format.";
  bundle.user = std::move(user);
  return bundle;
}

struct Ranking {
  std::vector<std::string> fact_cons;  // best first
  std::vector<std::string> summ_qual;

  const std::string& top1_fact_cons() const { return fact_cons.front(); }
  const std::string& top1_summ_qual() const { return summ_qual.front(); }
};

inline std::string format_ranking(const Ranking& r) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += " > ";
      s += v[i];
    }
    return s;
  };
  return "Fact.Cons: " + join(r.fact_cons) + ";\nSumm.Qual: " + join(r.summ_qual) + ".";
}

namespace detail {

inline std::optional<std::vector<std::string>> ranking_labels(const std::string& reply,
                                                              const std::string& criterion) {
  std::regex head(criterion + R"(\s*:?\s*)", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(reply, m, head)) return std::nullopt;
  size_t pos = size_t(m.position() + m.length());
  static const std::regex label(R"(^\s*(R\d+)\s*(>)?)");
  std::vector<std::string> order;
  std::string rest = reply.substr(pos);
  while (true) {
    std::smatch lm;
    if (!std::regex_search(rest, lm, label)) break;
    order.push_back(lm[1].str());
    rest = rest.substr(size_t(lm.position() + lm.length()));
    if (!lm[2].matched) break;  // last label has no trailing '>'
  }
  if (order.empty()) return std::nullopt;
  return order;
}

}  // namespace detail

/// Extract the two orderings from a judge reply; trailing explanation text
/// is ignored. Both orderings must be duplicate-free permutations of the
/// same label set.
inline Ranking parse_ranking(const std::string& reply) {
  auto fact = detail::ranking_labels(reply, "Fact\\.?Cons");
  auto summ = detail::ranking_labels(reply, "Summ\\.?Qual");
  if (!fact || !summ) fail(Errc::malformed_ranking, "missing Fact.Cons or Summ.Qual ordering");
  auto as_set = [](const std::vector<std::string>& v) {
    return std::set<std::string>(v.begin(), v.end());
  };
  auto fs = as_set(*fact);
  auto ss = as_set(*summ);
  if (fs.size() != fact->size() || ss.size() != summ->size())
    fail(Errc::malformed_ranking, "duplicate label in ranking");
  if (fs != ss) fail(Errc::malformed_ranking, "criteria rank different label sets");
  return Ranking{std::move(*fact), std::move(*summ)};
}

}  // namespace wfr
