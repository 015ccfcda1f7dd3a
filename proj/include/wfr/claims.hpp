#pragma once

#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wfr/error.hpp"
#include "wfr/protocol.hpp"
#include "wfr/report.hpp"

namespace wfr {

/// Assistant call: (system prompt, user prompt) -> reply text.
using ChatFn = std::function<std::string(const std::string&, const std::string&)>;

/// Deterministic keyword annotation of one forecast day. Aspects are always
/// the image of the matched claims under the protocol mapping.
inline DayAnnotation extract_rule_based(const DailyForecast& day,
                                        const AnnotationProtocol& protocol) {
  DayAnnotation ann;
  ann.date = day.date;
  if (day.forecast.empty()) return ann;
  ann.claims = protocol.match_claims(day.forecast);
  ann.aspects = aspect_image(ann.claims, protocol);
  return ann;
}

/// Recompute aspects from claims; `repaired` reports whether the stored
/// aspect set disagreed with the mapped one (the retry signal for the LLM
/// extraction path).
inline std::pair<DayAnnotation, bool> repair_consistency(const DayAnnotation& ann,
                                                         const AnnotationProtocol& protocol) {
  DayAnnotation fixed = ann;
  fixed.aspects = aspect_image(ann.claims, protocol);
  return {fixed, fixed.aspects != ann.aspects};
}

struct ExtractionDisagreement {
  std::string instance_id;
  int date = 0;
  std::set<Claim> only_in_a;
  std::set<Claim> only_in_b;
};

/// Day-by-day claim comparison between two extractors.
inline std::vector<ExtractionDisagreement> cross_check(std::span<const DayAnnotation> a,
                                                       std::span<const DayAnnotation> b,
                                                       const std::string& instance_id = "") {
  require(a.size() == b.size(), Errc::length_mismatch,
          std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " days");
  std::vector<ExtractionDisagreement> out;
  for (size_t i = 0; i < a.size(); ++i) {
    ExtractionDisagreement d;
    d.instance_id = instance_id;
    d.date = a[i].date;
    for (Claim c : a[i].claims)
      if (!b[i].claims.count(c)) d.only_in_a.insert(c);
    for (Claim c : b[i].claims)
      if (!a[i].claims.count(c)) d.only_in_b.insert(c);
    if (!d.only_in_a.empty() || !d.only_in_b.empty()) out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LLM extraction path

inline std::string build_extraction_system_prompt(const AnnotationProtocol& protocol) {
  std::string claims_list, aspects_list;
  for (const auto& e : protocol.entries()) {
    if (!claims_list.empty()) claims_list += ", ";
    claims_list += wire_name(e.claim);
  }
  for (Aspect a : kAllAspects) {
    if (!aspects_list.empty()) aspects_list += ", ";
    aspects_list += wire_name(a);
  }
  std::string p;
  p += "You are an advanced weather forecast text analysis model.\n";
  p += "Your task is to analyze the meaning of the forecast texts semantically and\n";
  p += "classify each day's forecast into the most relevant meteorological categories\n";
  p += "and subcategories.\n\n";
  p += "The valid classification hierarchy is defined below:\n";
  p += "## group_dict (Keyword Groups)\n";
  p += protocol.to_json().dump(2) + "\n\n";
  p += "Each subcategory contains example words or phrases. These examples serve as\n";
  p += "semantic references, not strict matching tokens. You should classify the\n";
  p += "forecast based on meaning.\n\n";
  p += "Please output **strict JSON**, formatted as a list:\n";
  p += "[\n  {\n    \"date\": \"YYYYMMDD\",\n    \"weekday\": \"xxx\",\n";
  p += "    \"claims\": [\"...\"],\n    \"aspects\": [\"...\"]\n  },\n  ...\n]\n\n";
  p += "Requirements:\n\n";
  p += "- **claims**: the detected claims (from `group_dict`). Each selected\n";
  p += "  subcategory must be chosen from the valid list: " + claims_list + "\n";
  p += "- **aspects**: the parent categories corresponding to each subcategory.\n";
  p += "  Each category must be selected from: " + aspects_list + "\n\n";
  p += "### RULES\n\n";
  p += "1. Do **not** rely solely on exact word matching; use **semantic interpretation**.\n";
  p += "2. If no keywords are detected for a day, return empty lists.\n";
  p += "3. Do **not** output explanations, comments, markdown, or any text outside valid JSON.\n";
  p += "4. Output must be valid JSON at the top level - no trailing commas.\n";
  return p;
}

inline std::string build_extraction_user_prompt(const DailyForecast& day) {
  Json doc = Json::array({to_json(day)});
  return "## daily_forecast (Input Data for All Days)\n" + doc.dump(2) + "\n";
}

/// Strip an optional markdown code fence from a model reply.
inline std::string strip_code_fence(std::string_view reply) {
  std::string s = trim(reply);
  if (s.rfind("```", 0) == 0) {
    size_t first_nl = s.find('\n');
    size_t last_fence = s.rfind("```");
    if (first_nl != std::string::npos && last_fence > first_nl)
      s = trim(s.substr(first_nl + 1, last_fence - first_nl - 1));
  }
  return s;
}

/// Parse the model's JSON list reply for one day; unknown claim or aspect
/// labels are rejected (closed vocabulary).
inline DayAnnotation parse_extraction_reply(const std::string& reply, const DailyForecast& day) {
  Json doc;
  try {
    doc = Json::parse(strip_code_fence(reply));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::schema_error, std::string("extraction reply is not JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("daily_forecast")) doc = doc["daily_forecast"];
  if (doc.is_object()) doc = Json::array({doc});
  require(doc.is_array() && !doc.empty(), Errc::schema_error, "extraction reply is not a list");

  const Json* entry = &doc[0];
  for (const auto& e : doc) {  // match by date when several days come back
    if (e.contains("date") && e["date"].is_string() &&
        e["date"].get<std::string>() == yyyymmdd_string(day.date)) {
      entry = &e;
      break;
    }
  }
  DayAnnotation ann;
  ann.date = day.date;
  for (const auto& c : entry->value("claims", Json::array())) {
    auto claim = parse_claim(c.get<std::string>());
    if (!claim) fail(Errc::schema_error, "unknown claim " + c.get<std::string>());
    ann.claims.insert(*claim);
  }
  const char* aspect_key = entry->contains("aspects") ? "aspects" : "aspect";
  for (const auto& a : entry->value(aspect_key, Json::array())) {
    auto aspect = parse_aspect(a.get<std::string>());
    if (!aspect) fail(Errc::schema_error, "unknown aspect " + a.get<std::string>());
    ann.aspects.insert(*aspect);
  }
  return ann;
}

inline DayAnnotation extract_llm(const DailyForecast& day, const AnnotationProtocol& protocol,
                                 const ChatFn& chat) {
  std::string reply;
  try {
    reply = chat(build_extraction_system_prompt(protocol), build_extraction_user_prompt(day));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Errc::backend_error, e.what());
  }
  return parse_extraction_reply(reply, day);
}

/// LLM extraction with the consistency-repair loop: when the mapped aspects
/// disagree with the extracted ones, re-ask up to `retries` times, then keep
/// the recomputed mapping.
inline DayAnnotation extract_llm_repaired(const DailyForecast& day,
                                          const AnnotationProtocol& protocol, const ChatFn& chat,
                                          int retries = 2) {
  DayAnnotation ann = extract_llm(day, protocol, chat);
  for (int i = 0; i < retries; ++i) {
    auto [fixed, repaired] = repair_consistency(ann, protocol);
    if (!repaired) return fixed;
    ann = extract_llm(day, protocol, chat);
  }
  return repair_consistency(ann, protocol).first;
}

}  // namespace wfr
