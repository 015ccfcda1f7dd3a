#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "wfr/error.hpp"
#include "wfr/text.hpp"

namespace wfr {

enum class Aspect : std::uint8_t {
  Temperature,
  Wind,
  Humidity,
  FrontalSystem,
  PressureSystem,
  WavePattern,
  WindFlowSystem,
  Event,
};

inline constexpr std::array<Aspect, 8> kAllAspects = {
    Aspect::Temperature,    Aspect::Wind,        Aspect::Humidity,       Aspect::FrontalSystem,
    Aspect::PressureSystem, Aspect::WavePattern, Aspect::WindFlowSystem, Aspect::Event,
};

enum class Claim : std::uint8_t {
  HotWarm,
  CoolCold,
  Moderate,
  StrongWind,
  LightWind,
  DryAir,
  MoistAir,
  ColdFront,
  WarmFront,
  HighPressure,
  LowPressure,
  Ridge,
  Trough,
  OnshoreFlow,
  OffshoreFlow,
  Precipitation,
  Snow,
  Storm,
};

inline constexpr std::array<Claim, 18> kAllClaims = {
    Claim::HotWarm,     Claim::CoolCold,     Claim::Moderate,      Claim::StrongWind,
    Claim::LightWind,   Claim::DryAir,       Claim::MoistAir,      Claim::ColdFront,
    Claim::WarmFront,   Claim::HighPressure, Claim::LowPressure,   Claim::Ridge,
    Claim::Trough,      Claim::OnshoreFlow,  Claim::OffshoreFlow,  Claim::Precipitation,
    Claim::Snow,        Claim::Storm,
};

inline std::string_view wire_name(Aspect a) {
  switch (a) {
    case Aspect::Temperature: return "temperature";
    case Aspect::Wind: return "wind";
    case Aspect::Humidity: return "humidity";
    case Aspect::FrontalSystem: return "frontal_system";
    case Aspect::PressureSystem: return "pressure_system";
    case Aspect::WavePattern: return "wave_pattern";
    case Aspect::WindFlowSystem: return "wind_flow_system";
    case Aspect::Event: return "event";
  }
  return "";
}

/// Spaced title case used in prompt text ("## Focus on: Pressure System ##").
inline std::string_view display_name(Aspect a) {
  switch (a) {
    case Aspect::Temperature: return "Temperature";
    case Aspect::Wind: return "Wind";
    case Aspect::Humidity: return "Humidity";
    case Aspect::FrontalSystem: return "Frontal System";
    case Aspect::PressureSystem: return "Pressure System";
    case Aspect::WavePattern: return "Wave Pattern";
    case Aspect::WindFlowSystem: return "Wind Flow System";
    case Aspect::Event: return "Event";
  }
  return "";
}

inline std::string_view wire_name(Claim c) {
  switch (c) {
    case Claim::HotWarm: return "hot_warm";
    case Claim::CoolCold: return "cool_cold";
    case Claim::Moderate: return "moderate";
    case Claim::StrongWind: return "strong_wind";
    case Claim::LightWind: return "light_wind";
    case Claim::DryAir: return "dry_air";
    case Claim::MoistAir: return "moist_air";
    case Claim::ColdFront: return "cold_front";
    case Claim::WarmFront: return "warm_front";
    case Claim::HighPressure: return "high_pressure";
    case Claim::LowPressure: return "low_pressure";
    case Claim::Ridge: return "ridge";
    case Claim::Trough: return "trough";
    case Claim::OnshoreFlow: return "onshore_flow";
    case Claim::OffshoreFlow: return "offshore_flow";
    case Claim::Precipitation: return "precipitation";
    case Claim::Snow: return "snow";
    case Claim::Storm: return "storm";
  }
  return "";
}

/// Collapse any label spelling to snake_case: "Cold_Front" and "Hot / Warm"
/// both become "cold_front" / "hot_warm".
inline std::string canon_label(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_word_char(c)) {
      if (pending && !out.empty()) out.push_back('_');
      pending = false;
      out.push_back(lower_char(c));
    } else {
      pending = true;
    }
  }
  return out;
}

inline std::optional<Aspect> parse_aspect(std::string_view s) {
  std::string c = canon_label(s);
  for (Aspect a : kAllAspects)
    if (c == wire_name(a)) return a;
  return std::nullopt;
}

inline std::optional<Claim> parse_claim(std::string_view s) {
  std::string c = canon_label(s);
  for (Claim cl : kAllClaims)
    if (c == wire_name(cl)) return cl;
  // Spellings seen on model replies for the temperature claims.
  static const std::unordered_map<std::string, Claim> aliases = {
      {"hot_temperature", Claim::HotWarm},       {"warm_temperature", Claim::HotWarm},
      {"cool_temperature", Claim::CoolCold},     {"cold_temperature", Claim::CoolCold},
      {"moderate_temperature", Claim::Moderate},
  };
  auto it = aliases.find(c);
  if (it != aliases.end()) return it->second;
  return std::nullopt;
}

struct ProtocolEntry {
  Aspect aspect;
  Claim claim;
  std::vector<std::string> keywords;  // normalized phrases

  friend bool operator==(const ProtocolEntry&, const ProtocolEntry&) = default;
};

/// The fixed aspect -> claim -> keyword-phrase hierarchy. Immutable after
/// construction; the phrase index for matching is built once here.
class AnnotationProtocol {
 public:
  static AnnotationProtocol from_json(const nlohmann::ordered_json& doc) {
    AnnotationProtocol p;
    require(doc.is_object(), Errc::parse_error, "protocol root must be an object");
    std::set<Claim> seen_claims;
    std::set<std::string> seen_keywords;
    for (const auto& [aspect_key, claims_obj] : doc.items()) {
      auto aspect = parse_aspect(aspect_key);
      if (!aspect) fail(Errc::unknown_aspect, aspect_key);
      require(claims_obj.is_object(), Errc::parse_error, "claims of " + aspect_key);
      for (const auto& [claim_key, kw_arr] : claims_obj.items()) {
        auto claim = parse_claim(claim_key);
        if (!claim) fail(Errc::unknown_claim, claim_key);
        if (!seen_claims.insert(*claim).second)
          fail(Errc::duplicate_claim, claim_key + " listed more than once");
        require(kw_arr.is_array() && !kw_arr.empty(), Errc::empty_keyword_list, claim_key);
        ProtocolEntry entry{*aspect, *claim, {}};
        for (const auto& kw : kw_arr) {
          require(kw.is_string(), Errc::parse_error, "keyword of " + claim_key);
          std::string phrase = normalize_phrase(kw.get<std::string>());
          require(!phrase.empty(), Errc::empty_keyword_list, "blank keyword under " + claim_key);
          if (!seen_keywords.insert(phrase).second)
            fail(Errc::duplicate_keyword, phrase);
          entry.keywords.push_back(std::move(phrase));
        }
        p.entries_.push_back(std::move(entry));
      }
    }
    for (Claim c : kAllClaims)
      if (!seen_claims.count(c))
        fail(Errc::missing_claim, std::string(wire_name(c)) + " not covered");
    p.build_index();
    return p;
  }

  static AnnotationProtocol load(const std::filesystem::path& path) {
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

  static const AnnotationProtocol& default_instance();

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& e : entries_)
      doc[std::string(wire_name(e.aspect))][std::string(wire_name(e.claim))] = e.keywords;
    return doc;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    require(out.good(), Errc::io_error, "cannot write " + path.string());
    out << to_json().dump(2) << "\n";
  }

  Aspect aspect_of(Claim c) const { return claim_aspect_[size_t(c)]; }

  const std::vector<std::string>& keywords(Claim c) const {
    for (const auto& e : entries_)
      if (e.claim == c) return e.keywords;
    fail(Errc::unknown_claim, std::string(wire_name(c)));
  }

  const std::vector<ProtocolEntry>& entries() const { return entries_; }

  /// Leftmost-longest non-overlapping phrase matching over clause segments;
  /// a token consumed by a longer phrase cannot re-trigger a shorter one.
  std::set<Claim> match_claims(std::string_view text) const {
    std::set<Claim> claims;
    for (const auto& seg : token_segments(text)) {
      size_t i = 0;
      while (i < seg.size()) {
        size_t advance = 1;
        auto it = index_.find(seg[i]);
        if (it != index_.end()) {
          for (const auto& phrase : it->second) {  // longest first
            if (i + phrase.tokens.size() > seg.size()) continue;
            bool ok = true;
            for (size_t k = 1; k < phrase.tokens.size() && ok; ++k)
              ok = seg[i + k] == phrase.tokens[k];
            if (ok) {
              claims.insert(phrase.claim);
              advance = phrase.tokens.size();
              break;
            }
          }
        }
        i += advance;
      }
    }
    return claims;
  }

  friend bool operator==(const AnnotationProtocol& a, const AnnotationProtocol& b) {
    return a.entries_ == b.entries_;
  }

 private:
  struct Phrase {
    std::vector<std::string> tokens;
    Claim claim;
  };

  void build_index() {
    for (Claim c : kAllClaims) claim_aspect_[size_t(c)] = Aspect::Temperature;
    for (const auto& e : entries_) {
      claim_aspect_[size_t(e.claim)] = e.aspect;
      for (const auto& kw : e.keywords) {
        Phrase ph{tokenize(kw), e.claim};
        if (ph.tokens.empty()) continue;
        index_[ph.tokens.front()].push_back(std::move(ph));
      }
    }
    for (auto& [first, phrases] : index_)
      std::stable_sort(phrases.begin(), phrases.end(),
                       [](const Phrase& a, const Phrase& b) { return a.tokens.size() > b.tokens.size(); });
  }

  std::vector<ProtocolEntry> entries_;
  std::array<Aspect, 18> claim_aspect_{};
  std::unordered_map<std::string, std::vector<Phrase>> index_;
};

/// The owning aspect of a claim under the given protocol. Total over Claim.
inline Aspect claim_aspect(Claim c, const AnnotationProtocol& protocol) {
  return protocol.aspect_of(c);
}

inline std::set<Aspect> aspect_image(const std::set<Claim>& claims,
                                     const AnnotationProtocol& protocol) {
  std::set<Aspect> out;
  for (Claim c : claims) out.insert(protocol.aspect_of(c));
  return out;
}

/// Pinned default protocol; data/protocol.json ships the same content.
inline constexpr std::string_view kDefaultProtocolJson = R"json({
  "temperature": {
    "hot_warm": ["warming", "warmer temperatures", "hot temperatures", "increasing temperatures", "temperatures increase", "above average temperatures", "above normal temperatures", "warm", "warmer", "hot", "high temperatures", "warmup", "heat", "temperatures will moderate", "temperatures rebound"],
    "cool_cold": ["colder", "dropping temperatures", "cool", "frigid", "cold", "cooling", "wintry", "cooler", "falling temperatures", "temperatures fall", "below average temperatures", "below normal temperatures", "plummet temperatures", "chills", "winter weather", "freeze"],
    "moderate": ["normal temperatures", "mild temperatures"]
  },
  "wind": {
    "strong_wind": ["blustery", "strong winds", "strong westerly winds", "gusts", "gusty", "gusty winds", "damaging winds", "dangerous wind", "high winds", "strong west winds", "strong southwest winds", "stronger winds", "winds will be strong", "winds increasing", "increasing winds", "increase winds", "increase in winds", "increase in southwesterly winds", "winds will increase", "winds will rapidly increase", "winds will pick up", "winds will strengthen", "winds to increase", "winds will be on the increase", "winds will also be on the increase", "winds will crank back up", "crank up the winds", "kicking up the winds"],
    "light_wind": ["windy", "breezy", "breezy to windy", "weak wind", "breezes", "less wind", "winds will decrease", "winds will taper off", "winds will subside", "winds subside", "winds will diminish"]
  },
  "humidity": {
    "dry_air": ["low humidity", "lower humidity", "dry", "drier"],
    "moist_air": ["high humidity", "raising humidity", "moist", "damp", "humid", "wet"]
  },
  "frontal_system": {
    "cold_front": ["cold front", "backdoor cold front"],
    "warm_front": ["warm front"]
  },
  "pressure_system": {
    "high_pressure": ["high pressure", "the high", "another high", "this high", "high pressure ridge"],
    "low_pressure": ["low pressure", "the low", "low pressure system", "that low", "upper low", "another low", "coastal low"]
  },
  "wave_pattern": {
    "ridge": ["ridge"],
    "trough": ["trough"]
  },
  "wind_flow_system": {
    "onshore_flow": ["onshore flow"],
    "offshore_flow": ["offshore flow"]
  },
  "event": {
    "precipitation": ["precipitation", "rain", "rainfall", "shower", "showers", "drizzle", "drizzly", "rain showers"],
    "snow": ["flurries", "snow", "snowfall", "snows", "snow shower", "snow showers", "hail", "hails"],
    "storm": ["storm", "storms", "thunderstorm", "thunderstorms", "hurricane", "cyclone"]
  }
})json";

inline const AnnotationProtocol& AnnotationProtocol::default_instance() {
  static const AnnotationProtocol instance =
      from_json(nlohmann::ordered_json::parse(kDefaultProtocolJson));
  return instance;
}

}  // namespace wfr
