#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/fixtures.hpp"
#include "wfr/claims.hpp"

using namespace wfr;

namespace {

const AnnotationProtocol& proto() { return AnnotationProtocol::default_instance(); }

DailyForecast day_of(std::string text, int date = 20190928) {
  DailyForecast d;
  d.date = date;
  d.weekday = weekday_name(*yyyymmdd_to_date(date));
  d.forecast = std::move(text);
  return d;
}

}  // namespace

TEST_CASE("reference labels for the four split days") {
  auto texts = fixtures::reference_day_texts();
  auto expect = fixtures::reference_annotations();
  for (size_t d = 0; d < 4; ++d) {
    auto ann = extract_rule_based(day_of(texts[d], expect[d].date), proto());
    CHECK(ann.claims == expect[d].claims);
    CHECK(ann.aspects == expect[d].aspects);
  }
}

TEST_CASE("front phrases do not leak their temperature words") {
  auto ann = extract_rule_based(
      day_of("A warm front followed by a cold front will bring a threat of showers and "
             "thunderstorms."),
      proto());
  CHECK(ann.claims ==
        std::set<Claim>{Claim::ColdFront, Claim::WarmFront, Claim::Precipitation, Claim::Storm});
  CHECK(ann.aspects == std::set<Aspect>{Aspect::FrontalSystem, Aspect::Event});
  CHECK_FALSE(ann.claims.count(Claim::HotWarm));
  CHECK_FALSE(ann.claims.count(Claim::CoolCold));
}

TEST_CASE("high pressure with cool weather") {
  auto ann = extract_rule_based(
      day_of("High pressure building in from Ontario will bring fair and cool weather."), proto());
  CHECK(ann.claims == std::set<Claim>{Claim::CoolCold, Claim::HighPressure});
  CHECK(ann.aspects == std::set<Aspect>{Aspect::Temperature, Aspect::PressureSystem});
}

TEST_CASE("a high pressure ridge counts as high pressure, a bare ridge as wave pattern") {
  auto compound = extract_rule_based(day_of("A high pressure ridge keeps things quiet."), proto());
  CHECK(compound.claims == std::set<Claim>{Claim::HighPressure});

  auto bare = extract_rule_based(day_of("A ridge builds over the area."), proto());
  CHECK(bare.claims == std::set<Claim>{Claim::Ridge});
  CHECK(bare.aspects == std::set<Aspect>{Aspect::WavePattern});
}

TEST_CASE("empty forecast yields empty sets") {
  auto ann = extract_rule_based(day_of(""), proto());
  CHECK(ann.claims.empty());
  CHECK(ann.aspects.empty());
}

TEST_CASE("negation is not modeled") {
  auto ann = extract_rule_based(day_of("No rain expected."), proto());
  CHECK(ann.claims.count(Claim::Precipitation) == 1);
}

TEST_CASE("phrases do not match across clause punctuation") {
  auto ann = extract_rule_based(day_of("It stays warm. Front moves east."), proto());
  CHECK(ann.claims.count(Claim::WarmFront) == 0);
  CHECK(ann.claims.count(Claim::HotWarm) == 1);
}

TEST_CASE("extraction is independent of keyword file ordering") {
  // Rebuild the protocol with aspects and keyword lists in reverse order.
  auto doc = proto().to_json();
  nlohmann::ordered_json reversed = nlohmann::ordered_json::object();
  std::vector<std::string> aspect_keys;
  for (const auto& [k, v] : doc.items()) aspect_keys.push_back(k);
  for (auto it = aspect_keys.rbegin(); it != aspect_keys.rend(); ++it) {
    std::vector<std::string> claim_keys;
    for (const auto& [ck, cv] : doc[*it].items()) claim_keys.push_back(ck);
    for (auto jt = claim_keys.rbegin(); jt != claim_keys.rend(); ++jt) {
      auto kws = doc[*it][*jt];
      std::reverse(kws.begin(), kws.end());
      reversed[*it][*jt] = kws;
    }
  }
  auto shuffled = AnnotationProtocol::from_json(reversed);

  std::vector<std::string> texts{
      fixtures::reference_day_texts()[0], fixtures::reference_day_texts()[1],
      "Gusty winds with snow showers and low humidity.", "The low deepens; winds will subside."};
  for (const auto& t : texts) {
    CHECK(extract_rule_based(day_of(t), proto()).claims ==
          extract_rule_based(day_of(t), shuffled).claims);
  }
}

TEST_CASE("appending sentences never removes claims") {
  std::mt19937_64 rng(77);
  std::vector<std::string> sentences{
      "Warm air returns.",       "A cold front arrives.",     "Snow showers develop.",
      "The high slides east.",   "Winds will pick up.",       "Low humidity persists.",
      "Rain tapers to drizzle.", "An upper low lingers.",     "Trough digs in.",
      "Onshore flow resumes.",   "Thunderstorms fire late.",  "Freeze possible tonight.",
  };
  std::uniform_int_distribution<size_t> pick(0, sentences.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::string base = sentences[pick(rng)];
    int extra = 1 + int(rng() % 3);
    std::string grown = base;
    auto before = extract_rule_based(day_of(base), proto()).claims;
    for (int i = 0; i < extra; ++i) grown += " " + sentences[pick(rng)];
    auto after = extract_rule_based(day_of(grown), proto()).claims;
    for (Claim c : before) CHECK(after.count(c) == 1);
  }
}

TEST_CASE("repair recomputes aspects from claims") {
  SECTION("forced remap") {
    DayAnnotation ann;
    ann.claims = {Claim::Ridge};
    ann.aspects = {Aspect::Wind};
    auto [fixed, repaired] = repair_consistency(ann, proto());
    CHECK(repaired);
    CHECK(fixed.claims == std::set<Claim>{Claim::Ridge});
    CHECK(fixed.aspects == std::set<Aspect>{Aspect::WavePattern});
  }
  SECTION("consistent annotation is unchanged") {
    DayAnnotation ann;
    ann.claims = {Claim::Snow};
    ann.aspects = {Aspect::Event};
    auto [fixed, repaired] = repair_consistency(ann, proto());
    CHECK_FALSE(repaired);
    CHECK(fixed == ann);
  }
  SECTION("empty claims clear the aspects") {
    DayAnnotation ann;
    ann.aspects = {Aspect::Event};
    auto [fixed, repaired] = repair_consistency(ann, proto());
    CHECK(repaired);
    CHECK(fixed.claims.empty());
    CHECK(fixed.aspects.empty());
  }
}

TEST_CASE("repaired annotations satisfy the aspect-image invariant") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> pick(0, 17);
  std::uniform_int_distribution<int> apick(0, 7);
  for (int trial = 0; trial < 200; ++trial) {
    DayAnnotation ann;
    for (int i = 0; i < 4; ++i) ann.claims.insert(kAllClaims[size_t(pick(rng))]);
    for (int i = 0; i < 2; ++i) ann.aspects.insert(kAllAspects[size_t(apick(rng))]);
    auto [fixed, repaired] = repair_consistency(ann, proto());
    CHECK(fixed.aspects == aspect_image(fixed.claims, proto()));
    if (!repaired) CHECK(fixed.aspects == ann.aspects);
  }
}

TEST_CASE("cross_check compares aligned day lists") {
  DayAnnotation a1;
  a1.date = 20190927;
  a1.claims = {Claim::ColdFront};
  DayAnnotation b1 = a1;

  SECTION("identical lists agree") {
    std::vector<DayAnnotation> a{a1}, b{b1};
    CHECK(cross_check(a, b).empty());
  }
  SECTION("one-sided claim shows up in only_in_b") {
    DayAnnotation b2 = b1;
    b2.claims.insert(Claim::Storm);
    std::vector<DayAnnotation> a{a1}, b{b2};
    auto diffs = cross_check(a, b, "inst-7");
    REQUIRE(diffs.size() == 1);
    CHECK(diffs[0].instance_id == "inst-7");
    CHECK(diffs[0].date == 20190927);
    CHECK(diffs[0].only_in_a.empty());
    CHECK(diffs[0].only_in_b == std::set<Claim>{Claim::Storm});
  }
  SECTION("length mismatch is rejected") {
    std::vector<DayAnnotation> a{a1, a1, a1};
    std::vector<DayAnnotation> b{b1, b1, b1, b1};
    CHECK_THROWS_MATCHES(cross_check(a, b), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::length_mismatch; }));
  }
  SECTION("disjoint sets never intersect in a disagreement") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 17);
    for (int trial = 0; trial < 100; ++trial) {
      DayAnnotation x, y;
      for (int i = 0; i < 3; ++i) x.claims.insert(kAllClaims[size_t(pick(rng))]);
      for (int i = 0; i < 3; ++i) y.claims.insert(kAllClaims[size_t(pick(rng))]);
      std::vector<DayAnnotation> a{x}, b{y};
      for (const auto& d : cross_check(a, b))
        for (Claim c : d.only_in_a) CHECK(d.only_in_b.count(c) == 0);
    }
  }
}

TEST_CASE("LLM extraction parses the reference reply") {
  // Reply shaped like the worked example, mixed label spellings included.
  std::string reply = R"([
    {
      "date": "20190928",
      "weekday": "Saturday",
      "claims": ["Cold_Front", "Precipitation", "Storm", "Warm_Front"],
      "aspect": ["Event", "Frontal_System"]
    }
  ])";
  ChatFn chat = [&](const std::string& system, const std::string& user) {
    CHECK(system.find("group_dict") != std::string::npos);
    CHECK(user.find("daily_forecast") != std::string::npos);
    return reply;
  };
  auto ann = extract_llm(day_of("A warm front followed by a cold front...", 20190928), proto(), chat);
  CHECK(ann.claims ==
        std::set<Claim>{Claim::ColdFront, Claim::WarmFront, Claim::Precipitation, Claim::Storm});
  CHECK(ann.aspects == std::set<Aspect>{Aspect::FrontalSystem, Aspect::Event});
}

TEST_CASE("LLM extraction rejects out-of-vocabulary claims") {
  ChatFn chat = [](const std::string&, const std::string&) {
    return std::string(R"([{"date":"20190928","claims":["blizzard"],"aspects":["Event"]}])");
  };
  CHECK_THROWS_MATCHES(extract_llm(day_of("whiteout"), proto(), chat), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::schema_error; }));
}

TEST_CASE("LLM extraction accepts empty label lists") {
  ChatFn chat = [](const std::string&, const std::string&) {
    return std::string(R"([{"date":"20190928","claims":[],"aspects":[]}])");
  };
  auto ann = extract_llm(day_of("Quiet weather."), proto(), chat);
  CHECK(ann.claims.empty());
  CHECK(ann.aspects.empty());
}

TEST_CASE("LLM extraction surfaces malformed replies as schema errors") {
  ChatFn chat = [](const std::string&, const std::string&) { return std::string("maybe rain?"); };
  CHECK_THROWS_MATCHES(extract_llm(day_of("rain"), proto(), chat), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::schema_error; }));
}

TEST_CASE("repair loop retries inconsistent extractions then falls back") {
  int calls = 0;
  ChatFn chat = [&](const std::string&, const std::string&) {
    ++calls;
    // Claims map to WavePattern but the reply insists on Wind.
    return std::string(R"([{"date":"20190928","claims":["ridge"],"aspects":["Wind"]}])");
  };
  auto ann = extract_llm_repaired(day_of("A ridge aloft."), proto(), chat, 2);
  CHECK(calls == 3);  // initial + two retries
  CHECK(ann.claims == std::set<Claim>{Claim::Ridge});
  CHECK(ann.aspects == std::set<Aspect>{Aspect::WavePattern});
}
