#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/fixtures.hpp"
#include "wfr/prompting.hpp"

using namespace wfr;

namespace {

PromptSpec sample_spec() {
  PromptSpec spec;
  spec.city = "Albany, New York";
  spec.issue_time = parse_timestamp("2019-09-27T03:40:00-04:00");
  const int dates[4] = {20190927, 20190928, 20190929, 20190930};
  const std::vector<std::vector<Aspect>> focus = {
      {Aspect::Temperature, Aspect::PressureSystem},
      {Aspect::FrontalSystem, Aspect::Event},
      {Aspect::Temperature, Aspect::PressureSystem},
      {Aspect::FrontalSystem, Aspect::Event},
  };
  for (int d = 0; d < 4; ++d) {
    spec.days[size_t(d)].date = dates[d];
    spec.days[size_t(d)].weekday = weekday_name(*yyyymmdd_to_date(dates[d]));
    spec.days[size_t(d)].focus = focus[size_t(d)];
  }
  return spec;
}

}  // namespace

TEST_CASE("generation prompt carries date markers and focus constraints") {
  auto bundle = build_generation_prompt(sample_spec(), true);
  CHECK(bundle.system.find("Albany, New York") != std::string::npos);
  auto pos = bundle.user.find("<<20190927, Friday>> Report:");
  REQUIRE(pos != std::string::npos);
  auto focus_pos = bundle.user.find("## Focus on: Temperature, Pressure System ##", pos);
  REQUIRE(focus_pos != std::string::npos);
  CHECK(focus_pos == pos + std::string("<<20190927, Friday>> Report:\n").size());
  CHECK(bundle.user.find("<<20190930, Monday>> Report:") != std::string::npos);
}

TEST_CASE("aspect control off emits no focus lines") {
  auto bundle = build_generation_prompt(sample_spec(), false);
  CHECK(bundle.user.find("Focus on") == std::string::npos);
}

TEST_CASE("parameter encodings follow the 12-variable order") {
  auto bundle = build_generation_prompt(sample_spec(), true);
  auto land = bundle.user.find("- land sea mask:");
  auto u10 = bundle.user.find("The eastward component of the 10m wind");
  auto water = bundle.user.find("- total column water:");
  REQUIRE(land != std::string::npos);
  REQUIRE(u10 != std::string::npos);
  REQUIRE(water != std::string::npos);
  CHECK(land < u10);
  CHECK(u10 < water);
  CHECK(bundle.user.find("The following 12 figures") != std::string::npos);
}

TEST_CASE("zero-shot layout omits the example block") {
  auto spec = sample_spec();
  auto zero = build_generation_prompt(spec, true);
  CHECK(zero.user.find("<Example>") == std::string::npos);

  spec.few_shot.push_back({"Albany, New York", 2021, 9, "input block", "answer block"});
  auto one = build_generation_prompt(spec, true);
  CHECK(one.user.find("<Example>") != std::string::npos);
  CHECK(one.user.find("Example 1 input:\ninput block") != std::string::npos);
  CHECK(one.user.find("Example 1 answer:\nanswer block") != std::string::npos);
}

TEST_CASE("distinct focus lists give distinct prompts") {
  auto a = sample_spec();
  auto b = sample_spec();
  b.days[2].focus = {Aspect::Wind};
  CHECK(build_generation_prompt(a, true).user != build_generation_prompt(b, true).user);
}

TEST_CASE("aspect control demands focus aspects") {
  auto spec = sample_spec();
  spec.days[1].focus.clear();
  CHECK_THROWS_AS(build_generation_prompt(spec, true), Error);
  CHECK_NOTHROW(build_generation_prompt(spec, false));
}

TEST_CASE("few-shot retrieval: same month, earlier years, recent first") {
  std::vector<FewShotExample> archive{
      {"Albany, New York", 2019, 7, "in-2019", "ans-2019"},
      {"Albany, New York", 2021, 7, "in-2021", "ans-2021"},
      {"Albany, New York", 2022, 7, "in-2022-same-year", "x"},
      {"Albany, New York", 2023, 7, "in-2023-future", "x"},
      {"Albany, New York", 2020, 6, "wrong-month", "x"},
      {"Boston, Massachusetts", 2020, 7, "wrong-city", "x"},
  };
  Timestamp test_time = parse_timestamp("2022-07-15T06:00:00-04:00");

  auto two = retrieve_few_shot(test_time, "Albany, New York", archive, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].year == 2021);
  CHECK(two[1].year == 2019);

  auto one = retrieve_few_shot(test_time, "Albany, New York", archive, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].year == 2021);

  auto none = retrieve_few_shot(parse_timestamp("2022-12-15T06:00:00-05:00"), "Albany, New York",
                                archive, 2);
  CHECK(none.empty());
}

TEST_CASE("parse_generated inverts the structured rendering") {
  auto inst = fixtures::synthetic_instance();
  std::string text = render_structured(inst.segmented.days);
  auto days = parse_generated(text);
  REQUIRE(days.size() == 4);
  for (size_t d = 0; d < 4; ++d) {
    CHECK(days[d].date_valid);
    CHECK(days[d].date == inst.segmented.days[d].date);
    CHECK(days[d].weekday == inst.segmented.days[d].weekday);
    CHECK(days[d].forecast == inst.segmented.days[d].forecast);
  }
}

TEST_CASE("parse_generated handles partial and malformed outputs") {
  SECTION("three markers give three entries") {
    std::string text =
        "<<20190927, Friday>> Report:\nSunny.\n\n<<20190928, Saturday>> Report:\nRain.\n\n"
        "<<20190929, Sunday>> Report:\nWindy.\n\n";
    CHECK(parse_generated(text).size() == 3);
  }
  SECTION("free prose has no markers") {
    CHECK_THROWS_MATCHES(parse_generated("It will rain tomorrow, probably."), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::no_markers; }));
  }
  SECTION("invalid calendar dates are flagged, not fatal") {
    auto days = parse_generated("<<20191399, Friday>> Report:\nOdd.\n");
    REQUIRE(days.size() == 1);
    CHECK_FALSE(days[0].date_valid);
    CHECK(days[0].raw_date == "20191399");
    CHECK(days[0].forecast == "Odd.");
  }
  SECTION("echoed focus lines and trailing ## are stripped") {
    std::string text =
        "<<20190927, Friday>> Report:\n## Focus on: Temperature ##\nMild day. ##\n\n"
        "<<20190928, Saturday>> Report:\n##Focus on: Wind ##\nBreezy. ##\n\n";
    auto days = parse_generated(text);
    REQUIRE(days.size() == 2);
    CHECK(days[0].forecast == "Mild day.");
    CHECK(days[1].forecast == "Breezy.");
  }
}

TEST_CASE("random structured renderings round-trip exactly") {
  std::mt19937_64 rng(404);
  std::vector<std::string> vocab{"rain", "snow", "gusty", "winds", "cool", "high",
                                 "pressure", "front", "fair", "humid"};
  std::uniform_int_distribution<size_t> word(0, vocab.size() - 1);
  std::uniform_int_distribution<int> words_per_day(1, 12);
  std::uniform_int_distribution<int> start(18000, 19500);  // days since epoch
  for (int trial = 0; trial < 100; ++trial) {
    std::array<DailyForecast, 4> days;
    Date base{std::chrono::sys_days(std::chrono::days(start(rng)))};
    for (int d = 0; d < 4; ++d) {
      std::string text;
      int n = words_per_day(rng);
      for (int w = 0; w < n; ++w) {
        if (!text.empty()) text += " ";
        text += vocab[word(rng)];
      }
      days[size_t(d)] = make_daily_forecast(add_days(base, d), text + ".");
    }
    auto parsed = parse_generated(render_structured(days));
    REQUIRE(parsed.size() == 4);
    for (size_t d = 0; d < 4; ++d) {
      CHECK(parsed[d].date == days[d].date);
      CHECK(parsed[d].forecast == days[d].forecast);
    }
  }
}

TEST_CASE("ranking prompt takes exactly nine candidates") {
  std::vector<std::string> nine;
  for (int i = 1; i <= 9; ++i) nine.push_back("report " + std::to_string(i));
  auto bundle = build_ranking_prompt("the gold report", nine);
  CHECK(bundle.system.find("Fact.Cons") != std::string::npos);
  CHECK(bundle.user.find("R1: report 1") != std::string::npos);
  CHECK(bundle.user.find("R9: report 9") != std::string::npos);
  CHECK(bundle.user.find("R10:") == std::string::npos);
  CHECK(bundle.warnings.empty());

  std::vector<std::string> eight(nine.begin(), nine.end() - 1);
  CHECK_THROWS_MATCHES(build_ranking_prompt("gold", eight), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::wrong_arity; }));

  auto warned = build_ranking_prompt("", nine);
  REQUIRE_FALSE(warned.warnings.empty());
}

TEST_CASE("ranking replies parse into both orderings") {
  SECTION("two-candidate toy") {
    auto r = parse_ranking("Fact.Cons: R2 > R1; Summ.Qual: R1 > R2");
    CHECK(r.fact_cons == std::vector<std::string>{"R2", "R1"});
    CHECK(r.summ_qual == std::vector<std::string>{"R1", "R2"});
    CHECK(r.top1_fact_cons() == "R2");
    CHECK(r.top1_summ_qual() == "R1");
  }
  SECTION("explanations after the rankings are ignored") {
    auto r = parse_ranking(
        "Fact.Cons: R3 > R1 > R2;\nSumm.Qual: R1 > R3 > R2.\nR3 kept every fact intact while R2 "
        "hallucinated a storm.");
    CHECK(r.fact_cons == std::vector<std::string>{"R3", "R1", "R2"});
    CHECK(r.summ_qual == std::vector<std::string>{"R1", "R3", "R2"});
  }
  SECTION("duplicate labels are malformed") {
    CHECK_THROWS_MATCHES(parse_ranking("Fact.Cons: R1 > R1; Summ.Qual: R1 > R2"), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::malformed_ranking; }));
  }
  SECTION("missing criterion is malformed") {
    CHECK_THROWS_MATCHES(parse_ranking("Fact.Cons: R1 > R2"), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::malformed_ranking; }));
  }
  SECTION("criteria over different label sets are malformed") {
    CHECK_THROWS_MATCHES(parse_ranking("Fact.Cons: R1 > R2; Summ.Qual: R1 > R3"), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::malformed_ranking; }));
  }
}

TEST_CASE("ranking format/parse round-trip over random permutations") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> labels;
    for (int i = 1; i <= 9; ++i) labels.push_back("R" + std::to_string(i));
    Ranking r;
    r.fact_cons = labels;
    std::shuffle(r.fact_cons.begin(), r.fact_cons.end(), rng);
    r.summ_qual = labels;
    std::shuffle(r.summ_qual.begin(), r.summ_qual.end(), rng);
    auto parsed = parse_ranking(format_ranking(r));
    CHECK(parsed.fact_cons == r.fact_cons);
    CHECK(parsed.summ_qual == r.summ_qual);
  }
}
