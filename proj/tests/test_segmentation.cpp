#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/fixtures.hpp"
#include "wfr/segmentation.hpp"

using namespace wfr;

TEST_CASE("anchors resolve weekday and relative day mentions") {
  auto report = fixtures::synopsis_report();
  auto anchors = detect_anchors(report.body, report.issued_at);
  REQUIRE(anchors.size() == 4);
  CHECK(anchors[0].mention == "tonight");
  CHECK(anchors[0].date == 20190927);
  CHECK(anchors[1].mention == "Saturday");
  CHECK(anchors[1].date == 20190928);
  CHECK(anchors[2].mention == "Sunday");
  CHECK(anchors[2].date == 20190929);
  CHECK(anchors[3].mention == "Monday");
  CHECK(anchors[3].date == 20190930);
  // sorted by span start, spans inside the body
  for (size_t i = 0; i + 1 < anchors.size(); ++i) CHECK(anchors[i].begin < anchors[i + 1].begin);
  for (const auto& a : anchors) {
    CHECK(a.end <= report.body.size());
    CHECK(report.body.substr(a.begin, a.end - a.begin) == a.mention);
  }
}

TEST_CASE("weekday mention on its own day resolves to the issue date") {
  Timestamp fri = parse_timestamp("2019-09-27T03:40:00-04:00");
  auto anchors = detect_anchors("Friday stays dry. More rain tomorrow.", fri);
  REQUIRE(anchors.size() == 2);
  CHECK(anchors[0].date == 20190927);  // Friday issued on a Friday
  CHECK(anchors[1].date == 20190928);  // tomorrow
}

TEST_CASE("anchor detection on text without day words") {
  Timestamp fri = parse_timestamp("2019-09-27T03:40:00-04:00");
  CHECK(detect_anchors("Rain likely. Gusty winds near the coast.", fri).empty());
}

TEST_CASE("today and this-morning variants map to the issue date") {
  Timestamp ts = parse_timestamp("2021-06-04T06:00:00-04:00");
  auto anchors = detect_anchors("Today starts cool. This afternoon turns humid. Tonight clears.", ts);
  REQUIRE(anchors.size() == 3);
  for (const auto& a : anchors) CHECK(a.date == 20210604);
}

TEST_CASE("rule-based segmentation assigns sentences to anchored dates") {
  auto report = fixtures::synopsis_report();
  auto anchors = detect_anchors(report.body, report.issued_at);
  RuleBasedSegmenter backend;
  auto seg = segment(report, anchors, backend);

  CHECK(seg.coverage == 4);
  CHECK(seg.days[0].date == 20190927);
  CHECK(seg.days[0].weekday == "Friday");
  CHECK(seg.days[3].date == 20190930);
  CHECK(seg.days[3].weekday == "Monday");
  CHECK(seg.days[0].forecast ==
        "A high pressure ridge over New England will bring mainly fair and cool weather tonight.");
  CHECK(seg.days[1].forecast ==
        "On Saturday, a warm front followed by a cold front will bring a threat of showers and "
        "thunderstorms.");
  CHECK(seg.days[2].forecast ==
        "On Sunday, high pressure building in from Ontario will bring fair and cool weather.");
  CHECK(seg.days[3].forecast ==
        "Monday will start out fair, but an approaching warm front may bring a few showers late "
        "in the day.");
}

TEST_CASE("sentences without anchors fall to the issue day") {
  RawReport r;
  r.station = "ALY";
  r.issued_at = parse_timestamp("2019-09-27T03:40:00-04:00");
  r.body = "Rain moves in late.";
  auto anchors = detect_anchors(r.body, r.issued_at);
  RuleBasedSegmenter backend;
  auto seg = segment(r, anchors, backend);
  CHECK(seg.coverage == 1);
  CHECK(seg.days[0].forecast == "Rain moves in late.");
  CHECK(seg.days[1].forecast.empty());
}

TEST_CASE("degenerate body yields NoCoverage") {
  RawReport r;
  r.station = "ALY";
  r.issued_at = parse_timestamp("2019-09-27T03:40:00-04:00");
  r.body = "...";
  RuleBasedSegmenter backend;
  CHECK_THROWS_MATCHES(segment(r, {}, backend), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::no_coverage; }));
}

TEST_CASE("segment dates are always issue date plus 0..3") {
  std::mt19937_64 rng(11);
  std::vector<std::string> sentences{
      "Rain with gusty winds Saturday.", "High pressure returns Sunday.",
      "Cooler Monday.",                  "Snow showers tonight.",
      "A cold front crosses tomorrow.",  "Dry air lingers today.",
  };
  RuleBasedSegmenter backend;
  for (int trial = 0; trial < 100; ++trial) {
    RawReport r;
    r.station = "BOX";
    r.issued_at = parse_timestamp("2021-03-05T04:15:00-05:00");
    std::shuffle(sentences.begin(), sentences.end(), rng);
    r.body = sentences[0] + " " + sentences[1] + " " + sentences[2];
    auto anchors = detect_anchors(r.body, r.issued_at);
    auto seg = segment(r, anchors, backend);
    Date issue = r.issued_at.local_date();
    for (int d = 0; d < 4; ++d)
      CHECK(seg.days[size_t(d)].date == date_to_yyyymmdd(add_days(issue, d)));
  }
}

TEST_CASE("rule-based segmentation is deterministic") {
  auto report = fixtures::synopsis_report();
  auto anchors = detect_anchors(report.body, report.issued_at);
  RuleBasedSegmenter backend;
  auto a = segment(report, anchors, backend);
  auto b = segment(report, anchors, backend);
  for (int d = 0; d < 4; ++d) CHECK(a.days[size_t(d)] == b.days[size_t(d)]);
}

TEST_CASE("coverage filter keeps three or four covered days") {
  SegmentedReport seg;
  seg.coverage = 4;
  CHECK(coverage_filter(seg));
  seg.coverage = 3;
  CHECK(coverage_filter(seg));
  seg.coverage = 2;
  CHECK_FALSE(coverage_filter(seg));
}

TEST_CASE("LLM-backed segmentation consumes the reference reply") {
  auto report = fixtures::synopsis_report();
  auto anchors = detect_anchors(report.body, report.issued_at);
  LlmSegmenter backend([](const std::string& system, const std::string& user) {
    CHECK(system.find("STRICT RULES") != std::string::npos);
    CHECK(user.find("ORIGINAL FORECAST TEXT") != std::string::npos);
    return fixtures::reference_segmentation_reply();
  });
  auto seg = segment(report, anchors, backend);
  auto expect = fixtures::reference_day_texts();
  for (int d = 0; d < 4; ++d) CHECK(seg.days[size_t(d)].forecast == expect[size_t(d)]);
  CHECK(seg.coverage == 4);
}

TEST_CASE("LLM segmenter failures surface as backend errors") {
  auto report = fixtures::synopsis_report();
  SECTION("transport failure") {
    LlmSegmenter backend([](const std::string&, const std::string&) -> std::string {
      throw std::runtime_error("connection refused");
    });
    CHECK_THROWS_MATCHES(segment(report, {}, backend), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::backend_error; }));
  }
  SECTION("non-JSON reply") {
    LlmSegmenter backend([](const std::string&, const std::string&) {
      return std::string("I cannot help with that.");
    });
    CHECK_THROWS_MATCHES(segment(report, {}, backend), Error,
                         Catch::Matchers::Predicate<Error>(
                             [](const Error& e) { return e.code() == Errc::backend_error; }));
  }
}

TEST_CASE("verification accepts the reference split") {
  auto report = fixtures::synopsis_report();
  auto anchors = detect_anchors(report.body, report.issued_at);
  LlmSegmenter backend(
      [](const std::string&, const std::string&) { return fixtures::reference_segmentation_reply(); });
  auto seg = segment(report, anchors, backend);
  auto vr = verify(report, seg, anchors);
  CHECK(vr.passed);
  for (int d = 0; d < 4; ++d) {
    CHECK(vr.substring_ok[size_t(d)]);
    CHECK(vr.dates_ok[size_t(d)]);
  }
}

TEST_CASE("verification rejects fabricated content") {
  auto report = fixtures::synopsis_report();
  auto anchors = detect_anchors(report.body, report.issued_at);
  RuleBasedSegmenter backend;
  auto seg = segment(report, anchors, backend);
  seg.days[1].forecast = "Tornado outbreak expected.";
  auto vr = verify(report, seg, anchors);
  CHECK_FALSE(vr.substring_ok[1]);
  CHECK_FALSE(vr.passed);
}

TEST_CASE("verification rejects out-of-window dates") {
  auto report = fixtures::synopsis_report();
  auto anchors = detect_anchors(report.body, report.issued_at);
  RuleBasedSegmenter backend;
  auto seg = segment(report, anchors, backend);
  seg.days[2].date = 20191002;  // issue date + 5
  auto vr = verify(report, seg, anchors);
  CHECK_FALSE(vr.dates_ok[2]);
  CHECK_FALSE(vr.passed);
}

TEST_CASE("rule-based output always passes the word containment check") {
  std::mt19937_64 rng(23);
  std::vector<std::string> sentences{
      "Showers and storms develop Saturday.",  "The high builds in on Sunday.",
      "Monday turns breezy and warmer.",       "Snow flurries linger tonight.",
      "A backdoor cold front stalls tomorrow.",
  };
  RuleBasedSegmenter backend;
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(sentences.begin(), sentences.end(), rng);
    RawReport r;
    r.station = "BTV";
    r.issued_at = parse_timestamp("2020-11-20T04:00:00-05:00");
    r.body = sentences[0] + " " + sentences[1] + " " + sentences[2] + " " + sentences[3];
    auto anchors = detect_anchors(r.body, r.issued_at);
    auto seg = segment(r, anchors, backend);
    auto vr = verify(r, seg, anchors);
    for (int d = 0; d < 4; ++d) CHECK(vr.substring_ok[size_t(d)]);
  }
}
