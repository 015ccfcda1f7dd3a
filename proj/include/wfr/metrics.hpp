#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wfr/error.hpp"
#include "wfr/protocol.hpp"
#include "wfr/report.hpp"
#include "wfr/text.hpp"

namespace wfr {

struct MatchCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

/// Accumulated match counts keyed by (aspect, claim). Merging is additive,
/// so ledgers from parallel shards can be reduced in any order.
class MatchLedger {
 public:
  using Key = std::pair<Aspect, Claim>;

  void add(Aspect a, Claim c, long long tp, long long fp, long long fn) {
    auto& m = counts_[{a, c}];
    m.tp += tp;
    m.fp += fp;
    m.fn += fn;
  }

  void merge(const MatchLedger& other) {
    for (const auto& [k, v] : other.counts_) add(k.first, k.second, v.tp, v.fp, v.fn);
  }

  const std::map<Key, MatchCounts>& counts() const { return counts_; }
  bool empty() const { return counts_.empty(); }

 private:
  std::map<Key, MatchCounts> counts_;
};

/// Per-day set comparison: a claim present on both sides is a true positive,
/// gold-only a false negative, prediction-only a false positive. A claim
/// counts at whichever day it appears; days are matched by position.
inline void accumulate_matches(std::span<const DayAnnotation> pred,
                               std::span<const DayAnnotation> gold,
                               const AnnotationProtocol& protocol, MatchLedger& ledger) {
  require(pred.size() == gold.size(), Errc::length_mismatch,
          "pred has " + std::to_string(pred.size()) + " days, gold has " +
              std::to_string(gold.size()));
  for (size_t i = 0; i < pred.size(); ++i) {
    require(pred[i].date == 0 || gold[i].date == 0 || pred[i].date == gold[i].date,
            Errc::length_mismatch, "day " + std::to_string(i) + " dates differ");
    for (Claim c : gold[i].claims) {
      if (pred[i].claims.count(c))
        ledger.add(protocol.aspect_of(c), c, 1, 0, 0);
      else
        ledger.add(protocol.aspect_of(c), c, 0, 0, 1);
    }
    for (Claim c : pred[i].claims)
      if (!gold[i].claims.count(c)) ledger.add(protocol.aspect_of(c), c, 0, 1, 0);
  }
}

struct GlobalExtractionScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
};

inline double safe_div(double num, double den) { return den > 0 ? num / den : 0.0; }

inline double harmonic_f1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

/// Precision = sum TP / (sum TP + sum FP), recall analogous, F1 the harmonic
/// mean; zero denominators give 0.
inline GlobalExtractionScore global_f1(const MatchLedger& ledger) {
  GlobalExtractionScore s;
  for (const auto& [k, v] : ledger.counts()) {
    s.tp += v.tp;
    s.fp += v.fp;
    s.fn += v.fn;
  }
  s.precision = safe_div(double(s.tp), double(s.tp + s.fp));
  s.recall = safe_div(double(s.tp), double(s.tp + s.fn));
  s.f1 = harmonic_f1(s.precision, s.recall);
  return s;
}

struct WeightedAspectScore {
  Aspect aspect;
  double weighted_precision = 0;
  double weighted_recall = 0;
  double weighted_f1 = 0;
  int claims_counted = 0;
};

struct WeightedSummary {
  double weighted_precision = 0;
  double weighted_recall = 0;
  double weighted_f1 = 0;
};

struct WeightedReport {
  std::vector<WeightedAspectScore> aspects;
  WeightedSummary macro;   // componentwise mean over emitted aspects
  WeightedSummary pooled;  // single weighting over all counted claims
};

namespace detail {

struct ClaimStat {
  double precision;
  double recall;
  double weight;  // 1 / (TP + FN), unnormalized
};

/// Claims with TP + FN = 0 carry an undefined weight and are excluded;
/// precision with TP + FP = 0 is defined as 0.
inline std::vector<ClaimStat> counted_claims(const std::map<MatchLedger::Key, MatchCounts>& counts,
                                             std::optional<Aspect> only) {
  std::vector<ClaimStat> stats;
  for (const auto& [key, v] : counts) {
    if (only && key.first != *only) continue;
    long long support = v.tp + v.fn;
    if (support <= 0) continue;
    stats.push_back({safe_div(double(v.tp), double(v.tp + v.fp)),
                     double(v.tp) / double(support), 1.0 / double(support)});
  }
  return stats;
}

inline WeightedSummary weight_and_sum(const std::vector<ClaimStat>& stats) {
  WeightedSummary s;
  double total = 0;
  for (const auto& c : stats) total += c.weight;
  for (const auto& c : stats) {
    double w = c.weight / total;
    s.weighted_precision += w * c.precision;
    s.weighted_recall += w * c.recall;
  }
  s.weighted_f1 = harmonic_f1(s.weighted_precision, s.weighted_recall);
  return s;
}

}  // namespace detail

/// Inverse-frequency weighted per-aspect scores: each counted claim gets
/// weight 1/(TP+FN), normalized within the aspect; weighted precision and
/// recall are the weight sums and weighted F1 their harmonic mean.
inline WeightedReport weighted_aspect_scores(const MatchLedger& ledger) {
  WeightedReport report;
  for (Aspect a : kAllAspects) {
    auto stats = detail::counted_claims(ledger.counts(), a);
    if (stats.empty()) continue;
    auto s = detail::weight_and_sum(stats);
    report.aspects.push_back(
        {a, s.weighted_precision, s.weighted_recall, s.weighted_f1, int(stats.size())});
  }
  if (!report.aspects.empty()) {
    for (const auto& a : report.aspects) {
      report.macro.weighted_precision += a.weighted_precision;
      report.macro.weighted_recall += a.weighted_recall;
      report.macro.weighted_f1 += a.weighted_f1;
    }
    double n = double(report.aspects.size());
    report.macro.weighted_precision /= n;
    report.macro.weighted_recall /= n;
    report.macro.weighted_f1 /= n;
    report.pooled = detail::weight_and_sum(detail::counted_claims(ledger.counts(), std::nullopt));
  }
  return report;
}

struct HitRateReport {
  std::map<Aspect, double> per_aspect;
  double average = 0;
};

/// Per aspect: (# days the aspect appears on both sides) / (# days it
/// appears in gold). Aspects never present in gold are omitted.
inline HitRateReport hit_rate(std::span<const std::set<Aspect>> pred,
                              std::span<const std::set<Aspect>> gold) {
  require(pred.size() == gold.size(), Errc::length_mismatch, "hit_rate input lengths differ");
  std::map<Aspect, std::pair<long, long>> tallies;  // hits, gold occurrences
  for (size_t i = 0; i < gold.size(); ++i) {
    for (Aspect a : gold[i]) {
      auto& t = tallies[a];
      ++t.second;
      if (pred[i].count(a)) ++t.first;
    }
  }
  HitRateReport r;
  for (const auto& [a, t] : tallies) {
    double rate = double(t.first) / double(t.second);
    r.per_aspect[a] = rate;
    r.average += rate;
  }
  if (!r.per_aspect.empty()) r.average /= double(r.per_aspect.size());
  return r;
}

// ---------------------------------------------------------------------------
// Reference metrics. Tokenization is the shared lowercase word split.

/// Clipped unigram precision times the brevity penalty.
inline double bleu1(std::string_view candidate, std::string_view reference) {
  auto cand = tokenize(candidate);
  auto ref = tokenize(reference);
  if (cand.empty()) return 0.0;
  auto ref_counts = token_counts(ref);
  auto cand_counts = token_counts(cand);
  double clipped = 0;
  for (const auto& [tok, n] : cand_counts) {
    auto it = ref_counts.find(tok);
    if (it != ref_counts.end()) clipped += double(std::min(n, it->second));
  }
  double precision = clipped / double(cand.size());
  double bp = cand.size() > ref.size()
                  ? 1.0
                  : std::exp(1.0 - double(ref.size()) / double(cand.size()));
  return precision * bp;
}

inline size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// LCS F-measure with beta = 1.
inline double rouge_l(std::string_view candidate, std::string_view reference) {
  auto cand = tokenize(candidate);
  auto ref = tokenize(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  double lcs = double(lcs_length(cand, ref));
  double p = lcs / double(cand.size());
  double r = lcs / double(ref.size());
  return harmonic_f1(p, r);
}

namespace detail {

/// Light suffix stemmer for the METEOR stem stage.
inline std::string stem(const std::string& w) {
  auto ends = [&](std::string_view suf) {
    return w.size() > suf.size() + 2 && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends("ing")) return w.substr(0, w.size() - 3);
  if (ends("ed")) return w.substr(0, w.size() - 2);
  if (ends("es")) return w.substr(0, w.size() - 2);
  if (w.size() > 3 && w.back() == 's') return w.substr(0, w.size() - 1);
  return w;
}

/// Greedy unigram alignment: candidate order, preferring the reference slot
/// right after the previous match so identical strings align as one chunk.
inline void align_stage(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                        std::vector<int>& cand_to_ref, std::vector<bool>& ref_used) {
  int last_ref = -1;
  for (size_t i = 0; i < cand.size(); ++i) {
    if (cand_to_ref[i] >= 0) {
      last_ref = cand_to_ref[i];
      continue;
    }
    int pick = -1;
    size_t next = size_t(last_ref + 1);
    if (next < ref.size() && !ref_used[next] && ref[next] == cand[i]) {
      pick = int(next);
    } else {
      for (size_t j = 0; j < ref.size(); ++j)
        if (!ref_used[j] && ref[j] == cand[i]) {
          pick = int(j);
          break;
        }
    }
    if (pick >= 0) {
      cand_to_ref[i] = pick;
      ref_used[size_t(pick)] = true;
      last_ref = pick;
    }
  }
}

}  // namespace detail

/// METEOR without synonym sets: exact then suffix-stem matching,
/// Fmean = P*R / (0.9*P + 0.1*R), penalty = 0.5 * (chunks/matches)^3.
inline double meteor_simplified(std::string_view candidate, std::string_view reference) {
  auto cand = tokenize(candidate);
  auto ref = tokenize(reference);
  if (cand.empty() || ref.empty()) return 0.0;

  std::vector<int> cand_to_ref(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);
  detail::align_stage(cand, ref, cand_to_ref, ref_used);

  std::vector<std::string> cand_stems(cand.size()), ref_stems(ref.size());
  for (size_t i = 0; i < cand.size(); ++i) cand_stems[i] = detail::stem(cand[i]);
  for (size_t j = 0; j < ref.size(); ++j) ref_stems[j] = detail::stem(ref[j]);
  detail::align_stage(cand_stems, ref_stems, cand_to_ref, ref_used);

  long matches = 0;
  for (int m : cand_to_ref)
    if (m >= 0) ++matches;
  if (matches == 0) return 0.0;

  double p = double(matches) / double(cand.size());
  double r = double(matches) / double(ref.size());
  double fmean = p * r / (0.9 * p + 0.1 * r);

  long chunks = 0;
  int prev_ref = -2;
  bool in_chunk = false;
  for (size_t i = 0; i < cand.size(); ++i) {
    if (cand_to_ref[i] < 0) {
      in_chunk = false;
      prev_ref = -2;
      continue;
    }
    if (!in_chunk || cand_to_ref[i] != prev_ref + 1) ++chunks;
    in_chunk = true;
    prev_ref = cand_to_ref[i];
  }
  double frag = double(chunks) / double(matches);
  double penalty = 0.5 * frag * frag * frag;
  return fmean * (1.0 - penalty);
}

// ---------------------------------------------------------------------------
// Grouped breakdowns

struct KeyedLedger {
  std::string city;
  int day_index = 0;  // 0..3
  MatchLedger ledger;
};

struct BreakdownGroup {
  std::map<std::string, std::string> key;  // e.g. {"city": "ALY", "day": "2"}
  WeightedReport report;
};

/// Group weighted scores by any combination of city, day and aspect.
/// Ungrouped (empty key list) equals the global weighted computation.
inline std::vector<BreakdownGroup> breakdown(std::span<const KeyedLedger> records,
                                             std::span<const std::string> keys) {
  bool by_city = false, by_day = false, by_aspect = false;
  for (const auto& k : keys) {
    if (k == "city")
      by_city = true;
    else if (k == "day")
      by_day = true;
    else if (k == "aspect")
      by_aspect = true;
    else
      fail(Errc::unknown_key, "group key " + k + " (expected city, day, aspect)");
  }

  std::map<std::pair<std::string, int>, MatchLedger> grouped;
  for (const auto& rec : records) {
    std::pair<std::string, int> key{by_city ? rec.city : std::string{}, by_day ? rec.day_index : -1};
    grouped[key].merge(rec.ledger);
  }

  std::vector<BreakdownGroup> out;
  for (const auto& [gk, ledger] : grouped) {
    std::map<std::string, std::string> label;
    if (by_city) label["city"] = gk.first;
    if (by_day) label["day"] = std::to_string(gk.second + 1);  // Day 1..4
    if (!by_aspect) {
      out.push_back({label, weighted_aspect_scores(ledger)});
      continue;
    }
    auto full = weighted_aspect_scores(ledger);
    for (const auto& aspect_score : full.aspects) {
      MatchLedger slice;
      for (const auto& [k, v] : ledger.counts())
        if (k.first == aspect_score.aspect) slice.add(k.first, k.second, v.tp, v.fp, v.fn);
      auto sub = label;
      sub["aspect"] = std::string(wire_name(aspect_score.aspect));
      out.push_back({std::move(sub), weighted_aspect_scores(slice)});
    }
  }
  return out;
}

}  // namespace wfr
