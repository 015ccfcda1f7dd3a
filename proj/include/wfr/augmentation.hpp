#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wfr/claims.hpp"
#include "wfr/error.hpp"
#include "wfr/metrics.hpp"
#include "wfr/prompting.hpp"
#include "wfr/report.hpp"
#include "wfr/similarity.hpp"

namespace wfr {

struct CandidateDay {
  std::string text;
  double step_f1 = -1;  // unscored until score_steps runs
};

struct CandidateReport {
  std::string instance_id;
  std::vector<CandidateDay> days;  // 4 entries
  double temperature = 0;
  long long seed = 0;
};

/// Claim F1 of one sampled day against its gold annotation, on a
/// single-day ledger.
inline double day_step_f1(const std::string& text, const DayAnnotation& gold,
                          const AnnotationProtocol& protocol) {
  DailyForecast day;
  day.date = gold.date;
  day.forecast = text;
  DayAnnotation pred = extract_rule_based(day, protocol);
  MatchLedger ledger;
  std::vector<DayAnnotation> p{pred}, g{gold};
  accumulate_matches(p, g, protocol, ledger);
  return global_f1(ledger).f1;
}

inline void score_steps(CandidateReport& candidate, std::span<const DayAnnotation> gold,
                        const AnnotationProtocol& protocol) {
  require(candidate.days.size() == gold.size(), Errc::length_mismatch,
          "candidate has " + std::to_string(candidate.days.size()) + " days");
  for (size_t d = 0; d < gold.size(); ++d)
    candidate.days[d].step_f1 = day_step_f1(candidate.days[d].text, gold[d], protocol);
}

/// Keep only daily sub-reports whose step-level F1 is exactly 1,
/// candidate order preserved.
inline std::map<int, std::vector<std::string>> step_filter(
    std::span<const CandidateReport> candidates) {
  std::map<int, std::vector<std::string>> kept;
  for (const auto& c : candidates)
    for (size_t d = 0; d < c.days.size(); ++d)
      if (std::abs(c.days[d].step_f1 - 1.0) <= 1e-9) kept[int(d)].push_back(c.days[d].text);
  return kept;
}

enum class DiversityStrategy { EditDistance, TfIdfCosine, Jaccard, EmbeddingCosine };

inline std::optional<DiversityStrategy> parse_strategy(std::string_view name) {
  std::string c = canon_label(name);
  if (c == "edit" || c == "edit_distance") return DiversityStrategy::EditDistance;
  if (c == "tfidf" || c == "tf_idf" || c == "tfidf_cosine") return DiversityStrategy::TfIdfCosine;
  if (c == "jaccard") return DiversityStrategy::Jaccard;
  if (c == "embedding" || c == "embedding_cosine") return DiversityStrategy::EmbeddingCosine;
  return std::nullopt;
}

inline std::string_view strategy_name(DiversityStrategy s) {
  switch (s) {
    case DiversityStrategy::EditDistance: return "edit_distance";
    case DiversityStrategy::TfIdfCosine: return "tfidf_cosine";
    case DiversityStrategy::Jaccard: return "jaccard";
    case DiversityStrategy::EmbeddingCosine: return "embedding_cosine";
  }
  return "";
}

/// Distance of a candidate from the reference under one strategy. TF-IDF
/// fits its document frequencies over the candidate pool plus the reference;
/// the embedding strategy defers to the supplied embedder.
inline double diversity_distance(const std::string& candidate, const std::string& reference,
                                 DiversityStrategy strategy,
                                 const std::vector<std::string>* corpus = nullptr,
                                 const Embedder* embedder = nullptr) {
  switch (strategy) {
    case DiversityStrategy::EditDistance:
      return double(levenshtein(candidate, reference));
    case DiversityStrategy::Jaccard:
      return jaccard_distance(candidate, reference);
    case DiversityStrategy::TfIdfCosine: {
      if (!corpus) fail(Errc::missing_corpus, "tf-idf distance needs the candidate pool");
      std::vector<std::string> docs(*corpus);
      docs.push_back(reference);
      auto model = TfIdfModel::fit(docs);
      return 1.0 - model.cosine(candidate, reference);
    }
    case DiversityStrategy::EmbeddingCosine: {
      if (!embedder || !*embedder)
        fail(Errc::missing_embedder, "embedding distance needs an embedder");
      return 1.0 - dense_cosine((*embedder)(candidate), (*embedder)(reference));
    }
  }
  return 0;
}

/// The k pool members farthest from the reference; ties keep the earlier
/// pool entry. Returned distances are non-increasing.
inline std::vector<std::string> select_diverse(std::span<const std::string> pool,
                                               const std::string& reference,
                                               DiversityStrategy strategy, size_t k,
                                               const std::vector<std::string>* corpus = nullptr,
                                               const Embedder* embedder = nullptr) {
  require(k >= 1, Errc::precondition, "select_diverse needs k >= 1");
  std::vector<std::pair<double, size_t>> scored;
  if (strategy == DiversityStrategy::TfIdfCosine && !corpus)
    fail(Errc::missing_corpus, "tf-idf selection needs the candidate pool");
  std::optional<TfIdfModel> model;
  if (strategy == DiversityStrategy::TfIdfCosine) {
    std::vector<std::string> docs(corpus->begin(), corpus->end());
    docs.push_back(reference);
    model = TfIdfModel::fit(docs);
  }
  std::optional<std::vector<double>> ref_vec;
  if (strategy == DiversityStrategy::EmbeddingCosine) {
    if (!embedder || !*embedder) fail(Errc::missing_embedder, "embedding selection needs an embedder");
    ref_vec = (*embedder)(reference);
  }
  for (size_t i = 0; i < pool.size(); ++i) {
    double d;
    switch (strategy) {
      case DiversityStrategy::TfIdfCosine:
        d = 1.0 - model->cosine(pool[i], reference);
        break;
      case DiversityStrategy::EmbeddingCosine:
        d = 1.0 - dense_cosine((*embedder)(pool[i]), *ref_vec);
        break;
      default:
        d = diversity_distance(pool[i], reference, strategy);
    }
    scored.emplace_back(d, i);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;  // earlier pool entry wins ties
  });
  std::vector<std::string> out;
  for (size_t i = 0; i < scored.size() && i < k; ++i)
    out.push_back(pool[scored[i].second]);
  return out;
}

/// Randomly reassemble selected sub-reports into full reports. Drawing per
/// day is uniform without replacement until a pool is exhausted; assemblies
/// are distinct index tuples; the gold report itself always comes first.
inline std::vector<std::string> assemble_rft(const InstanceRecord& base,
                                             const std::map<int, std::vector<std::string>>& per_day,
                                             size_t max_reports, std::uint64_t seed) {
  std::vector<int> covered;
  for (int d = 0; d < 4; ++d)
    if (!base.segmented.days[size_t(d)].forecast.empty()) covered.push_back(d);
  if (covered.empty()) fail(Errc::empty_day, "instance " + base.id + " has no covered days");

  std::map<int, std::vector<std::string>> options;
  for (int d : covered) {
    auto it = per_day.find(d);
    if (it != per_day.end() && !it->second.empty())
      options[d] = it->second;
    else
      options[d] = {base.segmented.days[size_t(d)].forecast};  // gold fallback
    if (options[d].empty()) fail(Errc::empty_day, "day " + std::to_string(d) + " has no texts");
  }

  std::mt19937_64 rng(seed);
  std::map<int, std::set<size_t>> used;
  std::set<std::vector<size_t>> seen_tuples;
  std::set<std::string> seen_texts;

  auto render_with = [&](const std::vector<size_t>& tuple) {
    auto days = base.segmented.days;
    for (size_t i = 0; i < covered.size(); ++i)
      days[size_t(covered[i])].forecast = options[covered[i]][tuple[i]];
    return render_structured(days);
  };

  std::vector<std::string> reports;
  reports.push_back(render_structured(base.segmented.days));  // gold first
  seen_texts.insert(reports.back());

  for (size_t n = 0; n < max_reports; ++n) {
    std::vector<size_t> tuple;
    for (int d : covered) {
      const auto& pool = options[d];
      std::vector<size_t> unused;
      for (size_t i = 0; i < pool.size(); ++i)
        if (!used[d].count(i)) unused.push_back(i);
      size_t pick;
      if (!unused.empty()) {
        pick = unused[std::uniform_int_distribution<size_t>(0, unused.size() - 1)(rng)];
      } else {
        pick = std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng);
      }
      used[d].insert(pick);
      tuple.push_back(pick);
    }
    std::string text = render_with(tuple);
    int tries = 0;
    while ((seen_tuples.count(tuple) || seen_texts.count(text)) && tries < 64) {
      for (size_t i = 0; i < covered.size(); ++i) {
        const auto& pool = options[covered[i]];
        tuple[i] = std::uniform_int_distribution<size_t>(0, pool.size() - 1)(rng);
      }
      text = render_with(tuple);
      ++tries;
    }
    if (seen_tuples.count(tuple) || seen_texts.count(text)) break;  // space exhausted
    seen_tuples.insert(tuple);
    seen_texts.insert(text);
    reports.push_back(std::move(text));
  }
  return reports;
}

/// Prompt spec for an instance; focus aspects come from the gold
/// annotations when present.
inline PromptSpec prompt_spec_for_instance(const InstanceRecord& inst) {
  PromptSpec spec;
  spec.city = inst.city.empty() ? inst.station : inst.city;
  spec.issue_time = inst.time;
  for (size_t d = 0; d < 4; ++d) {
    FocusDay day;
    day.date = inst.segmented.days[d].date;
    day.weekday = inst.segmented.days[d].weekday;
    if (d < inst.annotations.size())
      day.focus.assign(inst.annotations[d].aspects.begin(), inst.annotations[d].aspects.end());
    spec.days[d] = std::move(day);
  }
  return spec;
}

inline bool focus_complete(const PromptSpec& spec) {
  for (const auto& d : spec.days)
    if (d.focus.empty()) return false;
  return true;
}

/// One RFT dataset row: the instance's images, its generation prompt and
/// the N report variants.
inline Json rft_record_json(const InstanceRecord& inst, std::span<const std::string> reports) {
  auto spec = prompt_spec_for_instance(inst);
  auto bundle = build_generation_prompt(spec, focus_complete(spec));
  Json arr = Json::array();
  for (const auto& r : reports) arr.push_back(r);
  return Json{{"images", inst.image_refs}, {"prompt", bundle.render()}, {"reports", arr}};
}

}  // namespace wfr
