#pragma once

#include <optional>
#include <span>
#include <string>

#include "wfr/augmentation.hpp"
#include "wfr/report.hpp"

namespace wfr {

struct PreferencePair {
  std::string instance_id;
  std::string prompt;
  std::string chosen;    // assembled from step-F1 = 1 sub-reports
  std::string rejected;  // assembled from the lowest step-F1 sub-reports
};

/// Build one DPO pair from a scored candidate pool. Per covered day the
/// chosen side takes the first sub-report with step F1 = 1 and the rejected
/// side the minimum-F1 sub-report (earliest on ties). Returns nothing when
/// some covered day has no perfect sub-report or both sides coincide.
inline std::optional<PreferencePair> build_pair(std::span<const CandidateReport> candidates,
                                                std::span<const DayAnnotation> gold,
                                                const InstanceRecord& instance) {
  require(gold.size() == 4, Errc::precondition, "gold must cover the 4 days");
  for (const auto& c : candidates) {
    require(c.days.size() == 4, Errc::precondition, "candidate without 4 days");
    for (const auto& d : c.days)
      require(d.step_f1 >= 0, Errc::precondition, "candidates must be scored first");
  }
  if (candidates.empty()) return std::nullopt;

  auto chosen_days = instance.segmented.days;
  auto rejected_days = instance.segmented.days;
  for (size_t d = 0; d < 4; ++d) {
    if (instance.segmented.days[d].forecast.empty()) continue;  // uncovered day
    const std::string* perfect = nullptr;
    const std::string* worst = nullptr;
    double worst_f1 = 2.0;
    for (const auto& c : candidates) {
      double f1 = c.days[d].step_f1;
      if (!perfect && std::abs(f1 - 1.0) <= 1e-9) perfect = &c.days[d].text;
      if (f1 < worst_f1) {  // strict: earliest candidate wins ties
        worst_f1 = f1;
        worst = &c.days[d].text;
      }
    }
    if (!perfect) return std::nullopt;
    chosen_days[d].forecast = *perfect;
    rejected_days[d].forecast = *worst;
  }

  PreferencePair pair;
  pair.instance_id = instance.id;
  pair.chosen = render_structured(chosen_days);
  pair.rejected = render_structured(rejected_days);
  if (pair.chosen == pair.rejected) return std::nullopt;

  auto spec = prompt_spec_for_instance(instance);
  pair.prompt = build_generation_prompt(spec, focus_complete(spec)).render();
  return pair;
}

inline Json dpo_record_json(const InstanceRecord& inst, const PreferencePair& pair) {
  return Json{{"images", inst.image_refs},
              {"prompt", pair.prompt},
              {"chosen", pair.chosen},
              {"rejected", pair.rejected}};
}

}  // namespace wfr
