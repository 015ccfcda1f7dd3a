// wfrkit: corpus construction and evaluation pipeline for weather forecast
// report generation. Subcommands cover archive fetch, report segmentation,
// claim annotation, scoring, RFT/DPO dataset builds and prompt construction.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wfr/augmentation.hpp"
#include "wfr/claims.hpp"
#include "wfr/error.hpp"
#include "wfr/gateway.hpp"
#include "wfr/ingestion.hpp"
#include "wfr/jsonl.hpp"
#include "wfr/manifest.hpp"
#include "wfr/metrics.hpp"
#include "wfr/preference.hpp"
#include "wfr/prompting.hpp"
#include "wfr/protocol.hpp"
#include "wfr/report.hpp"
#include "wfr/segmentation.hpp"
#include "wfr/similarity.hpp"
#include "wfr/stations.hpp"

namespace fs = std::filesystem;
using namespace wfr;

namespace {

struct CommonOpts {
  std::string protocol_file;
  std::string stations_file;

  AnnotationProtocol protocol() const {
    return protocol_file.empty() ? AnnotationProtocol::default_instance()
                                 : AnnotationProtocol::load(protocol_file);
  }
  StationTable stations() const {
    return stations_file.empty() ? StationTable::default_instance()
                                 : StationTable::load(stations_file);
  }
};

struct BackendOpts {
  std::string backend = "rule";  // rule | mock | llm
  std::string base_url;
  std::string model;
  std::string api_key_env = "WFR_API_KEY";
  std::string journal;
  double temperature = 0.3;
  int top_k = 50;
  double top_p = 0.9;
  int max_tokens = 400;
  int parallelism = 4;
  int retry_budget = 2;
  int image_cap = 0;

  BackendConfig to_config() const {
    BackendConfig cfg;
    cfg.base_url = base_url;
    cfg.model = model;
    cfg.api_key_env = api_key_env;
    cfg.journal_path = journal;
    cfg.temperature = temperature;
    cfg.top_k = top_k;
    cfg.top_p = top_p;
    cfg.max_tokens = max_tokens;
    cfg.parallelism = parallelism;
    cfg.retry_budget = retry_budget;
    cfg.image_cap = image_cap;
    return cfg;
  }
};

void add_backend_flags(CLI::App* cmd, BackendOpts& opts) {
  cmd->add_option("--backend", opts.backend, "rule, mock or llm")
      ->check(CLI::IsMember({"rule", "mock", "llm"}));
  cmd->add_option("--base-url", opts.base_url, "chat endpoint base URL for --backend llm");
  cmd->add_option("--model", opts.model, "model name for --backend llm");
  cmd->add_option("--api-key-env", opts.api_key_env, "env var holding the API key");
  cmd->add_option("--journal", opts.journal, "append request journal to this JSONL file");
  cmd->add_option("--temperature", opts.temperature, "sampling temperature");
  cmd->add_option("--top-k", opts.top_k, "top-k sampling cutoff");
  cmd->add_option("--top-p", opts.top_p, "nucleus sampling mass");
  cmd->add_option("--max-tokens", opts.max_tokens, "completion token limit");
  cmd->add_option("--parallelism", opts.parallelism, "max in-flight requests");
  cmd->add_option("--retry-budget", opts.retry_budget, "retries after the first attempt");
  cmd->add_option("--image-cap", opts.image_cap, "per-request image limit (0 = unlimited)");
}

std::string instance_id(const RawReport& r) {
  return r.station + "_" + format_utc_compact(r.issued_at.utc);
}

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_manifest_for(const std::string& command, const nlohmann::ordered_json& config,
                        const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs,
                        double wall_ms) {
  if (outputs.empty()) return;
  RunManifest m;
  m.command = command;
  m.config = config;
  for (const auto& p : inputs)
    if (fs::exists(p)) m.add_input(p);
  for (const auto& p : outputs)
    if (fs::exists(p)) m.add_output(p);
  m.wall_ms = wall_ms;
  m.write(outputs.front().string() + ".manifest.json");
}

// ---------------------------------------------------------------------------
// fetch

int cmd_fetch(const CommonOpts& common, const std::string& station, const std::string& start,
              const std::string& end, const std::string& endpoint, const std::string& cache_dir,
              const std::string& out, bool dedup) {
  Timer timer;
  require(!endpoint.empty(), Errc::config_error, "no archive endpoint (--endpoint or WFR_AFOS_URL)");
  auto parse_day = [](const std::string& s) {
    auto ts = parse_timestamp(s + "T00:00:00Z");
    return ts.local_date();
  };
  auto stations = common.stations();
  FetchOptions opts;
  if (!cache_dir.empty()) opts.cache_dir = cache_dir;
  auto reports = fetch_reports(station, parse_day(start), parse_day(end), endpoint, stations, opts);
  if (dedup) reports = dedup_daily(reports);

  std::vector<Json> lines;
  for (const auto& r : reports) {
    auto rec = to_json(r);
    auto rec_align = align_era5(r, stations.at(station).tz);
    rec["era5_utc"] = format_utc(rec_align.era5_utc);
    rec["era5_matched"] = rec_align.matched;
    lines.push_back(std::move(rec));
  }
  write_jsonl(out, lines);
  std::fprintf(stderr, "fetch: %zu report(s) -> %s\n", reports.size(), out.c_str());
  write_manifest_for("fetch",
                     {{"station", station}, {"start", start}, {"end", end}, {"dedup", dedup}},
                     {}, {out}, timer.ms());
  return 0;
}

// ---------------------------------------------------------------------------
// segment

int cmd_segment(const CommonOpts& common, const BackendOpts& backend_opts,
                const std::string& reports_file, const std::string& out,
                const std::string& review_out, bool apply_coverage_filter) {
  Timer timer;
  (void)common;
  auto lines = read_jsonl(reports_file);

  std::optional<Gateway> gateway;
  if (backend_opts.backend == "llm") {
    require(!backend_opts.base_url.empty(), Errc::config_error, "--backend llm needs --base-url");
    gateway.emplace(backend_opts.to_config());
  }

  std::vector<Json> segmented, review;
  size_t skipped_coverage = 0, skipped_empty = 0;
  for (const auto& line : lines) {
    RawReport report = raw_report_from_json(line);
    auto anchors = detect_anchors(report.body, report.issued_at);

    SegmentedReport seg;
    try {
      if (backend_opts.backend == "rule") {
        RuleBasedSegmenter rule;
        seg = segment(report, anchors, rule);
      } else if (backend_opts.backend == "mock") {
        // Drives the LLM code path against an in-process stand-in that runs
        // the deterministic segmenter and answers in the wire format.
        LlmSegmenter mock([&report, &anchors](const std::string&, const std::string&) {
          RuleBasedSegmenter rule;
          auto seg_inner = segment(report, anchors, rule);
          Json days = Json::array();
          for (const auto& d : seg_inner.days) days.push_back(to_json(d));
          return Json{{"daily_forecast", days}}.dump();
        });
        seg = segment(report, anchors, mock);
      } else {
        LlmSegmenter llm(gateway->chat_fn());
        seg = segment(report, anchors, llm);
      }
    } catch (const Error& e) {
      if (e.code() == Errc::no_coverage) {
        ++skipped_empty;
        continue;
      }
      throw;
    }

    if (apply_coverage_filter && !coverage_filter(seg)) {
      ++skipped_coverage;
      continue;
    }
    auto vr = verify(report, seg, anchors);
    if (!vr.passed) {
      Json entry{{"report", instance_id(report)}};
      entry.update(to_json(vr));
      review.push_back(std::move(entry));
      continue;
    }
    segmented.push_back(to_json(seg));
  }

  write_jsonl(out, segmented);
  if (!review_out.empty()) write_jsonl(review_out, review);
  std::fprintf(stderr,
               "segment: %zu kept, %zu to review, %zu below coverage, %zu without content\n",
               segmented.size(), review.size(), skipped_coverage, skipped_empty);
  std::vector<fs::path> outputs{out};
  if (!review_out.empty()) outputs.push_back(review_out);
  write_manifest_for("segment",
                     {{"backend", backend_opts.backend},
                      {"coverage_filter", apply_coverage_filter},
                      {"reports", reports_file}},
                     {reports_file}, outputs, timer.ms());
  return 0;
}

// ---------------------------------------------------------------------------
// annotate

int cmd_annotate(const CommonOpts& common, const BackendOpts& backend_opts,
                 const std::string& segments_file, const std::string& out,
                 const std::string& instances_out, const std::string& images_dir, bool with_text,
                 int retries) {
  Timer timer;
  auto protocol = common.protocol();
  auto lines = read_jsonl(segments_file);

  std::optional<Gateway> gateway;
  if (backend_opts.backend == "llm") {
    require(!backend_opts.base_url.empty(), Errc::config_error, "--backend llm needs --base-url");
    gateway.emplace(backend_opts.to_config());
  }

  std::vector<Json> ann_lines, inst_lines;
  for (const auto& line : lines) {
    SegmentedReport seg = segmented_report_from_json(line);
    std::string id = instance_id(seg.source);
    std::vector<DayAnnotation> annotations;
    for (size_t d = 0; d < 4; ++d) {
      const auto& day = seg.days[d];
      DayAnnotation ann;
      if (backend_opts.backend == "rule") {
        ann = extract_rule_based(day, protocol);
      } else if (backend_opts.backend == "mock") {
        ChatFn mock = [&day, &protocol](const std::string&, const std::string&) {
          auto inner = extract_rule_based(day, protocol);
          return Json::array({to_json(inner)}).dump();
        };
        ann = extract_llm_repaired(day, protocol, mock, retries);
      } else {
        ann = extract_llm_repaired(day, protocol, gateway->chat_fn(), retries);
      }
      annotations.push_back(ann);

      Json rec = to_json(ann);
      rec["weekday"] = day.weekday;
      rec["instance"] = id;
      rec["city"] = seg.source.city;
      rec["day"] = int(d);
      if (with_text) rec["forecast"] = day.forecast;
      ann_lines.push_back(std::move(rec));
    }
    if (!instances_out.empty()) {
      InstanceRecord inst;
      inst.id = id;
      inst.station = seg.source.station;
      inst.city = seg.source.city;
      inst.time = seg.source.issued_at;
      for (int k = 0; k < 12; ++k) {
        char name[16];
        std::snprintf(name, sizeof(name), "_%02d.png", k);
        fs::path base = images_dir.empty() ? fs::path("images") : fs::path(images_dir);
        inst.image_refs.push_back((base / (id + name)).string());
      }
      inst.segmented = seg;
      inst.annotations = annotations;
      inst_lines.push_back(to_json(inst));
    }
  }

  write_jsonl(out, ann_lines);
  if (!instances_out.empty()) write_jsonl(instances_out, inst_lines);
  std::fprintf(stderr, "annotate: %zu day annotation(s) -> %s\n", ann_lines.size(), out.c_str());
  std::vector<fs::path> outputs{out};
  if (!instances_out.empty()) outputs.push_back(instances_out);
  write_manifest_for("annotate",
                     {{"backend", backend_opts.backend}, {"segments", segments_file},
                      {"with_text", with_text}},
                     {segments_file}, outputs, timer.ms());
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate / hit-rate

struct AnnLine {
  DayAnnotation ann;
  std::string city;
  int day_index = 0;
  std::string forecast;
  bool has_text = false;
};

std::vector<AnnLine> load_annotation_lines(const std::string& path) {
  std::vector<AnnLine> out;
  for (const auto& j : read_jsonl(path)) {
    AnnLine line;
    line.ann = day_annotation_from_json(j);
    line.city = j.value("city", "");
    line.day_index = j.value("day", 0);
    if (j.contains("forecast")) {
      line.forecast = j.at("forecast").get<std::string>();
      line.has_text = true;
    }
    out.push_back(std::move(line));
  }
  return out;
}

Json weighted_report_json(const WeightedReport& rep) {
  Json aspects = Json::array();
  for (const auto& a : rep.aspects)
    aspects.push_back(Json{{"aspect", std::string(wire_name(a.aspect))},
                           {"weighted_precision", a.weighted_precision},
                           {"weighted_recall", a.weighted_recall},
                           {"weighted_f1", a.weighted_f1},
                           {"claims_counted", a.claims_counted}});
  auto summary = [](const WeightedSummary& s) {
    return Json{{"weighted_precision", s.weighted_precision},
                {"weighted_recall", s.weighted_recall},
                {"weighted_f1", s.weighted_f1}};
  };
  return Json{{"aspects", aspects}, {"macro", summary(rep.macro)}, {"pooled", summary(rep.pooled)}};
}

void print_weighted_table(const WeightedReport& rep, const GlobalExtractionScore& global) {
  std::printf("%-18s %10s %10s %10s %8s\n", "aspect", "w-prec", "w-recall", "w-f1", "claims");
  for (const auto& a : rep.aspects)
    std::printf("%-18s %10.4f %10.4f %10.4f %8d\n", std::string(display_name(a.aspect)).c_str(),
                a.weighted_precision, a.weighted_recall, a.weighted_f1, a.claims_counted);
  std::printf("%-18s %10.4f %10.4f %10.4f\n", "macro average", rep.macro.weighted_precision,
              rep.macro.weighted_recall, rep.macro.weighted_f1);
  std::printf("%-18s %10.4f %10.4f %10.4f\n", "pooled", rep.pooled.weighted_precision,
              rep.pooled.weighted_recall, rep.pooled.weighted_f1);
  std::printf("%-18s %10.4f %10.4f %10.4f   (tp=%lld fp=%lld fn=%lld)\n", "global",
              global.precision, global.recall, global.f1, global.tp, global.fp, global.fn);
}

int cmd_evaluate(const CommonOpts& common, const std::string& pred_file,
                 const std::string& gold_file, const std::string& group_by,
                 const std::string& out) {
  Timer timer;
  auto protocol = common.protocol();
  auto pred = load_annotation_lines(pred_file);
  auto gold = load_annotation_lines(gold_file);
  require(pred.size() == gold.size(), Errc::length_mismatch,
          "pred has " + std::to_string(pred.size()) + " lines, gold has " +
              std::to_string(gold.size()));

  MatchLedger ledger;
  std::vector<KeyedLedger> keyed;
  double bleu_sum = 0, rouge_sum = 0, meteor_sum = 0;
  size_t text_days = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    std::vector<DayAnnotation> p{pred[i].ann}, g{gold[i].ann};
    accumulate_matches(p, g, protocol, ledger);
    KeyedLedger k;
    k.city = gold[i].city;
    k.day_index = gold[i].day_index;
    accumulate_matches(p, g, protocol, k.ledger);
    keyed.push_back(std::move(k));
    if (pred[i].has_text && gold[i].has_text) {
      bleu_sum += bleu1(pred[i].forecast, gold[i].forecast);
      rouge_sum += rouge_l(pred[i].forecast, gold[i].forecast);
      meteor_sum += meteor_simplified(pred[i].forecast, gold[i].forecast);
      ++text_days;
    }
  }

  auto global = global_f1(ledger);
  auto weighted = weighted_aspect_scores(ledger);

  Json report{{"global",
               {{"precision", global.precision},
                {"recall", global.recall},
                {"f1", global.f1},
                {"tp", global.tp},
                {"fp", global.fp},
                {"fn", global.fn}}},
              {"weighted", weighted_report_json(weighted)}};
  if (text_days > 0) {
    double n = double(text_days);
    report["reference"] = Json{{"bleu1", bleu_sum / n},
                               {"rouge_l", rouge_sum / n},
                               {"meteor_simplified", meteor_sum / n},
                               {"days_scored", text_days}};
  }

  if (!group_by.empty()) {
    std::vector<std::string> keys;
    for (auto&& part : CLI::detail::split(group_by, ',')) keys.push_back(part);
    Json groups = Json::array();
    for (const auto& g : breakdown(keyed, keys)) {
      Json row{{"key", g.key}};
      row.update(weighted_report_json(g.report));
      groups.push_back(std::move(row));
    }
    report["groups"] = std::move(groups);
  }

  print_weighted_table(weighted, global);
  if (text_days > 0)
    std::printf("%-18s %10.4f %10.4f %10.4f   (BLEU-1 / ROUGE-L / METEOR over %zu days)\n",
                "reference", bleu_sum / double(text_days), rouge_sum / double(text_days),
                meteor_sum / double(text_days), text_days);

  if (!out.empty()) {
    std::ofstream f(out);
    f << report.dump(2) << "\n";
    write_manifest_for("evaluate", {{"pred", pred_file}, {"gold", gold_file}, {"group_by", group_by}},
                       {pred_file, gold_file}, {out}, timer.ms());
  }
  return 0;
}

int cmd_hit_rate(const CommonOpts&, const std::string& pred_file, const std::string& gold_file,
                 const std::string& out) {
  Timer timer;
  auto pred = load_annotation_lines(pred_file);
  auto gold = load_annotation_lines(gold_file);
  std::vector<std::set<Aspect>> p, g;
  for (const auto& line : pred) p.push_back(line.ann.aspects);
  for (const auto& line : gold) g.push_back(line.ann.aspects);
  auto rates = hit_rate(p, g);

  std::printf("%-18s %10s\n", "aspect", "hit rate");
  Json per = Json::object();
  for (const auto& [aspect, rate] : rates.per_aspect) {
    std::printf("%-18s %10.4f\n", std::string(display_name(aspect)).c_str(), rate);
    per[std::string(wire_name(aspect))] = rate;
  }
  std::printf("%-18s %10.4f\n", "average", rates.average);

  if (!out.empty()) {
    std::ofstream f(out);
    f << Json{{"per_aspect", per}, {"average", rates.average}}.dump(2) << "\n";
    write_manifest_for("hit-rate", {{"pred", pred_file}, {"gold", gold_file}},
                       {pred_file, gold_file}, {out}, timer.ms());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// rft-build / dpo-build

std::map<std::string, std::vector<CandidateReport>> load_candidates(const std::string& path) {
  std::map<std::string, std::vector<CandidateReport>> by_instance;
  for (const auto& j : read_jsonl(path)) {
    CandidateReport c;
    c.instance_id = j.at("instance").get<std::string>();
    const auto& days = j.at("days");
    require(days.is_array() && days.size() == 4, Errc::parse_error,
            "candidate for " + c.instance_id + " must have 4 day texts");
    for (const auto& t : days) c.days.push_back({t.get<std::string>(), -1});
    c.temperature = j.value("temperature", 0.9);
    c.seed = j.value("seed", 0);
    by_instance[c.instance_id].push_back(std::move(c));
  }
  return by_instance;
}

std::vector<InstanceRecord> load_instances(const std::string& path, size_t expected_images) {
  std::vector<InstanceRecord> out;
  for (const auto& j : read_jsonl(path)) out.push_back(instance_from_json(j, expected_images));
  return out;
}

Embedder hash_embedder() {
  // Deterministic local embedder: token-hash bag of words, unit-normalized.
  return [](const std::string& text) {
    std::vector<double> v(64, 0.0);
    for (const auto& tok : tokenize(text)) v[detail::fnv1a64(tok) % 64] += 1.0;
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0)
      for (double& x : v) x /= norm;
    return v;
  };
}

std::vector<std::string> select_for_strategy(const std::vector<std::string>& pool,
                                             const std::string& reference,
                                             const std::string& strategy_flag, size_t k,
                                             const Embedder& embedder) {
  if (strategy_flag == "union") {
    std::vector<std::string> merged;
    std::set<std::string> seen;
    for (auto s : {DiversityStrategy::EditDistance, DiversityStrategy::TfIdfCosine,
                   DiversityStrategy::Jaccard, DiversityStrategy::EmbeddingCosine}) {
      for (auto& t : select_diverse(pool, reference, s, k, &pool, &embedder))
        if (seen.insert(t).second) merged.push_back(std::move(t));
    }
    return merged;
  }
  auto strategy = parse_strategy(strategy_flag);
  require(strategy.has_value(), Errc::config_error, "unknown strategy " + strategy_flag);
  return select_diverse(pool, reference, *strategy, k, &pool, &embedder);
}

int cmd_rft_build(const CommonOpts& common, const std::string& instances_file,
                  const std::string& candidates_file, const std::string& strategy, size_t k,
                  size_t max_reports, std::uint64_t seed, size_t image_count,
                  const std::string& out) {
  Timer timer;
  auto protocol = common.protocol();
  auto instances = load_instances(instances_file, image_count);
  auto candidates = load_candidates(candidates_file);
  auto embedder = hash_embedder();

  std::vector<Json> records;
  size_t assembled_total = 0;
  for (const auto& inst : instances) {
    std::vector<std::string> reports;
    auto it = candidates.find(inst.id);
    if (it == candidates.end()) {
      reports = {render_structured(inst.segmented.days)};  // gold only
    } else {
      auto pool = it->second;
      for (auto& c : pool) score_steps(c, inst.annotations, protocol);
      auto filtered = step_filter(pool);
      std::map<int, std::vector<std::string>> selected;
      for (auto& [day_index, texts] : filtered) {
        const std::string& reference = inst.segmented.days[size_t(day_index)].forecast;
        selected[day_index] = select_for_strategy(texts, reference, strategy, k, embedder);
      }
      std::uint64_t inst_seed = seed ^ detail::fnv1a64(inst.id);
      reports = assemble_rft(inst, selected, max_reports, inst_seed);
    }
    assembled_total += reports.size() - 1;
    records.push_back(rft_record_json(inst, reports));
  }
  write_jsonl(out, records);
  std::fprintf(stderr, "rft-build: %zu instance(s), %zu assembled variant(s) -> %s\n",
               records.size(), assembled_total, out.c_str());
  write_manifest_for("rft-build",
                     {{"instances", instances_file},
                      {"candidates", candidates_file},
                      {"strategy", strategy},
                      {"k", k},
                      {"max_reports", max_reports},
                      {"seed", seed}},
                     {instances_file, candidates_file}, {out}, timer.ms());
  return 0;
}

int cmd_dpo_build(const CommonOpts& common, const std::string& instances_file,
                  const std::string& candidates_file, size_t image_count, const std::string& out) {
  Timer timer;
  auto protocol = common.protocol();
  auto instances = load_instances(instances_file, image_count);
  auto candidates = load_candidates(candidates_file);

  std::vector<Json> records;
  size_t skipped = 0;
  for (const auto& inst : instances) {
    auto it = candidates.find(inst.id);
    if (it == candidates.end()) {
      ++skipped;
      continue;
    }
    auto pool = it->second;
    for (auto& c : pool) score_steps(c, inst.annotations, protocol);
    auto pair = build_pair(pool, inst.annotations, inst);
    if (!pair) {
      ++skipped;
      continue;
    }
    records.push_back(dpo_record_json(inst, *pair));
  }
  write_jsonl(out, records);
  std::fprintf(stderr, "dpo-build: %zu pair(s), %zu instance(s) skipped -> %s\n", records.size(),
               skipped, out.c_str());
  write_manifest_for("dpo-build", {{"instances", instances_file}, {"candidates", candidates_file}},
                     {instances_file, candidates_file}, {out}, timer.ms());
  return 0;
}

// ---------------------------------------------------------------------------
// prompt / judge-prompt

int cmd_prompt(const CommonOpts& common, const std::string& instances_file, bool aspect_control,
               const std::string& few_shot_file, size_t shots, size_t image_count,
               const std::string& out) {
  Timer timer;
  (void)common;
  auto instances = load_instances(instances_file, image_count);
  std::vector<FewShotExample> archive;
  if (!few_shot_file.empty()) {
    for (const auto& j : read_jsonl(few_shot_file))
      archive.push_back({j.at("city").get<std::string>(), j.at("year").get<int>(),
                         j.at("month").get<int>(), j.value("input", ""), j.value("answer", "")});
  }

  std::vector<Json> bundles;
  for (const auto& inst : instances) {
    auto spec = prompt_spec_for_instance(inst);
    if (!archive.empty() && shots > 0)
      spec.few_shot = retrieve_few_shot(inst.time, spec.city, archive, shots);
    if (aspect_control)
      require(focus_complete(spec), Errc::precondition,
              "instance " + inst.id + " lacks focus aspects for some day");
    auto bundle = build_generation_prompt(spec, aspect_control);
    bundle.images = inst.image_refs;
    Json rec = bundle.to_json();
    rec["instance"] = inst.id;
    bundles.push_back(std::move(rec));
  }
  write_jsonl(out, bundles);
  std::fprintf(stderr, "prompt: %zu bundle(s) -> %s\n", bundles.size(), out.c_str());
  write_manifest_for("prompt",
                     {{"instances", instances_file},
                      {"aspect_control", aspect_control},
                      {"few_shot", few_shot_file},
                      {"shots", shots}},
                     {instances_file}, {out}, timer.ms());
  return 0;
}

int cmd_judge_prompt(const std::string& gold_file, const std::string& candidates_file,
                     const std::string& out) {
  Timer timer;
  std::ifstream gf(gold_file);
  require(gf.good(), Errc::io_error, "cannot open " + gold_file);
  std::string gold((std::istreambuf_iterator<char>(gf)), std::istreambuf_iterator<char>());
  gold = trim(gold);

  std::vector<std::string> candidates;
  for (const auto& j : read_jsonl(candidates_file)) {
    if (j.is_string())
      candidates.push_back(j.get<std::string>());
    else
      candidates.push_back(j.at("report").get<std::string>());
  }
  auto bundle = build_ranking_prompt(gold, candidates);
  for (const auto& w : bundle.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  std::ofstream f(out);
  require(f.good(), Errc::io_error, "cannot write " + out);
  f << bundle.to_json().dump(2) << "\n";
  write_manifest_for("judge-prompt", {{"gold", gold_file}, {"candidates", candidates_file}},
                     {gold_file, candidates_file}, {out}, timer.ms());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weather forecast report corpus toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a TOML/INI file");
  CommonOpts common;
  app.add_option("--protocol", common.protocol_file, "annotation protocol JSON (default built-in)");
  app.add_option("--stations", common.stations_file, "station table JSON (default built-in)");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "pull archived forecast discussions");
  std::string station, start, end, endpoint, cache_dir, fetch_out;
  bool fetch_dedup = false;
  fetch->add_option("--station", station, "3-letter station code")->required();
  fetch->add_option("--start", start, "YYYY-MM-DD")->required();
  fetch->add_option("--end", end, "YYYY-MM-DD")->required();
  fetch->add_option("--endpoint", endpoint, "archive base URL (or env WFR_AFOS_URL)")
      ->envname("WFR_AFOS_URL");
  fetch->add_option("--cache-dir", cache_dir, "write one product file per report here");
  fetch->add_option("--out", fetch_out, "reports JSONL")->required();
  fetch->add_flag("--dedup", fetch_dedup, "keep one morning report per local day");

  // segment
  auto* seg = app.add_subcommand("segment", "split reports into four daily forecasts");
  BackendOpts seg_backend;
  std::string seg_reports, seg_out, seg_review;
  bool seg_coverage = true;
  seg->add_option("--reports", seg_reports, "reports JSONL from fetch")->required();
  seg->add_option("--out", seg_out, "segmented JSONL")->required();
  seg->add_option("--review-out", seg_review, "verification failures JSONL");
  seg->add_flag("--coverage-filter,!--no-coverage-filter", seg_coverage,
                "drop reports covering fewer than 3 of the 4 days (default on)");
  add_backend_flags(seg, seg_backend);

  // annotate
  auto* ann = app.add_subcommand("annotate", "extract claim/aspect labels per day");
  BackendOpts ann_backend;
  std::string ann_segments, ann_out, ann_instances, ann_images;
  bool ann_with_text = true;
  int ann_retries = 2;
  ann->add_option("--segments", ann_segments, "segmented JSONL")->required();
  ann->add_option("--out", ann_out, "annotations JSONL")->required();
  ann->add_option("--instances-out", ann_instances, "also write joined instance records");
  ann->add_option("--images-dir", ann_images, "directory prefix for the 12 image refs");
  ann->add_flag("--with-text,!--no-text", ann_with_text,
                "carry the forecast text on annotation lines (default on)");
  ann->add_option("--retries", ann_retries, "LLM re-extraction budget on aspect conflicts");
  add_backend_flags(ann, ann_backend);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score predictions against gold annotations");
  std::string ev_pred, ev_gold, ev_group, ev_out;
  ev->add_option("--pred", ev_pred, "predicted annotations JSONL")->required();
  ev->add_option("--gold", ev_gold, "gold annotations JSONL")->required();
  ev->add_option("--group-by", ev_group, "comma list of city, day, aspect");
  ev->add_option("--out", ev_out, "JSON report path");

  // hit-rate
  auto* hr = app.add_subcommand("hit-rate", "aspect hit rate of predictions vs gold");
  std::string hr_pred, hr_gold, hr_out;
  hr->add_option("--pred", hr_pred, "predicted annotations JSONL")->required();
  hr->add_option("--gold", hr_gold, "gold annotations JSONL")->required();
  hr->add_option("--out", hr_out, "JSON report path");

  // rft-build
  auto* rft = app.add_subcommand("rft-build", "build the rejection-sampling dataset");
  std::string rft_instances, rft_candidates, rft_strategy = "edit", rft_out;
  std::size_t rft_k = 3, rft_max = 3, rft_images = 12;
  std::uint64_t rft_seed = 0;
  rft->add_option("--instances", rft_instances, "instance records JSONL")->required();
  rft->add_option("--candidates", rft_candidates, "sampled candidates JSONL")->required();
  rft->add_option("--strategy", rft_strategy, "edit, tfidf, jaccard, embedding or union");
  rft->add_option("--k", rft_k, "diverse sub-reports kept per day");
  rft->add_option("--max-reports", rft_max, "assembled variants per instance");
  rft->add_option("--seed", rft_seed, "assembly RNG seed")->required();
  rft->add_option("--image-count", rft_images, "expected image refs per instance");
  rft->add_option("--out", rft_out, "RFT dataset JSONL")->required();

  // dpo-build
  auto* dpo = app.add_subcommand("dpo-build", "build the preference-pair dataset");
  std::string dpo_instances, dpo_candidates, dpo_out;
  std::size_t dpo_images = 12;
  dpo->add_option("--instances", dpo_instances, "instance records JSONL")->required();
  dpo->add_option("--candidates", dpo_candidates, "sampled candidates JSONL")->required();
  dpo->add_option("--image-count", dpo_images, "expected image refs per instance");
  dpo->add_option("--out", dpo_out, "DPO dataset JSONL")->required();

  // prompt
  auto* pr = app.add_subcommand("prompt", "build generation prompt bundles");
  std::string pr_instances, pr_few_shot, pr_out;
  bool pr_aspect_control = false;
  std::size_t pr_shots = 2, pr_images = 12;
  pr->add_option("--instances", pr_instances, "instance records JSONL")->required();
  pr->add_flag("--aspect-control", pr_aspect_control, "append Focus on constraints per day");
  pr->add_option("--few-shot", pr_few_shot, "few-shot archive JSONL");
  pr->add_option("--shots", pr_shots, "examples per prompt");
  pr->add_option("--image-count", pr_images, "expected image refs per instance");
  pr->add_option("--out", pr_out, "prompt bundles JSONL")->required();

  // judge-prompt
  auto* jp = app.add_subcommand("judge-prompt", "build the 9-candidate ranking prompt");
  std::string jp_gold, jp_candidates, jp_out;
  jp->add_option("--gold-file", jp_gold, "ground-truth report text file")->required();
  jp->add_option("--candidates-file", jp_candidates, "JSONL of 9 candidate reports")->required();
  jp->add_option("--out", jp_out, "prompt bundle JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // config errors exit 2
  }

  try {
    if (*fetch)
      return cmd_fetch(common, station, start, end, endpoint, cache_dir, fetch_out, fetch_dedup);
    if (*seg)
      return cmd_segment(common, seg_backend, seg_reports, seg_out, seg_review, seg_coverage);
    if (*ann)
      return cmd_annotate(common, ann_backend, ann_segments, ann_out, ann_instances, ann_images,
                          ann_with_text, ann_retries);
    if (*ev) return cmd_evaluate(common, ev_pred, ev_gold, ev_group, ev_out);
    if (*hr) return cmd_hit_rate(common, hr_pred, hr_gold, hr_out);
    if (*rft)
      return cmd_rft_build(common, rft_instances, rft_candidates, rft_strategy, rft_k, rft_max,
                           rft_seed, rft_images, rft_out);
    if (*dpo) return cmd_dpo_build(common, dpo_instances, dpo_candidates, dpo_images, dpo_out);
    if (*pr)
      return cmd_prompt(common, pr_instances, pr_aspect_control, pr_few_shot, pr_shots, pr_images,
                        pr_out);
    if (*jp) return cmd_judge_prompt(jp_gold, jp_candidates, jp_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == Errc::config_error ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
