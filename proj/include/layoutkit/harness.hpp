// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: builds the synthetic corpus, trains the toy
// generator, runs guided sampling sweeps over the coordinate guidance
// scale, evaluates layouts with the metrics suite, and runs the manifest
// matcher. All randomness flows from one root seed, split per stage by
// name and counter (see stage_seed), so any stage can be re-run in
// isolation and full runs are byte-reproducible.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutkit/errors.hpp"
#include "layoutkit/flowmatch.hpp"
#include "layoutkit/guidance.hpp"
#include "layoutkit/icbp.hpp"
#include "layoutkit/layout_json.hpp"
#include "layoutkit/metrics.hpp"
#include "layoutkit/pipeline.hpp"
#include "layoutkit/rng.hpp"
#include "layoutkit/scenes.hpp"
#include "layoutkit/version.hpp"

namespace layoutkit::harness {

/// Stage seed derivation: mix the root seed with the FNV-1a hash of the
/// stage name and a per-item counter. Documented so stage-level reruns can
/// reproduce any stream independently.
inline std::uint64_t stage_seed(std::uint64_t root, std::string_view stage,
                                std::uint64_t counter = 0) {
  std::uint64_t h = Rng::fnv1a(stage);
  h ^= root * 0x9e3779b97f4a7c15ULL;
  h ^= (counter + 1) * 0xd1b54a32d192ed03ULL;
  return h;
}

// -- configuration ---------------------------------------------------------------

struct DatasetConfig {
  int n_scenes = 2000;
  int holdout = 200;
  scenes::LayoutConfig layout;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  DatasetConfig dataset;
  flowmatch::ModelConfig model;   // vocab filled from the palette
  flowmatch::TrainConfig train;
  flowmatch::SamplerConfig sampler;
  std::vector<double> sweep = {0.2, 1.0};
  bool include_baseline = true;
  bool strip_coordinates = false;  // run the main path on stripped prompts
};

inline std::vector<std::string> default_vocab(
    const scenes::Palette& palette = scenes::default_palette()) {
  std::vector<std::string> vocab;
  vocab.reserve(palette.names.size());
  for (const std::string& name : palette.names) vocab.push_back(name + " block");
  return vocab;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.seed = j.value("seed", 0ULL);
  cfg.output_dir = j.value("output_dir", std::string("out"));

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    cfg.dataset.n_scenes = d.value("n_scenes", cfg.dataset.n_scenes);
    cfg.dataset.holdout = d.value("holdout", cfg.dataset.holdout);
    auto& l = cfg.dataset.layout;
    l.n_min = d.value("n_min", l.n_min);
    l.n_max = d.value("n_max", l.n_max);
    l.min_side = d.value("min_side", l.min_side);
    l.max_side = d.value("max_side", l.max_side);
    l.max_overlap_iou = d.value("max_overlap_iou", l.max_overlap_iou);
    l.height = d.value("height", l.height);
    l.width = d.value("width", l.width);
  }
  cfg.model.scene_h = cfg.dataset.layout.height;
  cfg.model.scene_w = cfg.dataset.layout.width;
  cfg.model.vocab = default_vocab();
  cfg.dataset.layout.num_classes = static_cast<int>(cfg.model.vocab.size());
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.contains("hidden"))
      cfg.model.hidden = m.at("hidden").get<std::vector<int>>();
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    auto& tc = cfg.train;
    tc.steps = t.value("steps", tc.steps);
    tc.lr = t.value("lr", tc.lr);
    tc.batch = t.value("batch", tc.batch);
    tc.p_drop_coord = t.value("p_drop_coord", tc.p_drop_coord);
    tc.p_drop_text = t.value("p_drop_text", tc.p_drop_text);
    tc.p_drop_all = t.value("p_drop_all", tc.p_drop_all);
    tc.loss_weight = t.value("loss_weight", tc.loss_weight);
    if (tc.steps < 0 || tc.batch < 1 || !(tc.lr > 0.0))
      throw ConfigError("train config: steps >= 0, batch >= 1, lr > 0 required");
  }
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    cfg.sampler.num_steps = s.value("num_steps", cfg.sampler.num_steps);
    cfg.sampler.timestep_shift =
        s.value("timestep_shift", cfg.sampler.timestep_shift);
    if (cfg.sampler.num_steps < 1)
      throw ConfigError("sampler config: num_steps must be >= 1");
    if (!(cfg.sampler.timestep_shift >= 1.0))
      throw ConfigError("sampler config: timestep_shift must be >= 1");
    if (s.contains("guidance"))
      cfg.sampler.guidance =
          guidance::guidance_config_from_json(s.at("guidance"));
  }
  if (j.contains("sweep")) {
    cfg.sweep = j.at("sweep").get<std::vector<double>>();
    for (std::size_t i = 0; i < cfg.sweep.size(); ++i) {
      if (!std::isfinite(cfg.sweep[i]) || cfg.sweep[i] < 0.0)
        throw ConfigError("sweep values must be finite and nonnegative");
      if (i > 0 && cfg.sweep[i] < cfg.sweep[i - 1])
        throw ConfigError("sweep values must be sorted ascending");
    }
  }
  cfg.include_baseline = j.value("include_baseline", cfg.include_baseline);
  cfg.strip_coordinates = j.value("strip_coordinates", cfg.strip_coordinates);
  return cfg;
}

/// `--set a.b.c=value` override; values parse as JSON when possible and
/// fall back to strings.
inline void apply_override(nlohmann::json& j, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;
  }

  nlohmann::json* node = &j;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot - begin);
    if (key.empty()) throw ConfigError("--set path has an empty segment");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    begin = dot + 1;
  }
}

// -- corpus glue -----------------------------------------------------------------

/// Builds the canonical prompt for a layout: "a <subject> <bbox>...</bbox>
/// and a <subject> <bbox>...</bbox>." in instance order.
inline icbp::LayoutPrompt layout_to_prompt(
    const scenes::LayoutSpec& spec, const std::vector<std::string>& vocab) {
  icbp::LayoutPrompt prompt;
  for (std::size_t i = 0; i < spec.instances.size(); ++i) {
    prompt.spans.emplace_back(std::string(i == 0 ? "a " : " and a "));
    icbp::InstanceTag tag;
    tag.subject = vocab.at(spec.instances[i].class_id);
    tag.count = 1;
    tag.boxes = {spec.instances[i].box};
    prompt.spans.emplace_back(std::move(tag));
  }
  prompt.spans.emplace_back(std::string("."));
  return prompt;
}

inline int class_of_subject(const std::string& subject,
                            const std::vector<std::string>& vocab) {
  for (std::size_t k = 0; k < vocab.size(); ++k)
    if (vocab[k] == subject) return static_cast<int>(k);
  throw UnknownClass("subject '" + subject + "' not in vocabulary");
}

struct Corpus {
  std::vector<flowmatch::Sample> train;
  std::vector<scenes::LayoutSpec> holdout;
};

inline Corpus build_corpus(const ExperimentConfig& cfg) {
  Corpus corpus;
  const std::vector<std::string>& vocab = cfg.model.vocab;
  for (int i = 0; i < cfg.dataset.n_scenes; ++i) {
    Rng rng(stage_seed(cfg.seed, "dataset", static_cast<std::uint64_t>(i)));
    scenes::LayoutSpec spec = scenes::sample_layout(rng, cfg.dataset.layout);
    flowmatch::Sample sample;
    sample.prompt = layout_to_prompt(spec, vocab);
    sample.scene = scenes::render(spec);
    corpus.train.push_back(std::move(sample));
  }
  for (int i = 0; i < cfg.dataset.holdout; ++i) {
    Rng rng(stage_seed(cfg.seed, "holdout", static_cast<std::uint64_t>(i)));
    corpus.holdout.push_back(scenes::sample_layout(rng, cfg.dataset.layout));
  }
  return corpus;
}

inline flowmatch::TrainResult train_model(const ExperimentConfig& cfg,
                                          const Corpus& corpus) {
  flowmatch::ModelParams initial =
      flowmatch::init_params(cfg.model, stage_seed(cfg.seed, "init"));
  flowmatch::TrainConfig train_cfg = cfg.train;
  train_cfg.seed = stage_seed(cfg.seed, "train");
  return flowmatch::train(initial, train_cfg, corpus.train);
}

// -- sweep ------------------------------------------------------------------------

struct EvalOptions {
  bool strip_coordinates = false;
  std::optional<double> s_coord;  // overrides the sampler guidance scale
  bool coord_enabled = true;
};

/// Samples every holdout layout, runs the oracle detector, and scores the
/// detections against the ground-truth boxes.
inline metrics::ScoreSummary evaluate_holdout(
    const ExperimentConfig& cfg, const flowmatch::ModelParams& params,
    const std::vector<scenes::LayoutSpec>& holdout, const EvalOptions& opts) {
  const scenes::Palette palette = scenes::default_palette();
  std::vector<metrics::EvalRecord> records;
  records.reserve(holdout.size());
  for (std::size_t i = 0; i < holdout.size(); ++i) {
    const scenes::LayoutSpec& spec = holdout[i];
    icbp::LayoutPrompt prompt = layout_to_prompt(spec, cfg.model.vocab);
    if (opts.strip_coordinates)
      prompt = icbp::parse_prompt(icbp::strip_coordinates(prompt));

    flowmatch::SamplerConfig sampler = cfg.sampler;
    sampler.guidance.coord_enabled = opts.coord_enabled;
    if (opts.s_coord) sampler.guidance.scales.s_coord = *opts.s_coord;
    sampler.seed = stage_seed(cfg.seed, "sample", static_cast<std::uint64_t>(i));

    const scenes::ToyScene generated =
        flowmatch::sample(params, prompt, sampler);

    metrics::EvalRecord record;
    for (const auto& inst : spec.instances)
      record.gt.push_back({inst.class_id, inst.box});
    for (const auto& det : scenes::detect(generated, palette))
      record.detections.push_back({det.class_id, det.box, det.score});
    records.push_back(std::move(record));
  }
  return metrics::score_records(records);
}

struct SweepReport {
  nlohmann::json report;
  std::string csv;
};

inline std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    Rng::fnv1a(config.dump())));
  return buf;
}

/// Full benchmark: corpus, training, one evaluation per sweep scale, plus
/// an optional coordinate-stripped baseline. Deterministic per seed.
inline SweepReport run_benchmark(const ExperimentConfig& cfg,
                                 const nlohmann::json& raw_config = {}) {
  const Corpus corpus = build_corpus(cfg);
  const flowmatch::TrainResult trained = train_model(cfg, corpus);

  nlohmann::json sweep_entries = nlohmann::json::array();
  std::ostringstream csv;
  csv.setf(std::ios::fixed);
  csv.precision(6);
  csv << "s_coord,miou,ap,ap50,ap75,instance_sr_avg,image_sr_avg\n";

  for (double s_coord : cfg.sweep) {
    EvalOptions opts;
    opts.strip_coordinates = cfg.strip_coordinates;
    opts.coord_enabled = cfg.sampler.guidance.coord_enabled;
    opts.s_coord = s_coord;
    const metrics::ScoreSummary summary =
        evaluate_holdout(cfg, trained.params, corpus.holdout, opts);
    sweep_entries.push_back({{"s_coord", s_coord},
                             {"summary", metrics::summary_to_json(summary)}});
    csv << s_coord << "," << summary.miou << "," << summary.ap << ","
        << summary.ap50 << "," << summary.ap75 << ","
        << summary.instance_sr.average << "," << summary.image_sr.average
        << "\n";
  }

  nlohmann::json baseline = nullptr;
  if (cfg.include_baseline) {
    EvalOptions opts;
    opts.strip_coordinates = true;
    opts.coord_enabled = false;
    const metrics::ScoreSummary summary =
        evaluate_holdout(cfg, trained.params, corpus.holdout, opts);
    baseline = metrics::summary_to_json(summary);
  }

  SweepReport out;
  out.report = {{"schema", "layoutkit/sweep-report/v1"},
                {"version", LAYOUTKIT_VERSION},
                {"seed", cfg.seed},
                {"config_hash", config_hash(raw_config)},
                {"train", {{"steps", cfg.train.steps},
                           {"final_loss", trained.loss_history.empty()
                                              ? nlohmann::json(nullptr)
                                              : nlohmann::json(
                                                    trained.loss_history.back())}}},
                {"sweep", std::move(sweep_entries)},
                {"baseline", std::move(baseline)}};
  out.csv = csv.str();
  return out;
}

/// Structural check mirroring docs/schema/sweep_report.schema.json.
inline bool validate_sweep_report(const nlohmann::json& report,
                                  std::string* why = nullptr) {
  const auto fail = [&](const std::string& message) {
    if (why) *why = message;
    return false;
  };
  if (!report.is_object()) return fail("report must be an object");
  for (const char* key : {"schema", "version", "seed", "config_hash", "sweep"})
    if (!report.contains(key)) return fail(std::string("missing key ") + key);
  if (report.at("schema") != "layoutkit/sweep-report/v1")
    return fail("unknown schema id");
  if (!report.at("sweep").is_array()) return fail("sweep must be an array");
  for (const auto& entry : report.at("sweep")) {
    if (!entry.contains("s_coord") || !entry.contains("summary"))
      return fail("sweep entry needs s_coord and summary");
    const auto& summary = entry.at("summary");
    for (const char* key :
         {"instance_sr", "image_sr", "miou", "ap", "ap50", "ap75", "n_images",
          "matcher", "pooling"})
      if (!summary.contains(key))
        return fail(std::string("summary missing key ") + key);
    for (const char* key : {"miou", "ap", "ap50", "ap75"}) {
      const double v = summary.at(key).get<double>();
      if (!(v >= 0.0 && v <= 1.0))
        return fail(std::string(key) + " outside [0,1]");
    }
  }
  return true;
}

// -- manifest matching -------------------------------------------------------------

struct MatchOptions {
  pipeline::CostWeights weights;
  pipeline::AcceptThresholds thresholds;
  bool normalize_minmax = false;
};

/// Runs cost combination, assignment, and the per-pair quality gate on one
/// scene's score matrix.
inline nlohmann::json match_scene(const std::string& scene_id,
                                  const pipeline::ScoreMatrix& scores,
                                  const MatchOptions& opts) {
  nlohmann::json verdict{{"scene_id", scene_id},
                         {"assignment", nullptr},
                         {"total_cost", 0.0},
                         {"verdict", "rejected"},
                         {"reasons", nlohmann::json::array()}};
  const pipeline::ScoreMatrix normalized =
      opts.normalize_minmax ? pipeline::normalize_scores_minmax(scores)
                            : scores;
  const pipeline::CostMatrix cost =
      pipeline::combined_cost(normalized, opts.weights);
  const pipeline::Assignment assignment = pipeline::assign(cost);
  if (!assignment.accepted) {
    verdict["reasons"].push_back(assignment.reason);
    return verdict;
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t i = 0; i < assignment.subject_to_box.size(); ++i)
    pairs.push_back({static_cast<int>(i), assignment.subject_to_box[i]});
  verdict["assignment"] = std::move(pairs);
  verdict["total_cost"] = assignment.total_cost;

  const pipeline::SceneVerdict gate =
      pipeline::accept_scene(assignment, normalized, opts.thresholds);
  verdict["verdict"] = gate.accepted ? "accepted" : "rejected";
  for (const std::string& reason : gate.reasons)
    verdict["reasons"].push_back(reason);
  return verdict;
}

/// Manifest format: {"scenes": [{"scene_id": str,
///                               "scores": [[[s_t,s_d,s_i], ...], ...]}]}.
inline nlohmann::json run_match(const nlohmann::json& manifest,
                                const MatchOptions& opts) {
  if (!manifest.is_object() || !manifest.contains("scenes") ||
      !manifest.at("scenes").is_array())
    throw MalformedManifest("manifest requires a 'scenes' array");

  nlohmann::json verdicts = nlohmann::json::array();
  int accepted = 0;
  std::map<std::string, int> reject_reasons;
  for (std::size_t s = 0; s < manifest.at("scenes").size(); ++s) {
    const auto& scene = manifest.at("scenes")[s];
    const std::string where = "scene " + std::to_string(s);
    if (!scene.is_object() || !scene.contains("scene_id") ||
        !scene.contains("scores"))
      throw MalformedManifest(where + ": needs scene_id and scores");
    pipeline::ScoreMatrix scores;
    const auto& rows = scene.at("scores");
    if (!rows.is_array() || rows.empty())
      throw MalformedManifest(where + ": scores must be a nonempty matrix");
    for (const auto& row : rows) {
      if (!row.is_array())
        throw MalformedManifest(where + ": scores rows must be arrays");
      std::vector<pipeline::ScoreTriple> triples;
      for (const auto& t : row) {
        if (!t.is_array() || t.size() != 3)
          throw MalformedManifest(where + ": each score is [s_t,s_d,s_i]");
        triples.push_back({t[0].get<double>(), t[1].get<double>(),
                           t[2].get<double>()});
      }
      scores.push_back(std::move(triples));
    }
    for (const auto& row : scores)
      if (row.size() != scores[0].size())
        throw MalformedManifest(where + ": ragged score matrix");

    nlohmann::json verdict =
        match_scene(scene.at("scene_id").get<std::string>(), scores, opts);
    if (verdict.at("verdict") == "accepted") {
      ++accepted;
    } else {
      for (const auto& reason : verdict.at("reasons"))
        reject_reasons[reason.get<std::string>().substr(0, 64)] += 1;
    }
    verdicts.push_back(std::move(verdict));
  }

  nlohmann::json reasons = nlohmann::json::object();
  for (const auto& [reason, count] : reject_reasons) reasons[reason] = count;
  return {{"verdicts", std::move(verdicts)},
          {"summary",
           {{"accepted", accepted},
            {"rejected",
             static_cast<int>(manifest.at("scenes").size()) - accepted},
            {"reasons", std::move(reasons)}}}};
}

// -- file helpers --------------------------------------------------------------------

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid JSON in " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path,
                            const std::string& contents) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << contents;
  if (!out) throw DataError("short write: " + path);
}

}  // namespace layoutkit::harness
