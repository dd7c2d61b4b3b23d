// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "layoutkit/harness.hpp"

using namespace layoutkit;
using namespace layoutkit::harness;

namespace {

nlohmann::json tiny_config_json() {
  return nlohmann::json::parse(R"({
    "seed": 17,
    "dataset": {"n_scenes": 12, "holdout": 4, "n_min": 2, "n_max": 2,
                "min_side": 0.3, "max_side": 0.6, "max_overlap_iou": 0.0,
                "height": 8, "width": 8},
    "model": {"hidden": [16]},
    "train": {"steps": 10, "batch": 4, "lr": 0.001},
    "sampler": {"num_steps": 2, "timestep_shift": 4.0,
                "guidance": {"s_text": 1.0, "s_img": 1.0, "s_coord": 1.0,
                             "coord_enabled": true, "img_enabled": false,
                             "norm": null}},
    "sweep": [0.5],
    "include_baseline": true
  })");
}

}  // namespace

TEST_CASE("stage_seed splits streams by stage and counter", "[harness]") {
  const std::uint64_t root = 123;
  CHECK(stage_seed(root, "dataset", 0) == stage_seed(root, "dataset", 0));
  CHECK(stage_seed(root, "dataset", 0) != stage_seed(root, "dataset", 1));
  CHECK(stage_seed(root, "dataset", 0) != stage_seed(root, "train", 0));
  CHECK(stage_seed(root, "dataset", 0) != stage_seed(root + 1, "dataset", 0));
}

TEST_CASE("experiment config parses, validates, and accepts overrides",
          "[harness]") {
  nlohmann::json j = tiny_config_json();
  const ExperimentConfig cfg = experiment_config_from_json(j);
  CHECK(cfg.seed == 17);
  CHECK(cfg.dataset.n_scenes == 12);
  CHECK(cfg.model.hidden == std::vector<int>{16});
  CHECK(cfg.model.scene_h == 8);
  CHECK(cfg.sweep == std::vector<double>{0.5});
  CHECK(cfg.model.vocab.size() == 8);

  nlohmann::json bad = tiny_config_json();
  bad["sweep"] = {1.0, 0.5};
  CHECK_THROWS_AS(experiment_config_from_json(bad), ConfigError);
  bad["sweep"] = {-0.1};
  CHECK_THROWS_AS(experiment_config_from_json(bad), ConfigError);

  apply_override(j, "train.steps=25");
  apply_override(j, "sampler.guidance.s_coord=2.5");
  apply_override(j, "output_dir=elsewhere");
  const ExperimentConfig patched = experiment_config_from_json(j);
  CHECK(patched.train.steps == 25);
  CHECK(patched.sampler.guidance.scales.s_coord == 2.5);
  CHECK(patched.output_dir == "elsewhere");
  CHECK_THROWS_AS(apply_override(j, "no-equals-sign"), ConfigError);
}

TEST_CASE("layout_to_prompt survives the grammar round trip", "[harness]") {
  Rng rng(stage_seed(3, "dataset", 0));
  scenes::LayoutConfig lc;
  lc.n_min = 3;
  lc.n_max = 3;
  const scenes::LayoutSpec spec = scenes::sample_layout(rng, lc);
  const std::vector<std::string> vocab = default_vocab();
  const icbp::LayoutPrompt prompt = layout_to_prompt(spec, vocab);
  const std::string text = icbp::serialize_prompt(prompt);
  const icbp::LayoutPrompt reparsed = icbp::parse_prompt(text);
  CHECK(icbp::serialize_prompt(reparsed) == text);
  const auto tags = reparsed.tags();
  REQUIRE(tags.size() == 3);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    CHECK(tags[i]->subject == vocab[spec.instances[i].class_id]);
    CHECK(tags[i]->boxes[0] == spec.instances[i].box);
  }
}

TEST_CASE("run_match handles fixtures and malformed manifests", "[harness]") {
  MatchOptions opts;

  const auto empty = nlohmann::json::parse(R"({"scenes": []})");
  const nlohmann::json empty_out = run_match(empty, opts);
  CHECK(empty_out.at("verdicts").empty());
  CHECK(empty_out.at("summary").at("accepted") == 0);
  CHECK(empty_out.at("summary").at("rejected") == 0);

  const auto perfect = nlohmann::json::parse(R"({
    "scenes": [{"scene_id": "s0",
                "scores": [[[1.0,1.0,1.0], [0.1,0.1,0.1]],
                           [[0.1,0.1,0.1], [1.0,1.0,1.0]]]}]})");
  const nlohmann::json perfect_out = run_match(perfect, opts);
  REQUIRE(perfect_out.at("verdicts").size() == 1);
  const auto& verdict = perfect_out.at("verdicts")[0];
  CHECK(verdict.at("verdict") == "accepted");
  CHECK(verdict.at("assignment") == nlohmann::json::parse("[[0,0],[1,1]]"));
  CHECK(perfect_out.at("summary").at("accepted") == 1);

  // Three subjects, two candidate boxes: no complete matching exists.
  const auto overfull = nlohmann::json::parse(R"({
    "scenes": [{"scene_id": "s1",
                "scores": [[[0.9,0.9,0.9], [0.9,0.9,0.9]],
                           [[0.9,0.9,0.9], [0.9,0.9,0.9]],
                           [[0.9,0.9,0.9], [0.9,0.9,0.9]]]}]})");
  const nlohmann::json overfull_out = run_match(overfull, opts);
  CHECK(overfull_out.at("verdicts")[0].at("verdict") == "rejected");
  CHECK(overfull_out.at("verdicts")[0].at("reasons")[0] ==
        "IncompleteMatching");
  CHECK(overfull_out.at("summary").at("reasons").contains(
      "IncompleteMatching"));

  CHECK_THROWS_AS(run_match(nlohmann::json::array(), opts),
                  MalformedManifest);
  const auto ragged = nlohmann::json::parse(R"({
    "scenes": [{"scene_id": "s2",
                "scores": [[[0.9,0.9,0.9]], [[0.9,0.9]]]}]})");
  CHECK_THROWS_AS(run_match(ragged, opts), MalformedManifest);
}

TEST_CASE("run_match applies the per-pair quality gate", "[harness]") {
  MatchOptions opts;  // default thresholds: 0.25 / 0.30 / 0.50
  const auto manifest = nlohmann::json::parse(R"({
    "scenes": [{"scene_id": "low-image-sim",
                "scores": [[[0.9, 0.9, 0.45]]]}]})");
  const nlohmann::json out = run_match(manifest, opts);
  const auto& verdict = out.at("verdicts")[0];
  CHECK(verdict.at("verdict") == "rejected");
  REQUIRE(verdict.at("assignment").is_array());  // matching itself succeeded
  const std::string reason = verdict.at("reasons")[0].get<std::string>();
  CHECK(reason.find("s_i") != std::string::npos);
}

TEST_CASE("sweep report is deterministic and validates", "[harness]") {
  const nlohmann::json j = tiny_config_json();
  const ExperimentConfig cfg = experiment_config_from_json(j);
  const SweepReport a = run_benchmark(cfg, j);
  const SweepReport b = run_benchmark(cfg, j);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.csv == b.csv);

  std::string why;
  CHECK(validate_sweep_report(a.report, &why));
  REQUIRE(a.report.at("sweep").size() == 1);
  CHECK(a.report.at("sweep")[0].at("s_coord") == 0.5);
  CHECK_FALSE(a.report.at("baseline").is_null());
  CHECK(a.csv.rfind("s_coord,miou,ap,ap50,ap75,instance_sr_avg,image_sr_avg",
                    0) == 0);

  nlohmann::json broken = a.report;
  broken.erase("config_hash");
  CHECK_FALSE(validate_sweep_report(broken, &why));
  CHECK(why.find("config_hash") != std::string::npos);
}

TEST_CASE("disabling the coordinate branch reproduces the stripped baseline",
          "[harness]") {
  nlohmann::json j = tiny_config_json();
  j["strip_coordinates"] = true;
  j["sampler"]["guidance"]["coord_enabled"] = false;
  const ExperimentConfig cfg = experiment_config_from_json(j);
  const SweepReport report = run_benchmark(cfg, j);
  // The sweep entry ran on stripped prompts with the coordinate stage off,
  // which is exactly the baseline configuration.
  CHECK(report.report.at("sweep")[0].at("summary").dump() ==
        report.report.at("baseline").dump());
}
