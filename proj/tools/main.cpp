// Copyright (c) 2026 Layoutkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// layoutkit command line: train / sample / eval / sweep / match / prompt.
// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "layoutkit/harness.hpp"

namespace fs = std::filesystem;
using namespace layoutkit;

namespace {

nlohmann::json load_config(const std::string& path,
                           const std::vector<std::string>& overrides) {
  nlohmann::json j =
      path.empty() ? nlohmann::json::object() : harness::read_json_file(path);
  for (const std::string& assignment : overrides)
    harness::apply_override(j, assignment);
  return j;
}

std::string resolve_output_dir(const harness::ExperimentConfig& cfg) {
  if (const char* env = std::getenv("LAYOUTKIT_OUTPUT_DIR"); env && *env)
    return env;
  return cfg.output_dir;
}

std::string read_stdin() {
  std::ostringstream buffer;
  buffer << std::cin.rdbuf();
  return buffer.str();
}

int run_train(const nlohmann::json& config_json) {
  const harness::ExperimentConfig cfg =
      harness::experiment_config_from_json(config_json);
  const std::string out_dir = resolve_output_dir(cfg);
  const harness::Corpus corpus = harness::build_corpus(cfg);
  const flowmatch::TrainResult result = harness::train_model(cfg, corpus);

  fs::create_directories(out_dir);
  flowmatch::save_checkpoint(result.params,
                             (fs::path(out_dir) / "model.ckpt").string());
  nlohmann::json losses = nlohmann::json::array();
  for (double l : result.loss_history) losses.push_back(l);
  harness::write_text_file(
      (fs::path(out_dir) / "train_log.json").string(),
      nlohmann::json{{"seed", cfg.seed},
                     {"steps", cfg.train.steps},
                     {"loss_history", std::move(losses)}}
          .dump(2) +
          "\n");
  std::cout << "checkpoint written to " << out_dir << "/model.ckpt\n";
  return 0;
}

int run_sample(const nlohmann::json& config_json, const std::string& ckpt,
               const std::string& layout_path, const std::string& out_path) {
  const harness::ExperimentConfig cfg =
      harness::experiment_config_from_json(config_json);
  const flowmatch::ModelParams params = flowmatch::load_checkpoint(ckpt);
  const icbp::LayoutPrompt prompt =
      icbp::layout_from_json(harness::read_json_file(layout_path));
  flowmatch::SamplerConfig sampler = cfg.sampler;
  sampler.seed = harness::stage_seed(cfg.seed, "sample", 0);
  const scenes::ToyScene scene = flowmatch::sample(params, prompt, sampler);
  scenes::write_ppm(scene, out_path);
  std::cout << "scene written to " << out_path << "\n";
  return 0;
}

int run_eval(const std::string& index_path, const std::string& report_path) {
  const nlohmann::json index = harness::read_json_file(index_path);
  if (!index.contains("scenes") || !index.at("scenes").is_array())
    throw DataError("index requires a 'scenes' array of {image, layout}");
  const fs::path base = fs::path(index_path).parent_path();
  const scenes::Palette palette = scenes::default_palette();
  const std::vector<std::string> vocab = harness::default_vocab(palette);

  std::vector<metrics::EvalRecord> records;
  for (const auto& entry : index.at("scenes")) {
    const scenes::ToyScene scene =
        scenes::read_ppm((base / entry.at("image").get<std::string>()).string());
    const nlohmann::json layout =
        harness::read_json_file((base / entry.at("layout").get<std::string>()).string());
    const icbp::LayoutPrompt prompt = icbp::layout_from_json(layout);
    metrics::EvalRecord record;
    for (const icbp::InstanceTag* tag : prompt.tags())
      for (const BBox& box : tag->boxes)
        record.gt.push_back(
            {harness::class_of_subject(tag->subject, vocab), box});
    for (const auto& det : scenes::detect(scene, palette))
      record.detections.push_back({det.class_id, det.box, det.score});
    records.push_back(std::move(record));
  }
  const metrics::ScoreSummary summary = metrics::score_records(records);
  const nlohmann::json report = metrics::summary_to_json(summary);
  if (report_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    harness::write_text_file(report_path, report.dump(2) + "\n");
    harness::write_text_file(report_path + ".csv",
                             metrics::summary_to_csv(summary));
    std::cout << "report written to " << report_path << "\n";
  }
  return 0;
}

int run_sweep(const nlohmann::json& config_json) {
  const harness::ExperimentConfig cfg =
      harness::experiment_config_from_json(config_json);
  const std::string out_dir = resolve_output_dir(cfg);
  const harness::SweepReport report = harness::run_benchmark(cfg, config_json);
  std::string why;
  if (!harness::validate_sweep_report(report.report, &why))
    throw NumericalError("sweep report failed validation: " + why);
  fs::create_directories(out_dir);
  harness::write_text_file((fs::path(out_dir) / "sweep_report.json").string(),
                           report.report.dump(2) + "\n");
  harness::write_text_file((fs::path(out_dir) / "sweep_plot.csv").string(),
                           report.csv);
  std::cout << "sweep report written to " << out_dir << "\n";
  return 0;
}

int run_match_cmd(const std::string& manifest_path, const std::string& out_path,
                  const std::vector<double>& weights,
                  const std::vector<double>& thresholds, bool minmax) {
  harness::MatchOptions opts;
  if (!weights.empty()) {
    if (weights.size() != 3)
      throw ConfigError("--weights expects alpha,beta,gamma");
    opts.weights = {weights[0], weights[1], weights[2]};
  }
  if (!thresholds.empty()) {
    if (thresholds.size() != 3)
      throw ConfigError("--thresholds expects t_min,d_min,i_min");
    opts.thresholds = {thresholds[0], thresholds[1], thresholds[2]};
  }
  opts.normalize_minmax = minmax;
  const nlohmann::json verdicts =
      harness::run_match(harness::read_json_file(manifest_path), opts);
  if (out_path.empty()) {
    std::cout << verdicts.dump(2) << "\n";
  } else {
    harness::write_text_file(out_path, verdicts.dump(2) + "\n");
    std::cout << verdicts.at("summary").dump() << "\n";
  }
  return 0;
}

int run_prompt(const std::string& mode, std::string text) {
  if (text.empty()) text = read_stdin();
  if (mode == "parse") {
    const icbp::LayoutPrompt prompt = icbp::parse_prompt(text);
    std::cout << icbp::layout_to_json(prompt).dump(2) << "\n";
  } else {
    const icbp::LayoutPrompt prompt =
        icbp::layout_from_json(nlohmann::json::parse(text));
    std::cout << icbp::serialize_prompt(prompt) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layout-grounded generation toolkit"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, layout_path, out_path, index_path;
  std::string manifest_path, prompt_text;
  std::vector<std::string> overrides;
  std::vector<double> weights, thresholds;
  bool minmax = false;

  CLI::App* train = app.add_subcommand("train", "train the toy generator");
  train->add_option("--config", config_path, "experiment config JSON");
  train->add_option("--set", overrides, "override config values (a.b=c)");

  CLI::App* sample = app.add_subcommand("sample", "generate one scene");
  sample->add_option("--config", config_path, "experiment config JSON");
  sample->add_option("--set", overrides, "override config values");
  sample->add_option("--checkpoint", checkpoint, "model checkpoint")
      ->required();
  sample->add_option("--layout", layout_path, "layout JSON file")->required();
  sample->add_option("--out", out_path, "output PPM path")->required();

  CLI::App* eval = app.add_subcommand("eval", "score generated scenes");
  eval->add_option("--index", index_path, "index JSON listing image/layout pairs")
      ->required();
  eval->add_option("--report", out_path, "report JSON output path");

  CLI::App* sweep = app.add_subcommand("sweep", "guidance-scale benchmark");
  sweep->add_option("--config", config_path, "experiment config JSON");
  sweep->add_option("--set", overrides, "override config values");

  CLI::App* match = app.add_subcommand("match", "assign subjects to boxes");
  match->add_option("--manifest", manifest_path, "scene manifest JSON")
      ->required();
  match->add_option("--out", out_path, "verdict JSON output path");
  match->add_option("--weights", weights, "cost weights alpha,beta,gamma")
      ->delimiter(',');
  match->add_option("--thresholds", thresholds,
                    "accept thresholds t_min,d_min,i_min")
      ->delimiter(',');
  match->add_flag("--normalize-minmax", minmax,
                  "min-max normalize scores per matrix");

  CLI::App* prompt = app.add_subcommand("prompt", "grammar utilities");
  prompt->require_subcommand(1);
  CLI::App* prompt_parse =
      prompt->add_subcommand("parse", "prompt text -> layout JSON");
  prompt_parse->add_option("text", prompt_text, "prompt text (stdin if absent)");
  CLI::App* prompt_format =
      prompt->add_subcommand("format", "layout JSON -> prompt text");
  prompt_format->add_option("text", prompt_text, "layout JSON (stdin if absent)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(load_config(config_path, overrides));
    if (*sample)
      return run_sample(load_config(config_path, overrides), checkpoint,
                        layout_path, out_path);
    if (*eval) return run_eval(index_path, out_path);
    if (*sweep) return run_sweep(load_config(config_path, overrides));
    if (*match)
      return run_match_cmd(manifest_path, out_path, weights, thresholds,
                           minmax);
    if (*prompt) {
      return run_prompt((*prompt_parse) ? "parse" : "format", prompt_text);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
