/*
 * Copyright 2026 The dcaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// dcaudit: audit a black-box risk score with mimic and outcome models.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dcaudit/commands.h"

namespace {

using dcaudit::cli::RunConfig;

void AddDataFlags(CLI::App* app, RunConfig* config, std::string* calibration) {
  app->add_option("--data", config->data_path, "Audit data (CSV)")->required();
  app->add_option("--config", config->config_path, "Schema config (JSON)");
  app->add_option("--score-col", config->score_column, "Score column name");
  app->add_option("--outcome-col", config->outcome_column,
                  "Outcome column name");
  app->add_option("--calibration", *calibration, "auto, on or off")
      ->check(CLI::IsMember({"auto", "on", "off"}));
  app->add_option("--calibration-threshold", config->calibration_threshold,
                  "Logit linearity residual above which auto mode calibrates");
  app->add_option("--out", config->out_dir, "Output directory")->required();
}

int Report(const absl::Status& status) {
  if (status.ok()) return 0;
  const auto stage = dcaudit::cli::StageOf(status);
  std::cerr << "dcaudit: "
            << (stage ? dcaudit::cli::StageName(*stage) + " error: " : "error: ")
            << status.message() << "\n";
  return dcaudit::cli::ExitCodeFor(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit black-box risk scores with transparent mimic and "
               "outcome models"};
  app.require_subcommand(1);

  RunConfig config;
  std::string calibration = "auto";
  std::string error_scale = "calibrated";

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Check and fit the score calibration map");
  AddDataFlags(calibrate, &config, &calibration);

  CLI::App* audit =
      app.add_subcommand("audit", "Run the full audit and write a report");
  AddDataFlags(audit, &config, &calibration);
  audit->add_option("--K", config.outer_folds, "Outer folds");
  audit->add_option("--L", config.inner_folds, "Inner folds");
  audit->add_option("--seed", config.seed, "Random seed");
  audit->add_option("--pairs", config.train.interaction_pairs,
                    "Interaction pairs per model");
  audit->add_option("--jobs", config.jobs, "Worker threads");
  audit->add_option("--learning-rate", config.train.learning_rate);
  audit->add_option("--max-rounds", config.train.max_rounds);
  audit->add_option("--max-leaves", config.train.max_leaves);
  audit->add_option("--patience", config.train.patience);
  audit->add_option("--max-bins", config.max_bins);
  bool no_early_stopping = false;
  audit->add_flag("--no-early-stopping", no_early_stopping,
                  "Run all rounds instead of stopping on validation loss");
  audit->add_option("--l2", config.l2, "Ridge strength of the linear baseline");
  audit->add_option("--resamples", config.resamples, "Bootstrap resamples");
  audit->add_option("--error-scale", error_scale, "calibrated or raw")
      ->check(CLI::IsMember({"calibrated", "raw"}));
  audit->add_flag("--fisher-z", config.fisher_z,
                  "Fisher-z interval for the Pearson correlation");

  dcaudit::cli::TestMissingConfig missing_config;
  bool fisher_z = false;
  CLI::App* test_missing = app.add_subcommand(
      "test-missing", "Missing-feature test on a CSV of error pairs");
  test_missing
      ->add_option("--errors", missing_config.errors_path,
                   "CSV with mimic_error and outcome_error columns")
      ->required();
  test_missing->add_option("--resamples", missing_config.options.resamples);
  test_missing->add_option("--seed", missing_config.options.seed);
  test_missing->add_option("--jobs", missing_config.options.jobs);
  test_missing->add_flag("--fisher-z", fisher_z);
  test_missing->add_option("--out", missing_config.out_dir)->required();

  std::string generator;
  std::string generator_out;
  dcaudit::synthetic::GeneratorOptions generator_options;
  double strength = 0;
  bool include_hidden = false;
  CLI::App* gen = app.add_subcommand("gen-synthetic",
                                     "Write a synthetic audit dataset");
  gen->add_option("--kind", generator, "Generator name")
      ->required()
      ->check(CLI::IsMember(dcaudit::synthetic::GeneratorNames()));
  gen->add_option("--rows", generator_options.rows);
  gen->add_option("--seed", generator_options.seed);
  CLI::Option* strength_option = gen->add_option(
      "--strength", strength, "Hidden-feature strength or gender-flip delta");
  gen->add_flag("--include-hidden", include_hidden);
  gen->add_option("--out", generator_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dcaudit::cli::ExitCode(dcaudit::cli::Stage::kConfig);
  }

  auto mode = dcaudit::calibrate::ParseCalibrationMode(calibration);
  if (!mode.ok()) return Report(mode.status());
  config.calibration = *mode;
  auto scale = dcaudit::missing::ParseErrorScale(error_scale);
  if (!scale.ok()) return Report(scale.status());
  config.error_scale = *scale;

  if (calibrate->parsed()) return Report(dcaudit::cli::RunCalibrate(config));
  if (audit->parsed()) {
    config.train.early_stopping = !no_early_stopping;
    auto report = dcaudit::cli::RunAudit(config);
    if (report.ok()) {
      std::cout << "wrote " << config.out_dir << "/report.json\n";
    }
    return Report(report.status());
  }
  if (test_missing->parsed()) {
    missing_config.options.pearson_interval =
        fisher_z ? dcaudit::missing::PearsonInterval::kFisherZ
                 : dcaudit::missing::PearsonInterval::kBootstrap;
    auto result = dcaudit::cli::RunTestMissing(missing_config);
    if (result.ok()) std::cout << result->dump(2) << "\n";
    return Report(result.status());
  }
  if (gen->parsed()) {
    if (strength_option->count() > 0) generator_options.strength = strength;
    generator_options.include_hidden = include_hidden;
    return Report(dcaudit::cli::RunGenSynthetic(generator, generator_options,
                                                generator_out));
  }
  return EXIT_FAILURE;
}
