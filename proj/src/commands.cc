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


#include "dcaudit/commands.h"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/cord.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dcaudit/binning.h"
#include "dcaudit/compare.h"
#include "dcaudit/dataset.h"
#include "dcaudit/distill.h"
#include "dcaudit/linear.h"
#include "dcaudit/random.h"
#include "dcaudit/status_macros.h"
#include "dcaudit/svg_plot.h"

namespace dcaudit::cli {
namespace {

namespace fs = std::filesystem;

constexpr char kStagePayload[] = "type.dcaudit/stage";
constexpr char kVersion[] = "1.0.0";

absl::Status WriteFile(const fs::path& path, const std::string& contents) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot write ", path.string()));
  }
  out << contents;
  out.close();
  if (!out) {
    return absl::DataLossError(absl::StrCat("failed writing ", path.string()));
  }
  return absl::OkStatus();
}

absl::Status WriteJson(const fs::path& path, const nlohmann::json& json) {
  return WriteFile(path, json.dump(2) + "\n");
}

std::string FileStem(int index, const std::string& name) {
  std::string clean;
  for (const char c : name) {
    clean += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  }
  return absl::StrFormat("%03d_%s", index, clean);
}

std::string NowUtc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

absl::StatusOr<AuditDataset> LoadData(const RunConfig& config) {
  SchemaConfig schema;
  if (!config.config_path.empty()) {
    auto loaded = LoadSchemaConfig(config.config_path);
    if (!loaded.ok()) return Tag(loaded.status(), Stage::kConfig);
    schema = *std::move(loaded);
  }
  if (config.score_column.has_value()) schema.score_column = *config.score_column;
  if (config.outcome_column.has_value()) {
    schema.outcome_column = *config.outcome_column;
  }
  if (config.data_path.empty()) {
    return Tag(absl::InvalidArgumentError("--data is required"),
               Stage::kConfig);
  }
  if (!fs::exists(config.data_path)) {
    return Tag(absl::NotFoundError(
                   absl::StrCat("data file not found: ", config.data_path)),
               Stage::kConfig);
  }
  auto data = LoadCsv(config.data_path, schema);
  if (!data.ok()) return Tag(data.status(), Stage::kData);
  return data;
}

plot::Chart CalibrationChart(const calibrate::CalibrationDiagnostics& d,
                             const std::string& title,
                             const std::string& x_label) {
  plot::Chart chart;
  chart.title = title;
  chart.x_label = x_label;
  chart.y_label = "logit of empirical P(outcome = 1)";
  chart.zero_line = false;
  plot::Series points;
  points.name = "empirical";
  points.color = "#1f77b4";
  points.points_only = true;
  for (const calibrate::CalibrationLevel& level : d.levels) {
    points.x.push_back(level.score);
    points.y.push_back(level.empirical_logit);
  }
  plot::Series line;
  line.name = absl::StrFormat("least-squares line (residual %.3f)",
                              d.linearity_residual);
  line.color = "#444";
  if (!d.levels.empty()) {
    for (const double x : {d.levels.front().score, d.levels.back().score}) {
      line.x.push_back(x);
      line.y.push_back(d.logit_line.intercept + d.logit_line.slope * x);
    }
  }
  chart.series = {std::move(points), std::move(line)};
  return chart;
}

plot::Chart CurveChart(const compare::FeatureComparison& c,
                       const FeatureBinning& binning) {
  plot::Chart chart;
  chart.title = c.mimic.name;
  chart.x_label = c.mimic.name;
  chart.y_label = "contribution";
  const bool numeric = binning.kind == FeatureKind::kNumeric;
  std::vector<int> bins;
  for (int b = 0; b < binning.num_value_bins(); ++b) bins.push_back(b);
  if (c.bin_mass[binning.missing_bin()] > 0) {
    bins.push_back(binning.missing_bin());
  }
  const bool steps = numeric && binning.num_value_bins() > 2;
  const auto make = [&](const std::string& name, const std::string& color,
                        const std::vector<double>& values, bool dotted) {
    plot::Series s;
    s.name = name;
    s.color = color;
    s.dotted = dotted;
    s.steps = steps;
    s.points_only = !steps && !dotted;
    for (size_t i = 0; i < bins.size(); ++i) {
      const int b = bins[i];
      if (numeric && b == binning.missing_bin()) continue;
      s.x.push_back(numeric ? binning.BinPosition(b) : static_cast<double>(i));
      s.y.push_back(values[b]);
    }
    return s;
  };
  chart.series.push_back(make("mimic", plot::kMimicColor, c.mimic.mean, false));
  chart.series.push_back(make("", plot::kMimicColor, c.mimic.lower, true));
  chart.series.push_back(make("", plot::kMimicColor, c.mimic.upper, true));
  chart.series.push_back(
      make("outcome", plot::kOutcomeColor, c.outcome.mean, false));
  chart.series.push_back(make("", plot::kOutcomeColor, c.outcome.lower, true));
  chart.series.push_back(make("", plot::kOutcomeColor, c.outcome.upper, true));
  if (!numeric) {
    for (const int b : bins) chart.x_tick_labels.push_back(binning.BinLabel(b));
  }
  return chart;
}

nlohmann::json CalibrationJson(const calibrate::CalibrationResult& result) {
  const calibrate::CalibrationDecision& d = result.decision;
  nlohmann::json decision = {
      {"mode", calibrate::CalibrationModeName(d.mode)},
      {"calibrated", d.calibrated},
      {"residual_before", d.residual_before},
      {"threshold", d.threshold},
      {"reason", d.reason}};
  decision["residual_after"] = d.residual_after.has_value()
                                   ? nlohmann::json(*d.residual_after)
                                   : nlohmann::json();
  nlohmann::json out = {
      {"decision", std::move(decision)},
      {"diagnostics_before", calibrate::DiagnosticsToJson(result.before)}};
  out["map"] = result.map.has_value() ? calibrate::MapToJson(*result.map)
                                      : nlohmann::json();
  out["diagnostics_after"] = result.after.has_value()
                                 ? calibrate::DiagnosticsToJson(*result.after)
                                 : nlohmann::json();
  return out;
}

// Runs the mode on the labeled rows and writes calibration.json, diagnostics
// CSVs and plots under `out`.
absl::StatusOr<calibrate::CalibrationResult> CalibrateAndWrite(
    const AuditDataset& data, const RunConfig& config, const fs::path& out) {
  const std::vector<uint32_t> labeled = data.LabeledRows();
  std::vector<double> scores;
  for (const uint32_t r : labeled) scores.push_back(data.scores()[r]);
  const std::vector<double> outcomes = data.OutcomeValues(labeled);
  auto result = calibrate::Calibrate(scores, outcomes, config.calibration,
                                     config.calibration_threshold);
  if (!result.ok()) return Tag(result.status(), Stage::kData);
  RETURN_IF_ERROR(WriteJson(out / "calibration.json", CalibrationJson(*result)));
  RETURN_IF_ERROR(WriteFile(out / "calibration_diagnostics.csv",
                            calibrate::DiagnosticsToCsv(result->before)));
  RETURN_IF_ERROR(WriteFile(
      out / "plots" / "calibration_before.svg",
      plot::RenderSvg(CalibrationChart(result->before,
                                       "Before calibration", "raw score"))));
  if (result->after.has_value()) {
    RETURN_IF_ERROR(WriteFile(out / "calibration_diagnostics_after.csv",
                              calibrate::DiagnosticsToCsv(*result->after)));
    RETURN_IF_ERROR(WriteFile(
        out / "plots" / "calibration_after.svg",
        plot::RenderSvg(CalibrationChart(*result->after, "After calibration",
                                         "calibrated score"))));
  }
  return result;
}

absl::Status ValidateRunConfig(const RunConfig& config) {
  if (config.out_dir.empty()) {
    return absl::InvalidArgumentError("--out is required");
  }
  if (config.outer_folds < 2 || config.inner_folds < 2) {
    return absl::InvalidArgumentError("--K and --L must be at least 2");
  }
  if (config.jobs < 1) return absl::InvalidArgumentError("--jobs must be >= 1");
  if (config.resamples < 1) {
    return absl::InvalidArgumentError("--resamples must be >= 1");
  }
  if (config.train.interaction_pairs < 0) {
    return absl::InvalidArgumentError("--pairs must be >= 0");
  }
  if (!(config.l2 >= 0)) return absl::InvalidArgumentError("--l2 must be >= 0");
  return gam::ValidateConfig(config.train);
}

}  // namespace

std::string StageName(Stage stage) {
  switch (stage) {
    case Stage::kConfig:
      return "config";
    case Stage::kData:
      return "data";
    case Stage::kTraining:
      return "training";
    case Stage::kStatistics:
      return "statistics";
  }
  return "unknown";
}

int ExitCode(Stage stage) {
  switch (stage) {
    case Stage::kConfig:
      return 2;
    case Stage::kData:
      return 3;
    case Stage::kTraining:
      return 4;
    case Stage::kStatistics:
      return 5;
  }
  return 1;
}

absl::Status Tag(absl::Status status, Stage stage) {
  if (status.ok() || StageOf(status).has_value()) return status;
  status.SetPayload(kStagePayload, absl::Cord(StageName(stage)));
  return status;
}

std::optional<Stage> StageOf(const absl::Status& status) {
  const auto payload = status.GetPayload(kStagePayload);
  if (!payload.has_value()) return std::nullopt;
  const std::string name(*payload);
  for (const Stage stage : {Stage::kConfig, Stage::kData, Stage::kTraining,
                            Stage::kStatistics}) {
    if (StageName(stage) == name) return stage;
  }
  return std::nullopt;
}

int ExitCodeFor(const absl::Status& status) {
  if (status.ok()) return 0;
  const std::optional<Stage> stage = StageOf(status);
  return stage.has_value() ? ExitCode(*stage) : 1;
}

nlohmann::json RunConfigToJson(const RunConfig& config) {
  nlohmann::json json = {
      {"data", config.data_path},
      {"config", config.config_path},
      {"calibration", calibrate::CalibrationModeName(config.calibration)},
      {"calibration_threshold", config.calibration_threshold},
      {"K", config.outer_folds},
      {"L", config.inner_folds},
      {"seed", config.seed},
      {"learning_rate", config.train.learning_rate},
      {"max_rounds", config.train.max_rounds},
      {"max_leaves", config.train.max_leaves},
      {"patience", config.train.patience},
      {"early_stopping", config.train.early_stopping},
      {"min_relative_improvement", config.train.min_relative_improvement},
      {"pairs", config.train.interaction_pairs},
      {"max_bins", config.max_bins},
      {"l2", config.l2},
      {"resamples", config.resamples},
      {"error_scale", config.error_scale == missing::ErrorScale::kRaw
                          ? "raw"
                          : "calibrated"},
      {"pearson_interval", config.fisher_z ? "fisher-z" : "percentile-bootstrap"},
  };
  json["score_column"] = config.score_column.has_value()
                             ? nlohmann::json(*config.score_column)
                             : nlohmann::json();
  json["outcome_column"] = config.outcome_column.has_value()
                               ? nlohmann::json(*config.outcome_column)
                               : nlohmann::json();
  return json;
}

absl::Status RunCalibrate(const RunConfig& config) {
  if (config.out_dir.empty()) {
    return Tag(absl::InvalidArgumentError("--out is required"), Stage::kConfig);
  }
  ASSIGN_OR_RETURN(const AuditDataset data, LoadData(config));
  if (data.LabeledRows().empty()) {
    return Tag(absl::InvalidArgumentError("no labeled rows"), Stage::kData);
  }
  return CalibrateAndWrite(data, config, config.out_dir).status();
}

absl::StatusOr<nlohmann::json> RunAudit(const RunConfig& config) {
  if (absl::Status s = ValidateRunConfig(config); !s.ok()) {
    return Tag(s, Stage::kConfig);
  }
  using Clock = std::chrono::steady_clock;
  const Clock::time_point start = Clock::now();
  nlohmann::json timings = nlohmann::json::object();
  Clock::time_point stage_start = start;
  const auto lap = [&](const std::string& name) {
    const Clock::time_point now = Clock::now();
    timings[name] = std::chrono::duration<double>(now - stage_start).count();
    stage_start = now;
  };
  const fs::path out(config.out_dir);
  const std::string started = NowUtc();

  nlohmann::json report;
  report["tool"] = {{"name", "dcaudit"}, {"version", kVersion}};
  report["config"] = RunConfigToJson(config);

  const auto write_metadata = [&](const std::string& status) {
    return WriteJson(out / "run_metadata.json",
                     {{"started_utc", started},
                      {"finished_utc", NowUtc()},
                      {"jobs", config.jobs},
                      {"status", status},
                      {"stage_seconds", timings},
                      {"total_seconds",
                       std::chrono::duration<double>(Clock::now() - start)
                           .count()}});
  };
  // Stops the run: the partial report and sidecar are kept on disk.
  const auto fail = [&](absl::Status status,
                        Stage stage) -> absl::StatusOr<nlohmann::json> {
    status = Tag(std::move(status), stage);
    const std::optional<Stage> tagged = StageOf(status);
    report["failure"] = {
        {"stage", StageName(tagged.value_or(stage))},
        {"message", std::string(status.message())}};
    (void)WriteJson(out / "report.json", report);
    (void)write_metadata("failed");
    return status;
  };

  std::error_code ec;
  fs::create_directories(out / "models", ec);
  fs::create_directories(out / "curves", ec);
  fs::create_directories(out / "plots", ec);
  if (ec) {
    return Tag(absl::PermissionDeniedError(
                   absl::StrCat("cannot create ", out.string())),
               Stage::kConfig);
  }

  absl::StatusOr<AuditDataset> loaded = LoadData(config);
  if (!loaded.ok()) return fail(loaded.status(), Stage::kData);
  const AuditDataset& data = *loaded;
  const std::vector<uint32_t> labeled = data.LabeledRows();
  report["data"] = {
      {"rows", data.num_rows()},
      {"labeled_rows", labeled.size()},
      {"score_only_rows", data.num_score_only()},
      {"rejected_rows", data.rejected_rows()},
      {"features", data.num_features()},
      {"fingerprint_fnv1a64", absl::StrFormat("%016x", data.fingerprint())}};
  if (labeled.empty()) {
    return fail(absl::InvalidArgumentError("no labeled rows"), Stage::kData);
  }
  lap("load");

  absl::StatusOr<calibrate::CalibrationResult> calibration =
      CalibrateAndWrite(data, config, out);
  if (!calibration.ok()) return fail(calibration.status(), Stage::kData);
  report["calibration"] = CalibrationJson(*calibration);
  lap("calibrate");

  absl::StatusOr<FeatureSchema> schema = FitSchema(data, config.max_bins);
  if (!schema.ok()) return fail(schema.status(), Stage::kData);
  auto schema_ptr = std::make_shared<const FeatureSchema>(*std::move(schema));
  absl::StatusOr<BinnedMatrix> x = Bin(data, schema_ptr);
  if (!x.ok()) return fail(x.status(), Stage::kData);
  if (absl::Status s = WriteJson(out / "models" / "schema.json",
                                 SchemaToJson(*schema_ptr));
      !s.ok()) {
    return fail(s, Stage::kConfig);
  }

  absl::StatusOr<distill::BagPlan> plan = distill::PlanBags(
      labeled.size(), config.outer_folds, config.inner_folds, config.seed);
  if (!plan.ok()) return fail(plan.status(), Stage::kData);
  if (absl::Status s =
          WriteJson(out / "models" / "plan.json", distill::PlanToJson(*plan));
      !s.ok()) {
    return fail(s, Stage::kConfig);
  }
  lap("bin_and_plan");

  gam::TrainConfig train = config.train;
  train.seed = config.seed;
  absl::StatusOr<distill::PairedEnsembles> paired = distill::TrainPaired(
      data, *x, calibration->map, *plan, train, config.jobs);
  if (!paired.ok()) return fail(paired.status(), Stage::kTraining);
  const std::vector<std::pair<std::string, const distill::BagEnsemble*>>
      ensembles = {
          {"mimic_gam", &paired->mimic},
          {"outcome_gam", &paired->outcome},
          {"mimic_gam_interactions",
           paired->mimic_interactions ? &*paired->mimic_interactions : nullptr},
          {"outcome_gam_interactions",
           paired->outcome_interactions ? &*paired->outcome_interactions
                                        : nullptr}};
  nlohmann::json model_files = nlohmann::json::object();
  for (const auto& [name, ensemble] : ensembles) {
    if (ensemble == nullptr) continue;
    const std::string file = absl::StrCat("models/", name, ".json");
    if (absl::Status s =
            WriteJson(out / file, distill::EnsembleToJson(*ensemble));
        !s.ok()) {
      return fail(s, Stage::kConfig);
    }
    model_files[name] = file;
  }
  lap("train_gam");

  absl::StatusOr<baseline::LinearEnsembles> linear =
      baseline::TrainLinearPaired(*paired, data, config.l2, config.jobs);
  if (!linear.ok()) return fail(linear.status(), Stage::kTraining);
  if (absl::Status s = WriteJson(out / "models" / "linear.json",
                                 baseline::LinearEnsemblesToJson(*linear));
      !s.ok()) {
    return fail(s, Stage::kConfig);
  }
  model_files["linear"] = "models/linear.json";
  model_files["schema"] = "models/schema.json";
  model_files["plan"] = "models/plan.json";
  lap("train_linear");

  nlohmann::json fidelity;
  {
    absl::StatusOr<distill::FidelityMetrics> main = distill::Fidelity(
        *paired, data, *x, distill::ModelVariant::kMainEffects);
    if (!main.ok()) return fail(main.status(), Stage::kTraining);
    fidelity["gam_main_effects"] = distill::FidelityToJson(*main);
    if (paired->mimic_interactions.has_value()) {
      absl::StatusOr<distill::FidelityMetrics> with_pairs = distill::Fidelity(
          *paired, data, *x, distill::ModelVariant::kInteractions);
      if (!with_pairs.ok()) return fail(with_pairs.status(), Stage::kTraining);
      fidelity["gam_interactions"] = distill::FidelityToJson(*with_pairs);
    } else {
      fidelity["gam_interactions"] = nullptr;
    }
    absl::StatusOr<distill::FidelityMetrics> lin =
        baseline::LinearFidelity(*linear, *paired, data);
    if (!lin.ok()) return fail(lin.status(), Stage::kTraining);
    fidelity["linear"] = distill::FidelityToJson(*lin);
  }
  report["fidelity"] = std::move(fidelity);
  lap("fidelity");

  absl::StatusOr<compare::ComparisonSummary> summary =
      compare::Summarize(*paired, *x);
  if (!summary.ok()) return fail(summary.status(), Stage::kStatistics);
  report["curves"] = compare::SummaryToJson(*summary, *schema_ptr);
  if (absl::Status s = WriteFile(out / "curves" / "all_features.csv",
                                 compare::CurvesToCsv(*summary, *schema_ptr));
      !s.ok()) {
    return fail(s, Stage::kConfig);
  }
  for (size_t f = 0; f < summary->features.size(); ++f) {
    compare::ComparisonSummary single;
    single.features.push_back(summary->features[f]);
    const FeatureBinning& binning = schema_ptr->features[f];
    const std::string stem = FileStem(static_cast<int>(f), binning.name);
    absl::Status s = WriteFile(out / "curves" / (stem + ".csv"),
                               compare::CurvesToCsv(single, *schema_ptr));
    if (s.ok()) {
      s = WriteFile(out / "plots" / (stem + ".svg"),
                    plot::RenderSvg(CurveChart(summary->features[f], binning)));
    }
    if (!s.ok()) return fail(s, Stage::kConfig);
  }
  if (paired->mimic_interactions.has_value()) {
    absl::Status s = WriteFile(
        out / "curves" / "interactions_mimic.csv",
        compare::SurfacesToCsv(*paired->mimic_interactions, *schema_ptr));
    if (s.ok()) {
      s = WriteFile(
          out / "curves" / "interactions_outcome.csv",
          compare::SurfacesToCsv(*paired->outcome_interactions, *schema_ptr));
    }
    if (!s.ok()) return fail(s, Stage::kConfig);
  }
  lap("compare");

  absl::StatusOr<missing::ErrorPairs> pairs =
      missing::ComputeErrorPairs(*paired, data, *x, config.error_scale);
  if (!pairs.ok()) return fail(pairs.status(), Stage::kStatistics);
  if (absl::Status s = WriteFile(out / "models" / "error_pairs.csv",
                                 missing::ErrorPairsToCsv(*pairs));
      !s.ok()) {
    return fail(s, Stage::kConfig);
  }
  model_files["error_pairs"] = "models/error_pairs.csv";
  report["artifacts"] = model_files;
  missing::CorrelationTestOptions options;
  options.resamples = config.resamples;
  options.seed = DeriveSeed(config.seed, {0x6d697373});
  options.jobs = config.jobs;
  options.pearson_interval = config.fisher_z
                                 ? missing::PearsonInterval::kFisherZ
                                 : missing::PearsonInterval::kBootstrap;
  absl::StatusOr<missing::CorrelationTestResult> test =
      missing::CorrelationTest(pairs->mimic_error, pairs->outcome_error,
                               options);
  if (!test.ok()) return fail(test.status(), Stage::kStatistics);
  nlohmann::json test_json = missing::ResultToJson(*test);
  test_json["rows_never_held_out"] = pairs->never_held_out;
  test_json["error_scale"] = config.error_scale == missing::ErrorScale::kRaw
                                 ? "raw"
                                 : "calibrated";
  test_json["rows"] = "held-out outer-fold test rows";
  report["missing_feature_test"] = std::move(test_json);
  lap("missing_feature_test");

  if (absl::Status s = WriteJson(out / "report.json", report); !s.ok()) {
    return Tag(s, Stage::kConfig);
  }
  if (absl::Status s = write_metadata("ok"); !s.ok()) {
    return Tag(s, Stage::kConfig);
  }
  return report;
}

absl::StatusOr<nlohmann::json> RunTestMissing(const TestMissingConfig& config) {
  if (config.out_dir.empty()) {
    return Tag(absl::InvalidArgumentError("--out is required"), Stage::kConfig);
  }
  if (!fs::exists(config.errors_path)) {
    return Tag(absl::NotFoundError(absl::StrCat("error pair file not found: ",
                                                config.errors_path)),
               Stage::kConfig);
  }
  absl::StatusOr<missing::ErrorPairs> pairs =
      missing::LoadErrorPairsCsv(config.errors_path);
  if (!pairs.ok()) return Tag(pairs.status(), Stage::kData);
  absl::StatusOr<missing::CorrelationTestResult> result =
      missing::CorrelationTest(pairs->mimic_error, pairs->outcome_error,
                               config.options);
  if (!result.ok()) return Tag(result.status(), Stage::kStatistics);
  nlohmann::json json = missing::ResultToJson(*result);
  json["seed"] = config.options.seed;
  RETURN_IF_ERROR(Tag(
      WriteJson(fs::path(config.out_dir) / "missing_feature_test.json", json),
      Stage::kConfig));
  return json;
}

absl::Status RunGenSynthetic(const std::string& generator,
                             const synthetic::GeneratorOptions& options,
                             const std::string& out_path) {
  if (out_path.empty()) {
    return Tag(absl::InvalidArgumentError("--out is required"), Stage::kConfig);
  }
  absl::StatusOr<AuditDataset> data = synthetic::Generate(generator, options);
  if (!data.ok()) return Tag(data.status(), Stage::kConfig);
  return Tag(WriteFile(out_path, DatasetToCsv(*data, SchemaConfig())),
             Stage::kConfig);
}

}  // namespace dcaudit::cli
