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


#include "dcaudit/missing_features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dcaudit/metrics.h"
#include "dcaudit/parallel.h"
#include "dcaudit/random.h"
#include "dcaudit/status_macros.h"

namespace dcaudit::missing {
namespace {

bool IsConstant(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [&](double v) { return v == values.front(); });
}

// Counts pairs i < j with values[i] > values[j], sorting `values`.
int64_t CountInversions(std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<double> buffer(n);
  int64_t inversions = 0;
  for (size_t width = 1; width < n; width *= 2) {
    for (size_t lo = 0; lo < n; lo += 2 * width) {
      const size_t mid = std::min(lo + width, n);
      const size_t hi = std::min(lo + 2 * width, n);
      size_t i = lo;
      size_t j = mid;
      size_t out = lo;
      while (i < mid && j < hi) {
        if (values[j] < values[i]) {
          inversions += static_cast<int64_t>(mid - i);
          buffer[out++] = values[j++];
        } else {
          buffer[out++] = values[i++];
        }
      }
      while (i < mid) buffer[out++] = values[i++];
      while (j < hi) buffer[out++] = values[j++];
    }
    values.swap(buffer);
  }
  return inversions;
}

// Sum of t(t-1)/2 over runs of equal consecutive entries.
template <typename Equal>
double TiedPairs(size_t n, Equal equal) {
  double pairs = 0;
  size_t run = 1;
  for (size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      pairs += 0.5 * static_cast<double>(run) * static_cast<double>(run - 1);
      run = 1;
    }
  }
  return pairs;
}

double Percentile(std::vector<double>& sorted, double q) {
  const double position = q * static_cast<double>(sorted.size() - 1);
  const size_t below = static_cast<size_t>(std::floor(position));
  const size_t above = std::min(below + 1, sorted.size() - 1);
  const double t = position - static_cast<double>(below);
  return sorted[below] + t * (sorted[above] - sorted[below]);
}

Interval PercentileInterval(double estimate, std::vector<double> draws) {
  Interval out{estimate, estimate, estimate};
  if (draws.empty()) return out;
  std::sort(draws.begin(), draws.end());
  out.lo = std::min(Percentile(draws, 0.025), estimate);
  out.hi = std::max(Percentile(draws, 0.975), estimate);
  return out;
}

double Clamp(double r) { return std::clamp(r, -1.0, 1.0); }

}  // namespace

absl::StatusOr<ErrorScale> ParseErrorScale(const std::string& text) {
  if (text == "calibrated") return ErrorScale::kCalibrated;
  if (text == "raw") return ErrorScale::kRaw;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown error scale '", text, "' (calibrated or raw)"));
}

absl::StatusOr<ErrorPairs> ComputeErrorPairs(
    const distill::PairedEnsembles& paired, const AuditDataset& data,
    const BinnedMatrix& x, ErrorScale scale) {
  if (x.num_rows() != data.num_rows()) {
    return absl::InvalidArgumentError("binned matrix does not match the data");
  }
  if (paired.labeled_rows != data.LabeledRows()) {
    return absl::FailedPreconditionError(
        "ensembles were trained on a different dataset");
  }
  const std::vector<double> targets =
      distill::MimicTargets(data, paired.calibration);
  const int K = paired.plan.outer_folds;
  const int L = paired.plan.inner_folds;
  std::vector<bool> done(data.num_rows(), false);
  struct Entry {
    uint32_t row;
    int fold;
    double mimic_error;
    double outcome_error;
  };
  std::vector<Entry> entries;
  for (int k = 0; k < K; ++k) {
    std::vector<uint32_t> rows;
    for (const uint32_t r : paired.TestRows(k)) {
      if (!done[r]) rows.push_back(r);
    }
    if (rows.empty()) continue;
    std::vector<double> mimic(rows.size(), 0.0);
    std::vector<double> outcome(rows.size(), 0.0);
    for (int l = 0; l < L; ++l) {
      ASSIGN_OR_RETURN(const std::vector<double> m,
                       gam::Predict(paired.mimic.model(k, l), x, rows));
      ASSIGN_OR_RETURN(const std::vector<double> o,
                       gam::Predict(paired.outcome.model(k, l), x, rows));
      for (size_t i = 0; i < rows.size(); ++i) {
        mimic[i] += m[i] / L;
        outcome[i] += o[i] / L;
      }
    }
    for (size_t i = 0; i < rows.size(); ++i) {
      const uint32_t r = rows[i];
      done[r] = true;
      double mimic_error = std::abs(mimic[i] - targets[r]);
      if (scale == ErrorScale::kRaw && paired.calibration.has_value()) {
        mimic_error =
            std::abs(paired.calibration->Invert(mimic[i]) - data.scores()[r]);
      }
      const double o = data.outcomes()[r] == Outcome::kPositive ? 1.0 : 0.0;
      entries.push_back({r, k, mimic_error, std::abs(outcome[i] - o)});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.row < b.row; });
  ErrorPairs pairs;
  for (const Entry& e : entries) {
    pairs.rows.push_back(e.row);
    pairs.fold.push_back(e.fold);
    pairs.mimic_error.push_back(e.mimic_error);
    pairs.outcome_error.push_back(e.outcome_error);
  }
  pairs.never_held_out = paired.labeled_rows.size() - entries.size();
  return pairs;
}

std::optional<double> Pearson(std::span<const double> x,
                              std::span<const double> y) {
  const size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return std::nullopt;
  return Clamp(sxy / std::sqrt(sxx * syy));
}

std::optional<double> Spearman(std::span<const double> x,
                               std::span<const double> y) {
  const std::vector<double> rx = AverageRanks(x);
  const std::vector<double> ry = AverageRanks(y);
  return Pearson(rx, ry);
}

std::optional<double> KendallTauB(std::span<const double> x,
                                  std::span<const double> y) {
  const size_t n = x.size();
  if (n < 2) return std::nullopt;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double x_ties = TiedPairs(
      n, [&](size_t i, size_t j) { return x[order[i]] == x[order[j]]; });
  const double joint_ties = TiedPairs(n, [&](size_t i, size_t j) {
    return x[order[i]] == x[order[j]] && y[order[i]] == y[order[j]];
  });
  std::vector<double> ys(n);
  for (size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const double swaps = static_cast<double>(CountInversions(ys));
  const double y_ties =
      TiedPairs(n, [&](size_t i, size_t j) { return ys[i] == ys[j]; });
  const double denominator = (total - x_ties) * (total - y_ties);
  if (denominator <= 0) return std::nullopt;
  return Clamp((total - x_ties - y_ties + joint_ties - 2 * swaps) /
               std::sqrt(denominator));
}

std::string VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kEvidence:
      return "evidence-of-missing-features";
    case Verdict::kWeakEvidence:
      return "weak-evidence";
    case Verdict::kNone:
      break;
  }
  return "none";
}

Verdict DecideVerdict(const Interval& pearson, const Interval& spearman,
                      const Interval& kendall) {
  const double min_lo = std::min({pearson.lo, spearman.lo, kendall.lo});
  const double max_lo = std::max({pearson.lo, spearman.lo, kendall.lo});
  if (min_lo > kWeakLowerBound) return Verdict::kEvidence;
  if (max_lo > 0) return Verdict::kWeakEvidence;
  return Verdict::kNone;
}

absl::StatusOr<CorrelationTestResult> CorrelationTest(
    std::span<const double> mimic_error, std::span<const double> outcome_error,
    const CorrelationTestOptions& options) {
  const size_t n = mimic_error.size();
  if (outcome_error.size() != n) {
    return absl::InvalidArgumentError("error margins differ in length");
  }
  if (n < kMinPairs) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "too few pairs: %d (need at least %d)", n, kMinPairs));
  }
  if (options.resamples < 1) {
    return absl::InvalidArgumentError("resamples must be positive");
  }
  if (IsConstant(mimic_error)) {
    return absl::FailedPreconditionError(
        "degenerate margin: mimic errors are constant");
  }
  if (IsConstant(outcome_error)) {
    return absl::FailedPreconditionError(
        "degenerate margin: outcome errors are constant");
  }
  CorrelationTestResult result;
  result.num_pairs = n;
  result.resamples = options.resamples;
  result.pearson_interval = options.pearson_interval;
  const double pearson = *Pearson(mimic_error, outcome_error);
  const double spearman = *Spearman(mimic_error, outcome_error);
  const double kendall = *KendallTauB(mimic_error, outcome_error);

  const size_t resamples = static_cast<size_t>(options.resamples);
  std::vector<std::optional<double>> p(resamples), s(resamples), t(resamples);
  ParallelFor(resamples, options.jobs, [&](size_t r) {
    Rng rng(DeriveSeed(options.seed, {static_cast<uint64_t>(r)}));
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    std::vector<double> a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      const size_t j = pick(rng);
      a[i] = mimic_error[j];
      b[i] = outcome_error[j];
    }
    p[r] = Pearson(a, b);
    s[r] = Spearman(a, b);
    t[r] = KendallTauB(a, b);
  });
  std::vector<double> p_draws, s_draws, t_draws;
  for (size_t r = 0; r < resamples; ++r) {
    if (!p[r].has_value() || !s[r].has_value() || !t[r].has_value()) {
      ++result.degenerate_resamples;
      continue;
    }
    p_draws.push_back(*p[r]);
    s_draws.push_back(*s[r]);
    t_draws.push_back(*t[r]);
  }
  result.spearman = PercentileInterval(spearman, std::move(s_draws));
  result.kendall = PercentileInterval(kendall, std::move(t_draws));
  if (options.pearson_interval == PearsonInterval::kFisherZ) {
    const double z = std::atanh(std::clamp(pearson, -1 + 1e-15, 1 - 1e-15));
    const double se = 1.0 / std::sqrt(static_cast<double>(n) - 3);
    result.pearson = {pearson, std::min(pearson, std::tanh(z - 1.96 * se)),
                      std::max(pearson, std::tanh(z + 1.96 * se))};
  } else {
    result.pearson = PercentileInterval(pearson, std::move(p_draws));
  }
  result.verdict =
      DecideVerdict(result.pearson, result.spearman, result.kendall);
  return result;
}

absl::StatusOr<ErrorPairs> ParseErrorPairsCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  int mimic_column = 0;
  int outcome_column = 1;
  ErrorPairs pairs;
  const auto parse = [](const std::string& field) -> std::optional<double> {
    size_t used = 0;
    try {
      const double v = std::stod(field, &used);
      while (used < field.size() && std::isspace(
                                        static_cast<unsigned char>(field[used]))) {
        ++used;
      }
      if (used != field.size() || !std::isfinite(v)) return std::nullopt;
      return v;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = SplitDelimitedLine(line, ',');
    if (pairs.size() == 0 && line_number == 1 && fields.size() >= 2 &&
        (!parse(fields[0]).has_value() || !parse(fields[1]).has_value())) {
      const auto find = [&](const std::string& name) {
        const auto it = std::find(fields.begin(), fields.end(), name);
        return it == fields.end() ? -1 : static_cast<int>(it - fields.begin());
      };
      if (find("mimic_error") >= 0 && find("outcome_error") >= 0) {
        mimic_column = find("mimic_error");
        outcome_column = find("outcome_error");
      }
      continue;
    }
    const int needed = std::max(mimic_column, outcome_column) + 1;
    if (static_cast<int>(fields.size()) < needed) {
      return absl::InvalidArgumentError(
          absl::StrFormat("malformed error pair on line %d", line_number));
    }
    const std::optional<double> m = parse(fields[mimic_column]);
    const std::optional<double> o = parse(fields[outcome_column]);
    if (!m.has_value() || !o.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("malformed error pair on line %d", line_number));
    }
    pairs.rows.push_back(static_cast<uint32_t>(pairs.size()));
    pairs.fold.push_back(-1);
    pairs.mimic_error.push_back(*m);
    pairs.outcome_error.push_back(*o);
  }
  return pairs;
}

absl::StatusOr<ErrorPairs> LoadErrorPairsCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseErrorPairsCsv(buffer.str());
}

std::string ErrorPairsToCsv(const ErrorPairs& pairs) {
  std::string out = "row,fold,mimic_error,outcome_error\n";
  for (size_t i = 0; i < pairs.size(); ++i) {
    absl::StrAppend(&out, pairs.rows[i], ",", pairs.fold[i], ",",
                    absl::StrFormat("%.17g", pairs.mimic_error[i]), ",",
                    absl::StrFormat("%.17g", pairs.outcome_error[i]), "\n");
  }
  return out;
}

nlohmann::json ResultToJson(const CorrelationTestResult& result) {
  const auto interval = [](const Interval& i) {
    return nlohmann::json{{"estimate", i.estimate}, {"lo", i.lo}, {"hi", i.hi}};
  };
  return {{"pearson", interval(result.pearson)},
          {"spearman", interval(result.spearman)},
          {"kendall", interval(result.kendall)},
          {"num_pairs", result.num_pairs},
          {"resamples", result.resamples},
          {"degenerate_resamples", result.degenerate_resamples},
          {"pearson_interval",
           result.pearson_interval == PearsonInterval::kFisherZ
               ? "fisher-z"
               : "percentile-bootstrap"},
          {"interval_method", "percentile-bootstrap"},
          {"verdict", VerdictName(result.verdict)}};
}

}  // namespace dcaudit::missing
