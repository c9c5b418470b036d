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


// Minimal standalone SVG line charts.

#ifndef DCAUDIT_SVG_PLOT_H_
#define DCAUDIT_SVG_PLOT_H_

#include <string>
#include <vector>

namespace dcaudit::plot {

struct Series {
  std::string name;
  // Any SVG color, e.g. "#d62728".
  std::string color = "black";
  std::vector<double> x;
  std::vector<double> y;
  bool dotted = false;
  // Draw points instead of a connected line.
  bool points_only = false;
  // Draw as a step function (value held until the next x).
  bool steps = false;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  // When non-empty, x positions 0..n-1 are labelled with these strings.
  std::vector<std::string> x_tick_labels;
  bool zero_line = true;
  int width = 640;
  int height = 420;
};

std::string RenderSvg(const Chart& chart);

inline constexpr char kMimicColor[] = "#d62728";
inline constexpr char kOutcomeColor[] = "#2ca02c";

}  // namespace dcaudit::plot

#endif  // DCAUDIT_SVG_PLOT_H_
