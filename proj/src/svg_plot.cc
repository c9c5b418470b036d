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


#include "dcaudit/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace dcaudit::plot {
namespace {

constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 60;

std::string Escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void Add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void Finish() {
    if (!std::isfinite(lo)) {
      lo = 0;
      hi = 1;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

}  // namespace

std::string RenderSvg(const Chart& chart) {
  Range xr, yr;
  for (const Series& s : chart.series) {
    for (const double v : s.x) xr.Add(v);
    for (const double v : s.y) yr.Add(v);
  }
  if (chart.zero_line) yr.Add(0);
  xr.Finish();
  yr.Finish();
  const double plot_w = chart.width - kLeft - kRight;
  const double plot_h = chart.height - kTop - kBottom;
  const auto px = [&](double x) {
    return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w;
  };
  const auto py = [&](double y) {
    return kTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h;
  };

  std::string out = absl::StrFormat(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
      "viewBox=\"0 0 %d %d\" font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
      chart.width, chart.height, chart.width, chart.height);
  absl::StrAppend(
      &out,
      absl::StrFormat("<text x=\"%g\" y=\"20\" text-anchor=\"middle\" "
                      "font-size=\"14\">%s</text>\n",
                      chart.width / 2.0, Escape(chart.title)));
  absl::StrAppend(&out,
                  absl::StrFormat("<rect x=\"%g\" y=\"%g\" width=\"%g\" "
                                  "height=\"%g\" fill=\"none\" "
                                  "stroke=\"#888\"/>\n",
                                  kLeft, kTop, plot_w, plot_h));
  for (int i = 0; i <= 4; ++i) {
    const double y = yr.lo + (yr.hi - yr.lo) * i / 4;
    absl::StrAppend(&out,
                    absl::StrFormat("<text x=\"%g\" y=\"%g\" "
                                    "text-anchor=\"end\">%.3g</text>\n",
                                    kLeft - 5, py(y) + 4, y));
  }
  if (!chart.x_tick_labels.empty()) {
    const size_t step = std::max<size_t>(1, chart.x_tick_labels.size() / 12);
    for (size_t i = 0; i < chart.x_tick_labels.size(); i += step) {
      absl::StrAppend(
          &out, absl::StrFormat("<text x=\"%g\" y=\"%g\" "
                                "text-anchor=\"middle\">%s</text>\n",
                                px(static_cast<double>(i)),
                                kTop + plot_h + 15,
                                Escape(chart.x_tick_labels[i])));
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double x = xr.lo + (xr.hi - xr.lo) * i / 4;
      absl::StrAppend(&out,
                      absl::StrFormat("<text x=\"%g\" y=\"%g\" "
                                      "text-anchor=\"middle\">%.3g</text>\n",
                                      px(x), kTop + plot_h + 15, x));
    }
  }
  absl::StrAppend(
      &out, absl::StrFormat("<text x=\"%g\" y=\"%g\" "
                            "text-anchor=\"middle\">%s</text>\n",
                            kLeft + plot_w / 2, chart.height - 25.0,
                            Escape(chart.x_label)));
  absl::StrAppend(
      &out,
      absl::StrFormat("<text x=\"15\" y=\"%g\" text-anchor=\"middle\" "
                      "transform=\"rotate(-90 15 %g)\">%s</text>\n",
                      kTop + plot_h / 2, kTop + plot_h / 2,
                      Escape(chart.y_label)));
  if (chart.zero_line && yr.lo < 0 && yr.hi > 0) {
    absl::StrAppend(&out, absl::StrFormat(
                              "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                              "stroke=\"#bbb\"/>\n",
                              kLeft, py(0), kLeft + plot_w, py(0)));
  }
  double legend_y = kTop + 12;
  for (const Series& s : chart.series) {
    const size_t n = std::min(s.x.size(), s.y.size());
    if (s.points_only) {
      for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.y[i])) continue;
        absl::StrAppend(&out, absl::StrFormat(
                                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" "
                                  "fill=\"%s\"/>\n",
                                  px(s.x[i]), py(s.y[i]), s.color));
      }
    } else if (n > 0) {
      std::string points;
      for (size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.y[i])) continue;
        if (s.steps && i > 0) {
          absl::StrAppend(&points, absl::StrFormat("%.2f,%.2f ", px(s.x[i]),
                                                   py(s.y[i - 1])));
        }
        absl::StrAppend(&points,
                        absl::StrFormat("%.2f,%.2f ", px(s.x[i]), py(s.y[i])));
      }
      absl::StrAppend(
          &out, absl::StrFormat("<polyline fill=\"none\" stroke=\"%s\" "
                                "stroke-width=\"%s\"%s points=\"%s\"/>\n",
                                s.color, s.dotted ? "1" : "2",
                                s.dotted ? " stroke-dasharray=\"2,3\"" : "",
                                points));
    }
    if (!s.name.empty()) {
      absl::StrAppend(
          &out,
          absl::StrFormat("<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                          "stroke=\"%s\" stroke-width=\"2\"%s/>\n"
                          "<text x=\"%g\" y=\"%g\">%s</text>\n",
                          kLeft + 10, legend_y, kLeft + 30, legend_y, s.color,
                          s.dotted ? " stroke-dasharray=\"2,3\"" : "",
                          kLeft + 35, legend_y + 4, Escape(s.name)));
      legend_y += 14;
    }
  }
  absl::StrAppend(&out, "</svg>\n");
  return out;
}

}  // namespace dcaudit::plot
