/*
 * Copyright (c) 2026 The xsl Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "xsl/report/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "xsl/errors.hpp"

namespace xsl {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Frame {
  double plot_w = kWidth - kLeft - kRight;
  double plot_h = kHeight - kTop - kBottom;
  double y(double acc) const { return kTop + plot_h * (1.0 - acc); }
};

void open_svg(std::ostringstream& s, const std::string& title) {
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
}

void y_axis(std::ostringstream& s, const Frame& f) {
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + f.plot_h
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double acc = 0.25 * i;
    s << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(f.y(acc)) << "\" x2=\"" << kLeft << "\" y2=\""
      << num(f.y(acc)) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(f.y(acc) + 4) << "\" text-anchor=\"end\">" << acc
      << "</text>\n";
  }
  s << "<text transform=\"translate(20," << num(kTop + f.plot_h / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">4AFC accuracy</text>\n";
}

void chance_line(std::ostringstream& s, const Frame& f) {
  s << "<line class=\"chance\" x1=\"" << kLeft << "\" y1=\"" << num(f.y(0.25)) << "\" x2=\"" << kLeft + f.plot_w
    << "\" y2=\"" << num(f.y(0.25)) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
}

void error_bar(std::ostringstream& s, double x, const Frame& f, const Summary& v, const char* color) {
  const double lo = std::max(0.0, v.mean - v.ci95_halfwidth), hi = std::min(1.0, v.mean + v.ci95_halfwidth);
  s << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.y(lo)) << "\" x2=\"" << num(x) << "\" y2=\"" << num(f.y(hi))
    << "\" stroke=\"" << color << "\"/>\n";
  for (double acc : {lo, hi})
    s << "<line x1=\"" << num(x - 4) << "\" y1=\"" << num(f.y(acc)) << "\" x2=\"" << num(x + 4) << "\" y2=\""
      << num(f.y(acc)) << "\" stroke=\"" << color << "\"/>\n";
}

void legend(std::ostringstream& s, std::size_t i, const std::string& label, const char* color) {
  const double y = kTop + 20.0 * static_cast<double>(i);
  const double x = kWidth - kRight + 20;
  s << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 20 << "\" y2=\"" << y << "\" stroke=\"" << color
    << "\" stroke-width=\"2\"/>\n"
    << "<text x=\"" << x + 26 << "\" y=\"" << y + 4 << "\">" << label << "</text>\n";
}

}  // namespace

std::string accuracy_plot_svg(std::span<const AggregateRow> rows, ExemplarMode mode) {
  std::map<int, std::vector<const AggregateRow*>> series;
  std::set<int> sizes;
  for (const auto& r : rows)
    if (r.key.exemplar_mode == mode && r.key.arch == Arch::kObjectCnn) {
      series[r.key.condition_k].push_back(&r);
      sizes.insert(r.key.n_pairs);
    }
  if (series.empty()) return {};
  const Frame f;
  const double lmin = std::log10(*sizes.begin()), lmax = std::log10(*sizes.rbegin());
  const auto x_of = [&](int n) {
    if (lmax == lmin) return kLeft + f.plot_w / 2;
    return kLeft + f.plot_w * (std::log10(n) - lmin) / (lmax - lmin);
  };

  std::ostringstream s;
  open_svg(s, std::string("Accuracy vs. training pairs (") + exemplar_mode_name(mode) + " exemplars)");
  y_axis(s, f);
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + f.plot_h << "\" x2=\"" << kLeft + f.plot_w << "\" y2=\""
    << kTop + f.plot_h << "\" stroke=\"black\"/>\n";
  for (int n : sizes)
    s << "<line x1=\"" << num(x_of(n)) << "\" y1=\"" << kTop + f.plot_h << "\" x2=\"" << num(x_of(n)) << "\" y2=\""
      << kTop + f.plot_h + 5 << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(x_of(n)) << "\" y=\"" << kTop + f.plot_h + 20 << "\" text-anchor=\"middle\">" << n
      << "</text>\n";
  s << "<text x=\"" << kLeft + f.plot_w / 2 << "\" y=\"" << kHeight - 15
    << "\" text-anchor=\"middle\">matching word-object pairs (log scale)</text>\n";
  chance_line(s, f);

  std::size_t i = 0;
  for (auto& [k, points] : series) {
    const char* color = kColors[i % std::size(kColors)];
    std::sort(points.begin(), points.end(),
              [](const AggregateRow* a, const AggregateRow* b) { return a->key.n_pairs < b->key.n_pairs; });
    s << "<polyline class=\"series\" data-k=\"" << k << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
    for (const auto* p : points) s << num(x_of(p->key.n_pairs)) << ',' << num(f.y(p->eval.mean)) << ' ';
    s << "\"/>\n";
    for (const auto* p : points) {
      error_bar(s, x_of(p->key.n_pairs), f, p->eval, color);
      s << "<circle cx=\"" << num(x_of(p->key.n_pairs)) << "\" cy=\"" << num(f.y(p->eval.mean))
        << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    legend(s, i, "k = " + std::to_string(k), color);
    ++i;
  }
  s << "</svg>\n";
  return s.str();
}

std::string arch_comparison_svg(std::span<const AggregateRow> rows, ExemplarMode mode) {
  std::map<int, std::set<int>> object_sizes, scene_sizes;
  for (const auto& r : rows)
    if (r.key.exemplar_mode == mode)
      (r.key.arch == Arch::kObjectCnn ? object_sizes : scene_sizes)[r.key.condition_k].insert(r.key.n_pairs);
  int shared = -1;
  for (const auto& [k, sizes] : scene_sizes)
    if (object_sizes.count(k))
      for (int n : sizes)
        if (object_sizes[k].count(n)) shared = std::max(shared, n);
  if (shared < 0) return {};

  std::map<std::pair<int, Arch>, Summary> values;
  std::set<int> ks;
  for (const auto& r : rows)
    if (r.key.exemplar_mode == mode && r.key.n_pairs == shared) {
      values[{r.key.condition_k, r.key.arch}] = r.eval;
      ks.insert(r.key.condition_k);
    }
  const Frame f;
  std::ostringstream s;
  open_svg(s, std::string("Object vs. scene network (") + exemplar_mode_name(mode) + ", " + std::to_string(shared) +
                  " pairs)");
  y_axis(s, f);
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + f.plot_h << "\" x2=\"" << kLeft + f.plot_w << "\" y2=\""
    << kTop + f.plot_h << "\" stroke=\"black\"/>\n";
  const double group_w = f.plot_w / static_cast<double>(ks.size());
  const double bar_w = group_w / 3;
  std::size_t g = 0;
  for (int k : ks) {
    const double gx = kLeft + group_w * static_cast<double>(g);
    std::size_t b = 0;
    for (Arch a : {Arch::kObjectCnn, Arch::kSceneCnn}) {
      const auto it = values.find({k, a});
      const char* color = kColors[b];
      const double x = gx + bar_w * (0.5 + static_cast<double>(b));
      if (it != values.end()) {
        s << "<rect class=\"bar\" data-arch=\"" << arch_name(a) << "\" x=\"" << num(x) << "\" y=\""
          << num(f.y(it->second.mean)) << "\" width=\"" << num(bar_w) << "\" height=\""
          << num(f.y(0) - f.y(it->second.mean)) << "\" fill=\"" << color << "\"/>\n";
        error_bar(s, x + bar_w / 2, f, it->second, "black");
      }
      ++b;
    }
    s << "<text x=\"" << num(gx + group_w / 2) << "\" y=\"" << kTop + f.plot_h + 20
      << "\" text-anchor=\"middle\">k = " << k << "</text>\n";
    ++g;
  }
  chance_line(s, f);
  legend(s, 0, arch_name(Arch::kObjectCnn), kColors[0]);
  legend(s, 1, arch_name(Arch::kSceneCnn), kColors[1]);
  s << "</svg>\n";
  return s.str();
}

std::vector<std::filesystem::path> emit_report(std::span<const AggregateRow> rows,
                                               const std::filesystem::path& out_dir) {
  if (rows.empty()) throw UsageError("emit_report: empty aggregate table");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  const auto put = [&](const std::string& name, const std::string& svg) {
    if (svg.empty()) return;
    const auto path = out_dir / name;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << svg;
    written.push_back(path);
  };
  for (ExemplarMode m : {ExemplarMode::kFixed, ExemplarMode::kVarying}) {
    put(std::string("accuracy_") + exemplar_mode_name(m) + ".svg", accuracy_plot_svg(rows, m));
    put(std::string("arch_comparison_") + exemplar_mode_name(m) + ".svg", arch_comparison_svg(rows, m));
  }
  return written;
}

}  // namespace xsl
