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


#include <gtest/gtest.h>
#include <omp.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "test_support.hpp"
#include "xsl/data/idx.hpp"
#include "xsl/errors.hpp"
#include "xsl/report/attention_export.hpp"
#include "xsl/report/svg_report.hpp"
#include "xsl/report/sweep.hpp"

namespace xsl {
namespace {

using test::temp_dir;

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Four IDX files holding 3 patterned exemplars per class in each split.
std::filesystem::path fake_mnist(const std::string& name) {
  const auto dir = temp_dir(name);
  for (const char* prefix : {"train", "t10k"}) {
    const std::size_t n = 30;
    ImageStack images{n, kDigitSide, kDigitSide, std::vector<float>(n * kDigitPixels)};
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<std::uint8_t>(i % 10);
      for (std::size_t p = 0; p < kDigitPixels; ++p)
        images.pixels[i * kDigitPixels + p] = static_cast<float>((i * 37 + p * 11 + prefix[0]) % 256) / 255.0f;
    }
    write_bytes(dir / (std::string(prefix) + "-images-idx3-ubyte"), serialize_idx_images(images));
    write_bytes(dir / (std::string(prefix) + "-labels-idx1-ubyte"), serialize_idx_labels(labels));
  }
  return dir;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::filesystem::path& path) {
  std::vector<std::string> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t count_matches(const std::string& text, const std::string& pattern) {
  const std::regex re(pattern);
  return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), {}));
}

std::string plan_text(const std::filesystem::path& data, const std::filesystem::path& out, const std::string& body) {
  return "dataset_dir=" + data.string() + "\noutput_dir=" + out.string() + "\n" + body;
}

// ---- plans ------------------------------------------------------------------

TEST(Plan, GridExpandsToRunCells) {
  const auto data = temp_dir("plan_grid");
  const auto plan = parse_plan(plan_text(data, "out",
                                         "[cell]\nk=2,3,4\nexemplar_mode=fixed\n"
                                         "n_pairs=36,72,144,360,720\narch=object_cnn\n"));
  EXPECT_EQ(plan.cells.size(), 15u);
  const auto runs = plan.runs();
  EXPECT_EQ(runs.size(), 75u);
  EXPECT_EQ(runs[0].seed, 0u);
  EXPECT_EQ(runs[4].seed, 4u);
  EXPECT_EQ(runs[5].seed, 0u);
  EXPECT_EQ(runs[5].n_pairs, 72);
}

TEST(Plan, SnapshotRecordsDefaultsAndParsesBack) {
  const auto data = temp_dir("plan_snapshot");
  const auto plan = parse_plan(plan_text(data, "out", "[cell]\nk=3\nn_pairs=72\n"));
  const auto snap = plan.snapshot();
  EXPECT_NE(snap.find("\nseeds=5\n"), std::string::npos);
  EXPECT_NE(snap.find("\nepochs=1000\n"), std::string::npos);
  EXPECT_NE(snap.find("exemplar_mode=fixed"), std::string::npos);
  EXPECT_NE(snap.find("arch=object_cnn"), std::string::npos);
  EXPECT_EQ(parse_plan(snap).snapshot(), snap);
}

TEST(Plan, ErrorsNameLineAndKey) {
  const auto data = temp_dir("plan_errors");
  const auto message = [&](const std::string& body) -> std::string {
    try {
      parse_plan(plan_text(data, "out", body));
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "no error";
  };
  auto m = message("colour=blue\n[cell]\nk=2\nn_pairs=72\n");
  EXPECT_NE(m.find("line 3"), std::string::npos) << m;
  EXPECT_NE(m.find("colour"), std::string::npos) << m;

  m = message("[cell]\nk=2\nn_pairs=35\n");
  EXPECT_NE(m.find("line 5"), std::string::npos) << m;
  EXPECT_NE(m.find("n_pairs"), std::string::npos) << m;

  m = message("seeds=0\n[cell]\nk=2\nn_pairs=72\n");
  EXPECT_NE(m.find("seeds"), std::string::npos) << m;
  m = message("[cell]\nk=2\nn_pairs=72\nsize=3\n");
  EXPECT_NE(m.find("size"), std::string::npos) << m;
  m = message("[cell]\nk=5\nn_pairs=72\n");
  EXPECT_NE(m.find("'k'"), std::string::npos) << m;
  m = message("epochs=many\n[cell]\nk=2\nn_pairs=72\n");
  EXPECT_NE(m.find("epochs"), std::string::npos) << m;
  EXPECT_NE(message(""), "no error");

  try {
    parse_plan("dataset_dir=" + (data / "absent").string() + "\n[cell]\nk=2\nn_pairs=72\n");
    ADD_FAILURE() << "missing dataset directory accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("dataset_dir"), std::string::npos);
  }
  EXPECT_THROW(load_plan(data / "absent.plan"), IoError);
}

// ---- attention export -------------------------------------------------------

TEST(AttentionExport, GrayLevelsAreLinear) {
  EXPECT_EQ(attention_gray(1.0), 255);
  EXPECT_EQ(attention_gray(0.0), 0);
  EXPECT_EQ(attention_gray(0.5), 128);
  EXPECT_EQ(attention_gray(0.2), 51);
  EXPECT_EQ(attention_gray(1.7), 255);
  EXPECT_EQ(attention_gray(-0.1), 0);
}

TEST(AttentionExport, CanvasFillsQuadrants) {
  AttentionMap a;
  a.words = {4, 7};
  a.scores = {0, 1, 0.5, 0.2, 1, 1, 1, 1};
  const auto c = attention_canvas(a, 0);
  ASSERT_EQ(c.size(), kScenePixels);
  EXPECT_EQ(c[0], 0.0f);
  EXPECT_EQ(c[55], 1.0f);
  EXPECT_EQ(c[27 + 27 * 56], 0.0f);
  EXPECT_EQ(c[28 + 0 * 56], 1.0f);
  EXPECT_FLOAT_EQ(c[30 * 56 + 3], 128.0f / 255);
  EXPECT_FLOAT_EQ(c[55 * 56 + 55], 51.0f / 255);
}

TEST(AttentionExport, WritesCsvAndBinaryPgms) {
  const auto store = test::synthetic_store(Split::kTrain);
  DatasetConfig cfg;
  cfg.complexity = 3;
  cfg.n_pairs = 3;
  Rng rng(2);
  const auto trial = generate_matching_trials(cfg, store, rng).front();
  const auto params = init_params<float>(Arch::kObjectCnn, 4);
  const auto dir = temp_dir("attention_export");
  const auto files = export_attention(params, trial, dir / "cell");
  ASSERT_EQ(files.size(), 2u + 3u);

  const auto rows = lines_of(dir / "cell" / "attention.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "word,a0,a1,a2,a3");
  const auto out = forward(*trial.scene, trial.caption, params, Mode::kEval, nullptr);
  for (std::size_t j = 0; j < 3; ++j) {
    std::istringstream row(rows[j + 1]);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(std::stoi(cells[0]), trial.caption[j]);
    const auto heat = dir / "cell" / ("heatmap_w" + std::to_string(j) + "_" + cells[0] + ".pgm");
    const auto bytes = read_text(heat);
    const std::string header = "P5\n56 56\n255\n";
    ASSERT_EQ(bytes.substr(0, header.size()), header);
    ASSERT_EQ(bytes.size(), header.size() + kScenePixels);
    for (int q = 0; q < 4; ++q) {
      EXPECT_NEAR(std::stod(cells[q + 1]), out.attention.at(j, q), 1e-6);
      const std::size_t r = 28 * (q / 2) + 5, c = 28 * (q % 2) + 9;
      EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + r * 56 + c]), attention_gray(out.attention.at(j, q)));
    }
  }
  std::size_t w = 0, h = 0;
  const auto scene = read_pgm(dir / "cell" / "scene.pgm", &w, &h);
  EXPECT_EQ(w, 56u);
  for (std::size_t i = 0; i < kScenePixels; ++i) ASSERT_NEAR(scene[i], trial.scene->pixels[i], 0.501 / 255);

  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(export_attention(params, trial, dir / "file" / "sub"), IoError);
}

// ---- SVG -----------------------------------------------------------------------

std::vector<AggregateRow> fake_aggregate() {
  std::vector<AggregateRow> rows;
  for (int k : {2, 3, 4})
    for (int n : {36, 72, 720}) {
      AggregateRow r;
      r.key = {k, ExemplarMode::kFixed, n, Arch::kObjectCnn};
      r.eval = {0.9 - 0.1 * k + n / 7200.0, 0.03, 5};
      rows.push_back(r);
    }
  return rows;
}

TEST(Svg, OneSeriesPerComplexityAndDashedChanceLine) {
  const auto svg = accuracy_plot_svg(fake_aggregate(), ExemplarMode::kFixed);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count_matches(svg, "class=\"series\""), 3u);
  for (int k : {2, 3, 4}) EXPECT_NE(svg.find("data-k=\"" + std::to_string(k) + "\""), std::string::npos);
  EXPECT_EQ(count_matches(svg, "class=\"chance\"[^>]*stroke-dasharray"), 1u);
  // The chance line sits where a 0.25 accuracy point would: midway between
  // the 0 and 0.5 gridlines is not assumed; compare with a series at 0.25.
  std::vector<AggregateRow> at_chance = {fake_aggregate()[0]};
  at_chance[0].eval.mean = 0.25;
  const auto svg2 = accuracy_plot_svg(at_chance, ExemplarMode::kFixed);
  std::smatch chance, point;
  ASSERT_TRUE(std::regex_search(svg2, chance, std::regex("class=\"chance\" x1=\"[^\"]*\" y1=\"([^\"]*)\"")));
  ASSERT_TRUE(std::regex_search(svg2, point, std::regex("<circle[^>]*cy=\"([^\"]*)\"")));
  EXPECT_EQ(chance[1], point[1]);
}

TEST(Svg, ArchComparisonNeedsBothNetworks) {
  auto rows = fake_aggregate();
  EXPECT_TRUE(arch_comparison_svg(rows, ExemplarMode::kFixed).empty());
  for (int k : {2, 3, 4}) {
    AggregateRow r;
    r.key = {k, ExemplarMode::kFixed, 720, Arch::kSceneCnn};
    r.eval = {0.5, 0.05, 5};
    rows.push_back(r);
  }
  const auto svg = arch_comparison_svg(rows, ExemplarMode::kFixed);
  EXPECT_EQ(count_matches(svg, "data-arch=\"object_cnn\""), 3u);
  EXPECT_EQ(count_matches(svg, "data-arch=\"scene_cnn\""), 3u);
  const auto dir = temp_dir("svg_emit");
  const auto files = emit_report(rows, dir);
  ASSERT_EQ(files.size(), 2u);
  for (const auto& f : files) EXPECT_GT(std::filesystem::file_size(f), 0u);
  EXPECT_THROW(emit_report({}, dir), UsageError);
}

// ---- sweeps -------------------------------------------------------------------

const char* kSmallCells = "seeds=2\nepochs=1\neval_per_word=1\n[cell]\nk=2,4\nexemplar_mode=fixed,varying\nn_pairs=12\n";

TEST(Sweep, RerunsReproduceRowsAndResumeSkipsDoneRuns) {
  const auto data = fake_mnist("sweep_data");
  const auto out = temp_dir("sweep_a");
  const auto out2 = temp_dir("sweep_b");
  const auto plan = parse_plan(plan_text(data, out, kSmallCells));
  ASSERT_EQ(plan.runs().size(), 8u);
  const auto a = run_experiment(plan);
  EXPECT_TRUE(a.ok());
  EXPECT_EQ(a.completed, 8u);
  auto plan2 = plan;
  plan2.output_dir = out2;
  plan2.workers = 3;
  const auto b = run_experiment(plan2);
  EXPECT_EQ(b.completed, 8u);

  auto sorted_parts = [](const std::filesystem::path& csv) {
    auto lines = lines_of(csv);
    std::vector<std::string> parts;
    for (std::size_t i = 1; i < lines.size(); ++i) parts.push_back(deterministic_part(lines[i]));
    std::sort(parts.begin(), parts.end());
    return parts;
  };
  EXPECT_EQ(sorted_parts(a.run_csv), sorted_parts(b.run_csv));
  EXPECT_EQ(lines_of(a.run_csv).size(), 9u);

  // Every promised file exists and is non-empty.
  for (const auto& f : {a.run_csv, a.aggregate_csv, a.plan_snapshot}) EXPECT_GT(std::filesystem::file_size(f), 0u);
  EXPECT_EQ(a.plots.size(), 2u);
  for (const auto& f : a.plots) EXPECT_GT(std::filesystem::file_size(f), 0u);
  EXPECT_EQ(a.heatmaps.size(), 4u * 2u + 2u * 2u + 2u * 4u);
  for (const auto& f : a.heatmaps) EXPECT_GT(std::filesystem::file_size(f), 0u);
  EXPECT_EQ(read_aggregate_csv(a.aggregate_csv).size(), 4u);
  EXPECT_EQ(read_text(a.plan_snapshot), plan.snapshot());

  const auto again = run_experiment(plan);
  EXPECT_EQ(again.completed, 0u);
  EXPECT_EQ(again.skipped, 8u);
  EXPECT_EQ(lines_of(a.run_csv).size(), 9u);
}

TEST(Sweep, InterruptedSweepKeepsCompleteRows) {
  const auto data = fake_mnist("interrupt_data");
  const auto out = temp_dir("interrupt");
  const auto plan = parse_plan(plan_text(data, out, kSmallCells));
  const pid_t pid = fork();
  ASSERT_GE(pid, 0);
  if (pid == 0) {
    omp_set_num_threads(1);
    int done = 0;
    run_experiment(plan, [&](const std::string& m) {
      if (m.rfind("done ", 0) == 0 && ++done == 3) _exit(0);
    });
    _exit(1);
  }
  int status = 0;
  waitpid(pid, &status, 0);
  ASSERT_TRUE(WIFEXITED(status));
  ASSERT_EQ(WEXITSTATUS(status), 0);

  const auto text = read_text(out / "results.csv");
  ASSERT_FALSE(text.empty());
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(read_results_csv(out / "results.csv").size(), 3u);

  const auto resumed = run_experiment(plan);
  EXPECT_EQ(resumed.skipped, 3u);
  EXPECT_EQ(resumed.completed, 5u);
  EXPECT_EQ(read_results_csv(out / "results.csv").size(), 8u);
}

TEST(Sweep, MissingDatasetFailsBeforeTraining) {
  const auto data = temp_dir("empty_data");
  const auto out = temp_dir("no_data_out");
  const auto plan = parse_plan(plan_text(data, out / "results", kSmallCells));
  EXPECT_THROW(run_experiment(plan), IoError);
  EXPECT_FALSE(std::filesystem::exists(out / "results" / "results.csv"));
}

TEST(Sweep, MeReportHasPreferenceAndHistogram) {
  const auto data = fake_mnist("me_data");
  MePlan plan;
  plan.mode = MeMode::kMatchPlusMismatch;
  plan.runs_per_class = 1;
  plan.epochs = 1;
  plan.dataset_dir = data;
  plan.output_dir = temp_dir("me_out");
  const auto report = run_me_experiment(plan);
  EXPECT_TRUE(report.failures.empty());
  EXPECT_EQ(report.summary.runs, 10u);
  std::size_t total = 0;
  for (auto c : report.summary.counts) total += c;
  EXPECT_EQ(total, 10u);
  const auto lines = lines_of(report.summary_csv);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "me_mode,runs,novel,foil,blank,non_match,preference,blank_fraction,excluded_fraction");
  EXPECT_EQ(lines[1].rfind("match_plus_mismatch,10,", 0), 0u);

  const auto rows = read_results_csv(report.run_csv);
  ASSERT_EQ(rows.size(), 10u);
  std::set<int> classes;
  for (const auto& r : rows) {
    EXPECT_FALSE(r.eval_acc.has_value());
    classes.insert(me_excluded_class(r.seed));
  }
  EXPECT_EQ(classes.size(), 10u);
  const auto runs = me_runs_from_rows(rows, MeMode::kMatchPlusMismatch);
  EXPECT_EQ(summarize_me(runs).counts, report.summary.counts);
  EXPECT_TRUE(me_runs_from_rows(rows, MeMode::kMatchOnly).empty());

  const auto again = run_me_experiment(plan);
  EXPECT_EQ(read_results_csv(report.run_csv).size(), 10u);
  EXPECT_EQ(again.summary.counts, report.summary.counts);
}

}  // namespace
}  // namespace xsl
