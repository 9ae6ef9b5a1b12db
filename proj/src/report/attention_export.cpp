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


#include "xsl/report/attention_export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "xsl/errors.hpp"

namespace xsl {

unsigned char attention_gray(double a) {
  return static_cast<unsigned char>(std::lround(std::clamp(a, 0.0, 1.0) * 255.0));
}

std::vector<float> attention_canvas(const AttentionMap& attention, std::size_t word) {
  std::vector<float> canvas(kScenePixels);
  for (int q = 0; q < kQuadrants; ++q) {
    // Stored as gray/255 so write_pgm reproduces the gray level exactly.
    const float level = static_cast<float>(attention_gray(attention.at(word, q))) / 255.0f;
    const std::size_t r0 = kDigitSide * (q / 2), c0 = kDigitSide * (q % 2);
    for (std::size_t r = 0; r < kDigitSide; ++r)
      std::fill_n(canvas.begin() + (r0 + r) * kSceneSide + c0, kDigitSide, level);
  }
  return canvas;
}

std::vector<std::filesystem::path> export_attention(const ModelParams<float>& params, const Trial& trial,
                                                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto out = forward(*trial.scene, trial.caption, params, Mode::kEval, nullptr);

  std::vector<std::filesystem::path> written;
  const auto csv_path = dir / "attention.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv << "word,a0,a1,a2,a3\n";
  char buf[32];
  for (std::size_t j = 0; j < out.attention.rows(); ++j) {
    csv << out.attention.words[j];
    for (int q = 0; q < kQuadrants; ++q) {
      std::snprintf(buf, sizeof buf, ",%.6f", out.attention.at(j, q));
      csv << buf;
    }
    csv << '\n';
  }
  csv.close();
  if (!csv) throw IoError("failed writing " + csv_path.string());
  written.push_back(csv_path);

  const auto scene_path = dir / "scene.pgm";
  write_pgm(scene_path, trial.scene->pixels, kSceneSide, kSceneSide);
  written.push_back(scene_path);
  for (std::size_t j = 0; j < out.attention.rows(); ++j) {
    const auto path =
        dir / ("heatmap_w" + std::to_string(j) + "_" + std::to_string(out.attention.words[j]) + ".pgm");
    write_pgm(path, attention_canvas(out.attention, j), kSceneSide, kSceneSide);
    written.push_back(path);
  }
  return written;
}

}  // namespace xsl
