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


#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include "xsl/errors.hpp"
#include "xsl/scene/scene.hpp"

namespace xsl {

void write_pgm(const std::filesystem::path& path, std::span<const float> pixels, std::size_t width,
               std::size_t height) {
  if (pixels.size() != width * height)
    throw DimensionError("pgm: " + std::to_string(pixels.size()) + " values for a " + std::to_string(width) +
                         "x" + std::to_string(height) + " image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("pgm: cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  for (float v : pixels) {
    const float c = std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f);
    out.put(static_cast<char>(static_cast<unsigned char>(c)));
  }
  if (!out) throw IoError("pgm: write failed for " + path.string());
}

std::vector<float> read_pgm(const std::filesystem::path& path, std::size_t* width, std::size_t* height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("pgm: cannot open " + path.string());
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 255 || w == 0 || h == 0)
    throw FormatError("pgm: " + path.string() + " is not a binary 8-bit PGM");
  in.get();  // single whitespace byte after the header
  std::vector<float> out(w * h);
  for (auto& v : out) {
    const int c = in.get();
    if (c == EOF) throw LengthError("pgm: truncated pixel data in " + path.string());
    v = static_cast<float>(c) / 255.0f;
  }
  if (width) *width = w;
  if (height) *height = h;
  return out;
}

void dump_trials(std::span<const Trial> trials, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv", std::ios::trunc);
  if (!manifest) throw IoError("trial dump: cannot write " + (dir / "manifest.csv").string());
  manifest << "trial_id,label,caption,quadrant_classes,exemplar_indices\n";
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const Trial& trial = trials[t];
    char name[32];
    std::snprintf(name, sizeof(name), "trial_%05zu.pgm", t);
    write_pgm(dir / name, trial.scene->pixels, kSceneSide, kSceneSide);

    auto join = [](const auto& values) {
      std::string s;
      for (std::size_t i = 0; i < std::size(values); ++i) {
        if (i) s += ';';
        s += std::to_string(values[i]);
      }
      return s;
    };
    const auto sources = trial.scene->spec.quadrant_sources();
    std::array<long long, kQuadrants> exemplars;
    for (int q = 0; q < kQuadrants; ++q) exemplars[q] = sources[q] ? static_cast<long long>(sources[q]->index) : -1;
    manifest << t << ',' << (trial.label == TrialLabel::kMatch ? "match" : "mismatch") << ','
             << join(trial.caption) << ',' << join(trial.scene->spec.quadrant_classes()) << ','
             << join(exemplars) << '\n';
  }
  if (!manifest) throw IoError("trial dump: write failed in " + dir.string());
}

}  // namespace xsl
