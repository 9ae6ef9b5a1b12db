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


#pragma once

#include <filesystem>
#include <vector>

#include "xsl/model/network.hpp"

namespace xsl {

/// Gray level of a quadrant whose attention is a: round(255 a), clamped.
unsigned char attention_gray(double a);

/// 56x56 canvas with quadrant i of row `word` filled at attention_gray.
std::vector<float> attention_canvas(const AttentionMap& attention, std::size_t word);

/// Writes into dir: attention.csv (word then a0..a3, one row per caption
/// word), scene.pgm, and heatmap_w<j>_<word>.pgm per caption word. Returns
/// the paths written. Throws IoError when dir cannot be written.
std::vector<std::filesystem::path> export_attention(const ModelParams<float>& params, const Trial& trial,
                                                    const std::filesystem::path& dir);

}  // namespace xsl
