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
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "xsl/errors.hpp"
#include "xsl/scene/scene.hpp"

namespace xsl {

namespace {

// k distinct values drawn uniformly from `pool`, in draw order.
std::vector<int> sample_distinct(std::vector<int> pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
  pool.resize(k);
  return pool;
}

std::vector<int> range(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

ExemplarRef pick_exemplar(int label, ExemplarMode mode, const DigitStore& store,
                          const std::array<ExemplarRef, kNumClasses>* fixed, Rng& rng) {
  if (mode == ExemplarMode::kFixed) return (*fixed)[label];
  const auto idx = store.class_indices(label);
  return ExemplarRef{store.split(), idx[rng.uniform_index(idx.size())], label};
}

std::shared_ptr<const Scene> make_scene(std::uint64_t id, SceneSpec spec, const DigitStore& store) {
  auto s = std::make_shared<Scene>();
  s->id = id;
  s->pixels = compose_scene(spec, store);
  s->spec = std::move(spec);
  return s;
}

std::vector<int> sorted_classes(const SceneSpec& spec) {
  std::vector<int> c;
  for (const auto& e : spec.entries) c.push_back(e.exemplar.label);
  std::sort(c.begin(), c.end());
  return c;
}

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::vector<Trial> generate_matching_trials(const DatasetConfig& config, const DigitStore& train, Rng& rng,
                                            GenerationStats* stats) {
  config.validate();
  std::vector<int> classes;
  for (int c = 0; c < kNumClasses; ++c)
    if (c != config.excluded_class) classes.push_back(c);
  std::array<ExemplarRef, kNumClasses> fixed{};
  if (config.exemplar_mode == ExemplarMode::kFixed)
    for (int c : classes) fixed[c] = first_instance(train, c);

  const int n_scenes = config.n_pairs / config.complexity;
  const auto k = static_cast<std::size_t>(config.complexity);
  std::vector<Trial> trials;
  trials.reserve(n_scenes);
  std::set<std::vector<std::tuple<int, int, std::uint32_t>>> seen;
  std::size_t duplicates = 0;
  for (int s = 0; s < n_scenes; ++s) {
    const auto picked = sample_distinct(classes, k, rng);
    const auto quadrants = sample_distinct(range(kQuadrants), k, rng);
    SceneSpec spec;
    for (std::size_t i = 0; i < k; ++i)
      spec.entries.push_back({quadrants[i], pick_exemplar(picked[i], config.exemplar_mode, train, &fixed, rng)});
    std::vector<int> caption = picked;
    rng.shuffle(caption.begin(), caption.end());

    std::vector<std::tuple<int, int, std::uint32_t>> key;
    for (const auto& e : spec.entries) key.emplace_back(e.quadrant, e.exemplar.label, e.exemplar.index);
    std::sort(key.begin(), key.end());
    if (!seen.insert(std::move(key)).second) ++duplicates;

    trials.push_back(Trial{make_scene(static_cast<std::uint64_t>(s), std::move(spec), train),
                           std::move(caption), TrialLabel::kMatch, -1});
  }
  if (stats) stats->duplicate_scenes = duplicates;
  return trials;
}

std::vector<Trial> generate_mismatching_trials(std::span<const Trial> matching, Rng& rng, bool strict,
                                               std::size_t max_retries) {
  const std::size_t n = matching.size();
  if (n < 2) throw GenerationError("mismatch generation needs at least 2 matching trials, got " + std::to_string(n));

  std::vector<std::vector<int>> scene_classes(n), caption_classes(n);
  for (std::size_t i = 0; i < n; ++i) {
    scene_classes[i] = sorted_classes(matching[i].scene->spec);
    caption_classes[i] = sorted(matching[i].caption);
  }
  auto bad = [&](std::size_t recipient, std::size_t donor) {
    return donor == recipient || (strict && caption_classes[donor] == scene_classes[recipient]);
  };

  std::vector<std::size_t> perm(n);
  bool found = false;
  for (std::size_t attempt = 0; attempt < max_retries && !found; ++attempt) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm.begin(), perm.end());
    if (!strict) {
      // Rejection sampling keeps the derangement uniform.
      found = std::none_of(perm.begin(), perm.end(), [&, i = std::size_t{0}](std::size_t d) mutable {
        return bad(i++, d);
      });
      continue;
    }
    // Strict: repair conflicts by swapping donors with random partners.
    found = true;
    for (std::size_t i = 0; i < n && found; ++i) {
      if (!bad(i, perm[i])) continue;
      bool fixed = false;
      for (std::size_t tries = 0; tries < 4 * n && !fixed; ++tries) {
        const std::size_t j = rng.uniform_index(n);
        if (!bad(i, perm[j]) && !bad(j, perm[i])) {
          std::swap(perm[i], perm[j]);
          fixed = true;
        }
      }
      found = fixed;
    }
  }
  if (!found) {
    std::string detail;
    if (strict)
      for (std::size_t i = 0; i < n && detail.empty(); ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j && caption_classes[j] == scene_classes[i]) {
            detail = ": scenes " + std::to_string(i) + " and " + std::to_string(j) + " share a class set";
            break;
          }
    throw GenerationError("no valid caption reassignment after " + std::to_string(max_retries) +
                          " attempts" + detail);
  }

  std::vector<Trial> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(Trial{matching[i].scene, matching[perm[i]].caption, TrialLabel::kMismatch,
                        static_cast<std::int64_t>(perm[i])});
  return out;
}

std::vector<EvalTrial> generate_eval_trials(const DigitStore& train, const DigitStore& test, ExemplarMode mode,
                                            Rng& rng, int per_word) {
  if (per_word < 1) throw ConfigError("per_word must be at least 1, got " + std::to_string(per_word));
  if (test.split() != Split::kTest) throw UsageError("evaluation exemplars need the test split");
  std::array<ExemplarRef, kNumClasses> fixed{};
  if (mode == ExemplarMode::kFixed) fixed = first_instances(train);
  const DigitStore& source = mode == ExemplarMode::kFixed ? train : test;

  std::vector<EvalTrial> out;
  out.reserve(static_cast<std::size_t>(per_word) * kNumClasses);
  std::uint64_t id = 0;
  for (int target = 0; target < kNumClasses; ++target) {
    std::vector<int> others;
    for (int c = 0; c < kNumClasses; ++c)
      if (c != target) others.push_back(c);
    for (int r = 0; r < per_word; ++r) {
      const auto foils = sample_distinct(others, 3, rng);
      const auto quadrants = sample_distinct(range(kQuadrants), kQuadrants, rng);
      const std::array<int, 4> labels{target, foils[0], foils[1], foils[2]};
      SceneSpec spec;
      for (int i = 0; i < kQuadrants; ++i)
        spec.entries.push_back({quadrants[i], pick_exemplar(labels[i], mode, source, &fixed, rng)});
      EvalTrial e;
      e.trial = Trial{make_scene(id++, std::move(spec), source), {target}, TrialLabel::kMatch, -1};
      e.target_word = target;
      e.target_quadrant = quadrants[0];
      e.foils = {foils[0], foils[1], foils[2]};
      out.push_back(std::move(e));
    }
  }
  return out;
}

MeDataset generate_me_dataset(int excluded_class, MeMode mode, const DigitStore& train, Rng& rng) {
  if (excluded_class < 0 || excluded_class >= kNumClasses)
    throw ConfigError("excluded class " + std::to_string(excluded_class) + " outside [0, 9]");
  DatasetConfig cfg;
  cfg.complexity = 2;
  cfg.exemplar_mode = ExemplarMode::kFixed;
  cfg.n_pairs = 72;
  cfg.excluded_class = excluded_class;

  MeDataset me;
  me.novel_class = excluded_class;
  auto matching = generate_matching_trials(cfg, train, rng);
  auto mismatching = generate_mismatching_trials(matching, rng, false);

  std::vector<int> familiar;
  for (int c = 0; c < kNumClasses; ++c)
    if (c != excluded_class) familiar.push_back(c);
  me.foil_class = familiar[rng.uniform_index(familiar.size())];
  const auto quadrants = sample_distinct(range(kQuadrants), 2, rng);
  me.novel_quadrant = quadrants[0];
  me.foil_quadrant = quadrants[1];
  SceneSpec spec;
  spec.entries.push_back({me.novel_quadrant, first_instance(train, me.novel_class)});
  spec.entries.push_back({me.foil_quadrant, first_instance(train, me.foil_class)});
  me.probe = Trial{make_scene(matching.size(), std::move(spec), train), {excluded_class}, TrialLabel::kMatch, -1};
  me.additions.push_back(me.probe);

  if (mode == MeMode::kMatchPlusMismatch) {
    std::vector<int> scene_ids(matching.size());
    std::iota(scene_ids.begin(), scene_ids.end(), 0);
    for (int s : sample_distinct(scene_ids, 5, rng))
      me.additions.push_back(Trial{matching[s].scene, {excluded_class}, TrialLabel::kMismatch, -1});
  }

  me.base = std::move(matching);
  me.base.insert(me.base.end(), std::make_move_iterator(mismatching.begin()),
                 std::make_move_iterator(mismatching.end()));
  return me;
}

}  // namespace xsl
