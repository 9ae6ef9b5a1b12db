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


#include "xsl/report/plan.hpp"

#include <fstream>
#include <sstream>

#include "xsl/errors.hpp"

namespace xsl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

class LineError {
 public:
  LineError(std::size_t line, std::string key) : line_(line), key_(std::move(key)) {}
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("plan line " + std::to_string(line_) + ", key '" + key_ + "': " + what);
  }

 private:
  std::size_t line_;
  std::string key_;
};

long long parse_integer(const std::string& v, const LineError& err) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  err.fail("expected an integer, got '" + v + "'");
}

bool parse_bool(const std::string& v, const LineError& err) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  err.fail("expected true or false, got '" + v + "'");
}

template <typename F>
auto parse_or_fail(F f, const LineError& err) {
  try {
    return f();
  } catch (const Error& e) {
    err.fail(e.what());
  }
}

struct CellLists {
  std::size_t line = 0;
  std::size_t k_line = 0;
  std::size_t n_line = 0;
  std::vector<int> k;
  std::vector<ExemplarMode> modes;
  std::vector<int> n_pairs;
  std::vector<Arch> arches;
};

}  // namespace

std::vector<RunSpec> ExperimentPlan::runs() const {
  std::vector<RunSpec> out;
  for (const auto& c : cells)
    for (int s = 0; s < seeds; ++s) {
      RunSpec r;
      r.complexity = c.complexity;
      r.exemplar_mode = c.exemplar_mode;
      r.n_pairs = c.n_pairs;
      r.arch = c.arch;
      r.seed = seed + static_cast<std::uint64_t>(s);
      r.epochs = epochs;
      r.strict_mismatch = strict_mismatch;
      r.eval_per_word = eval_per_word;
      out.push_back(r);
    }
  return out;
}

std::string ExperimentPlan::snapshot() const {
  std::ostringstream out;
  out << "dataset_dir=" << dataset_dir.string() << '\n'
      << "output_dir=" << output_dir.string() << '\n'
      << "seeds=" << seeds << '\n'
      << "seed=" << seed << '\n'
      << "epochs=" << epochs << '\n'
      << "strict_mismatch=" << (strict_mismatch ? "true" : "false") << '\n'
      << "eval_per_word=" << eval_per_word << '\n'
      << "workers=" << workers << '\n'
      << "save_checkpoints=" << (save_checkpoints ? "true" : "false") << '\n';
  for (const auto& c : cells)
    out << "\n[cell]\nk=" << c.complexity << "\nexemplar_mode=" << exemplar_mode_name(c.exemplar_mode)
        << "\nn_pairs=" << c.n_pairs << "\narch=" << arch_name(c.arch) << '\n';
  return out.str();
}

void ExperimentPlan::validate() const {
  if (seeds < 1) throw ConfigError("seeds must be >= 1, got " + std::to_string(seeds));
  if (epochs < 0) throw ConfigError("epochs must be >= 0, got " + std::to_string(epochs));
  if (eval_per_word < 1) throw ConfigError("eval_per_word must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (cells.empty()) throw ConfigError("plan has no [cell] blocks");
  for (const auto& c : cells) {
    DatasetConfig d;
    d.complexity = c.complexity;
    d.exemplar_mode = c.exemplar_mode;
    d.n_pairs = c.n_pairs;
    d.validate();
  }
}

ExperimentPlan parse_plan(const std::string& text) {
  ExperimentPlan plan;
  bool have_dataset = false;
  std::vector<CellLists> blocks;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line == "[cell]") {
      blocks.push_back({});
      blocks.back().line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("plan line " + std::to_string(line_no) + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const LineError err(line_no, key);
    if (value.empty()) err.fail("empty value");

    if (!blocks.empty()) {
      auto& b = blocks.back();
      if (key == "k") b.k_line = line_no;
      if (key == "n_pairs") b.n_line = line_no;
      const auto items = split_list(value);
      for (const auto& item : items) {
        if (key == "k") {
          b.k.push_back(static_cast<int>(parse_integer(item, err)));
        } else if (key == "exemplar_mode") {
          b.modes.push_back(parse_or_fail([&] { return parse_exemplar_mode(item); }, err));
        } else if (key == "n_pairs") {
          b.n_pairs.push_back(static_cast<int>(parse_integer(item, err)));
        } else if (key == "arch") {
          b.arches.push_back(parse_or_fail([&] { return parse_arch(item); }, err));
        } else {
          err.fail("unknown cell key");
        }
      }
      continue;
    }

    if (key == "dataset_dir") {
      plan.dataset_dir = value;
      if (!std::filesystem::is_directory(plan.dataset_dir)) err.fail("no such directory: " + value);
      have_dataset = true;
    } else if (key == "output_dir") {
      plan.output_dir = value;
    } else if (key == "seeds") {
      plan.seeds = static_cast<int>(parse_integer(value, err));
      if (plan.seeds < 1) err.fail("must be >= 1");
    } else if (key == "seed") {
      const auto s = parse_integer(value, err);
      if (s < 0) err.fail("must be >= 0");
      plan.seed = static_cast<std::uint64_t>(s);
    } else if (key == "epochs") {
      plan.epochs = static_cast<int>(parse_integer(value, err));
      if (plan.epochs < 0) err.fail("must be >= 0");
    } else if (key == "strict_mismatch") {
      plan.strict_mismatch = parse_bool(value, err);
    } else if (key == "eval_per_word") {
      plan.eval_per_word = static_cast<int>(parse_integer(value, err));
      if (plan.eval_per_word < 1) err.fail("must be >= 1");
    } else if (key == "workers") {
      plan.workers = static_cast<int>(parse_integer(value, err));
      if (plan.workers < 1) err.fail("must be >= 1");
    } else if (key == "save_checkpoints") {
      plan.save_checkpoints = parse_bool(value, err);
    } else {
      err.fail("unknown key");
    }
  }
  if (!have_dataset) plan.dataset_dir = dataset_dir();

  for (auto& b : blocks) {
    const auto fail = [&](const std::string& key, const std::string& what) {
      const std::size_t line = key == "k" && b.k_line ? b.k_line : key == "n_pairs" && b.n_line ? b.n_line : b.line;
      throw ConfigError("plan line " + std::to_string(line) + ", key '" + key + "': " + what);
    };
    if (b.k.empty()) fail("k", "missing in [cell]");
    if (b.n_pairs.empty()) fail("n_pairs", "missing in [cell]");
    if (b.modes.empty()) b.modes.push_back(ExemplarMode::kFixed);
    if (b.arches.empty()) b.arches.push_back(Arch::kObjectCnn);
    for (Arch a : b.arches)
      for (ExemplarMode m : b.modes)
        for (int k : b.k)
          for (int n : b.n_pairs) {
            DatasetConfig d;
            d.complexity = k;
            d.exemplar_mode = m;
            d.n_pairs = n;
            try {
              d.validate();
            } catch (const ConfigError& e) {
              fail(k < 2 || k > 4 ? "k" : "n_pairs", e.what());
            }
            plan.cells.push_back({k, m, n, a});
          }
  }
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read plan " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_plan(text.str());
}

}  // namespace xsl
