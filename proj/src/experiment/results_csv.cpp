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


#include "xsl/experiment/results_csv.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "xsl/errors.hpp"

namespace xsl {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw FormatError(std::string("column ") + column + ": not a number: '" + s + "'");
}

long long to_int(const std::string& s, const char* column) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw FormatError(std::string("column ") + column + ": not an integer: '" + s + "'");
}

std::vector<std::string> data_lines(const std::filesystem::path& path, const char* header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw FormatError(path.string() + ": unexpected header, want '" + header + "'");
  std::vector<std::string> out;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace

std::string format_row(const RunRow& row) {
  std::string s = std::to_string(row.condition_k) + "," + exemplar_mode_name(row.exemplar_mode) + "," +
                  std::to_string(row.n_pairs) + "," + arch_name(row.arch) + "," + std::to_string(row.seed) + "," +
                  fixed(row.final_train_acc, 6) + ",";
  if (row.eval_acc) s += fixed(*row.eval_acc, 6);
  s += "," + row.me_mode + "," + row.me_class + "," + fixed(row.duration_seconds, 3);
  return s;
}

RunRow parse_row(const std::string& line) {
  const auto f = split_fields(line);
  if (f.size() != 10) throw FormatError("results row needs 10 columns, got " + std::to_string(f.size()) + ": " + line);
  RunRow row;
  row.condition_k = static_cast<int>(to_int(f[0], "condition_k"));
  row.exemplar_mode = parse_exemplar_mode(f[1]);
  row.n_pairs = static_cast<int>(to_int(f[2], "n_pairs"));
  row.arch = parse_arch(f[3]);
  row.seed = static_cast<std::uint64_t>(to_int(f[4], "seed"));
  row.final_train_acc = to_double(f[5], "final_train_acc");
  if (!f[6].empty()) row.eval_acc = to_double(f[6], "eval_acc");
  row.me_mode = f[7];
  row.me_class = f[8];
  row.duration_seconds = to_double(f[9], "duration_seconds");
  return row;
}

std::string deterministic_part(const std::string& line) {
  const auto cut = line.rfind(',');
  return cut == std::string::npos ? line : line.substr(0, cut);
}

std::vector<RunRow> read_results_csv(const std::filesystem::path& path) {
  std::vector<RunRow> rows;
  for (const auto& line : data_lines(path, kResultsHeader)) rows.push_back(parse_row(line));
  return rows;
}

ResultsWriter::ResultsWriter(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!std::filesystem::exists(path) || std::filesystem::file_size(path) == 0) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << kResultsHeader << '\n';
  }
}

void ResultsWriter::append(const RunRow& row) {
  const std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot append to " + path_.string());
  out << format_row(row) << '\n';
  out.flush();
}

std::vector<AggregateRow> aggregate_results(std::span<const RunRow> rows) {
  std::map<ConditionKey, std::vector<double>> groups;
  for (const auto& r : rows)
    if (r.eval_acc) groups[{r.condition_k, r.exemplar_mode, r.n_pairs, r.arch}].push_back(*r.eval_acc);
  std::vector<AggregateRow> out;
  for (const auto& [key, values] : groups) out.push_back({key, summarize(values)});
  return out;
}

void write_aggregate_csv(const std::filesystem::path& path, std::span<const AggregateRow> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << kAggregateHeader << '\n';
  for (const auto& r : rows)
    out << r.key.condition_k << ',' << exemplar_mode_name(r.key.exemplar_mode) << ',' << r.key.n_pairs << ','
        << arch_name(r.key.arch) << ',' << fixed(r.eval.mean, 6) << ',' << fixed(r.eval.ci95_halfwidth, 6) << ','
        << r.eval.n << '\n';
}

std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path) {
  std::vector<AggregateRow> rows;
  for (const auto& line : data_lines(path, kAggregateHeader)) {
    const auto f = split_fields(line);
    if (f.size() != 7) throw FormatError("aggregate row needs 7 columns: " + line);
    AggregateRow r;
    r.key = {static_cast<int>(to_int(f[0], "condition_k")), parse_exemplar_mode(f[1]),
             static_cast<int>(to_int(f[2], "n_pairs")), parse_arch(f[3])};
    r.eval.mean = to_double(f[4], "mean");
    r.eval.ci95_halfwidth = to_double(f[5], "ci95_halfwidth");
    r.eval.n = static_cast<std::size_t>(to_int(f[6], "n"));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace xsl
