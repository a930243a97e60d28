/*
 * Copyright 2026 The vaeprobe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vaeprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "vaeprobe/csv.hpp"
#include "vaeprobe/errors.hpp"
#include "vaeprobe/harness.hpp"

namespace vaeprobe {

namespace fs = std::filesystem;

namespace {

double sort_key(const std::string& cell) {
  const auto v = parse_number(cell);
  return v ? *v : INFINITY;
}

void sort_by(std::vector<std::vector<std::string>>& rows, std::size_t column) {
  std::stable_sort(rows.begin(), rows.end(), [column](const auto& a, const auto& b) {
    const double ka = sort_key(a[column]), kb = sort_key(b[column]);
    if (ka != kb) return ka < kb;
    return a < b;
  });
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string render(const CsvTable& t) {
  std::vector<std::size_t> widths(t.header.size());
  for (std::size_t i = 0; i < t.header.size(); ++i) widths[i] = t.header[i].size();
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], r[i].size());
  }
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "  " : "") + pad(cells[i].empty() ? "-" : cells[i], widths[i]);
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

}  // namespace

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {"source", "run_id", "beta", "R_nats", "D_nats",
                                                "C_nats", "C_bits", "accuracy", "compression_factor"};
  return cols;
}

ReportSummary emit_report(const std::vector<fs::path>& inputs, const ExperimentConfig& config,
                          const fs::path& out) {
  if (inputs.empty()) throw ConfigError("report needs at least one input directory");
  std::set<fs::path> manifests, frontiers, baselines;
  const fs::path own = fs::weakly_canonical(out);
  for (const auto& input : inputs) {
    if (!fs::is_directory(input)) throw DataError("report input is not a directory: " + input.string());
    auto visit = [&](const fs::path& p) {
      // Skip a previous report written inside an input tree.
      if (fs::weakly_canonical(p.parent_path()) == own) return;
      const auto name = p.filename();
      if (name == "manifest.json") manifests.insert(p);
      if (name == "pca_frontier.csv") frontiers.insert(p);
      if (name == "baseline.csv") baselines.insert(p);
    };
    for (const auto& e : fs::recursive_directory_iterator(input)) {
      if (e.is_regular_file()) visit(e.path());
    }
  }

  std::map<std::string, std::vector<std::string>> runs;
  for (const auto& m : manifests) {
    const fs::path dir = m.parent_path();
    if (!fs::exists(dir / "metrics.csv")) throw DataError("missing metrics file " + (dir / "metrics.csv").string());
    const RunRecord r = read_run(dir);
    if (r.status != "completed" || r.final_row.empty()) continue;
    const auto& f = r.final_row;  // metrics_columns() order
    const auto c = parse_number(f[6]);
    runs[r.run_id] = {"vae", r.run_id, f[1], f[3], f[4], f[6],
                      c ? format_number(*c / std::log(2.0)) : std::string(), f[7], f[8]};
  }
  if (runs.empty()) throw DataError("no completed runs found under the report inputs");

  CsvTable c_vs_r{report_columns(), {}};
  for (const auto& [id, row] : runs) c_vs_r.rows.push_back(row);
  CsvTable c_vs_d = c_vs_r;
  sort_by(c_vs_r.rows, 3);
  sort_by(c_vs_d.rows, 4);

  CsvTable frontier{{"source", "k", "sigma", "R_nats", "C_nats", "C_bits", "accuracy", "compression_factor"}, {}};
  for (const auto& p : frontiers) {
    const auto t = read_csv(p);
    if (t.header != frontier.header) throw DataError(p.string() + ": unexpected header");
    frontier.rows.insert(frontier.rows.end(), t.rows.begin(), t.rows.end());
  }
  sort_by(frontier.rows, 3);

  CsvTable extra{report_columns(), {}};
  for (const auto& p : baselines) {
    const auto t = read_csv(p);
    if (t.header != extra.header) throw DataError(p.string() + ": unexpected header");
    extra.rows.insert(extra.rows.end(), t.rows.begin(), t.rows.end());
  }
  std::sort(extra.rows.begin(), extra.rows.end());

  write_csv(out / "c_vs_r.csv", c_vs_r);
  write_csv(out / "c_vs_d.csv", c_vs_d);
  write_csv(out / "pca_frontier.csv", frontier);
  write_csv(out / "discard_line.csv", discard_line_table(config));
  write_csv(out / "baselines.csv", extra);

  const auto k = config.constants();
  char head[200];
  std::snprintf(head, sizeof head, "H_X = %s nats, H_Y = %s nats, discard floor = %s nats\n\n",
                format_number(k.h_x).c_str(), format_number(k.h_y).c_str(),
                format_number(config.baselines.discard_floor).c_str());
  std::string summary = head;
  summary += "runs (sorted by rate)\n" + render(c_vs_r);
  if (!frontier.rows.empty()) summary += "\nstochastic pca frontier\n" + render(frontier);
  if (!extra.rows.empty()) summary += "\nother baselines\n" + render(extra);
  write_text(out / "summary.txt", summary);

  return {runs.size(), frontier.rows.size(), extra.rows.size(), out};
}

}  // namespace vaeprobe
