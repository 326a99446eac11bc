// Copyright 2026 The hpcdetect Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hpcdetect/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "hpcdetect/errors.hpp"

namespace hpcdetect {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string percent_cell(const GridCell& c) {
  return c.n_trials > 0 ? fixed(100.0 * c.mean_accuracy, 2) + "%" : "n/a";
}

std::string pad(const std::string& s, std::size_t width, bool left_align) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left_align ? s + fill : fill + s;
}

std::string render_text(const std::string& title, const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], r[c].size());
  }
  std::string out = title + "\n";
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out += "  ";
      out += pad(r[c], widths[c], c == 0);
    }
    out += "\n";
  };
  emit(header);
  std::size_t total = 0;
  for (auto w : widths) total += w;
  out += std::string(total + 2 * (widths.size() - 1), '-') + "\n";
  for (const auto& r : rows) emit(r);
  return out;
}

void require_nonempty(const GridReport& report) {
  if (report.empty()) throw UsageError("cannot render an empty report");
}

std::string fraction_label(double fraction) { return fixed(100.0 * fraction, 0) + "%"; }

}  // namespace

std::string render_accuracy_table(const GridReport& report, double fraction, ReportFormat format) {
  require_nonempty(report);
  if (format == ReportFormat::kCsv) {
    std::string out = "group,optimizer,train_fraction,mean_accuracy_pct,n_trials\n";
    for (auto g : report.groups) {
      for (auto k : report.optimizers) {
        const auto& c = report.cell(g, k, fraction);
        out += std::string(group_name(g)) + "," + std::string(optimizer_name(k)) + "," +
               fixed(fraction, 2) + "," + (c.n_trials > 0 ? fixed(100.0 * c.mean_accuracy, 2) : "NA") +
               "," + std::to_string(c.n_trials) + "\n";
      }
    }
    return out;
  }
  std::vector<std::string> header = {"Group"};
  for (auto k : report.optimizers) header.emplace_back(optimizer_name(k));
  std::vector<std::vector<std::string>> rows;
  for (auto g : report.groups) {
    std::vector<std::string> row = {std::string(group_name(g))};
    for (auto k : report.optimizers) row.push_back(percent_cell(report.cell(g, k, fraction)));
    rows.push_back(std::move(row));
  }
  return render_text("Accuracy with " + fraction_label(fraction) + " training data", header, rows);
}

std::string render_statistics_table(const GridReport& report, OptimizerKind kind, double fraction,
                                    ReportFormat format) {
  require_nonempty(report);
  auto rate = [](const std::optional<double>& r) { return r ? fixed(*r, 4) : std::string("NA"); };
  if (format == ReportFormat::kCsv) {
    std::string out = "group,optimizer,tp_pct,tn_pct,fp_pct,fn_pct,fn_rate,fp_rate\n";
    for (auto g : report.groups) {
      const auto& c = report.cell(g, kind, fraction);
      out += std::string(group_name(g)) + "," + std::string(optimizer_name(kind)) + ",";
      if (c.n_trials == 0) {
        out += "NA,NA,NA,NA,NA,NA\n";
        continue;
      }
      const RateSummary r = rates(c.tp_pct, c.tn_pct, c.fp_pct, c.fn_pct);
      out += fixed(c.tp_pct, 2) + "," + fixed(c.tn_pct, 2) + "," + fixed(c.fp_pct, 2) + "," +
             fixed(c.fn_pct, 2) + "," + rate(r.fn_rate) + "," + rate(r.fp_rate) + "\n";
    }
    return out;
  }
  const std::vector<std::string> header = {"Group", "TP", "TN", "FP", "FN", "FN rate", "FP rate"};
  std::vector<std::vector<std::string>> rows;
  for (auto g : report.groups) {
    const auto& c = report.cell(g, kind, fraction);
    if (c.n_trials == 0) {
      rows.push_back({std::string(group_name(g)), "n/a", "n/a", "n/a", "n/a", "n/a", "n/a"});
      continue;
    }
    const RateSummary r = rates(c.tp_pct, c.tn_pct, c.fp_pct, c.fn_pct);
    rows.push_back({std::string(group_name(g)), fixed(c.tp_pct, 2) + "%", fixed(c.tn_pct, 2) + "%",
                    fixed(c.fp_pct, 2) + "%", fixed(c.fn_pct, 2) + "%", rate(r.fn_rate), rate(r.fp_rate)});
  }
  return render_text("Statistics for " + std::string(optimizer_name(kind)) + " with " +
                         fraction_label(fraction) + " training data",
                     header, rows);
}

std::string render_report(const GridReport& report, ReportFormat format) {
  require_nonempty(report);
  if (format == ReportFormat::kCsv) {
    std::string out;
    for (std::size_t i = 0; i < report.fractions.size(); ++i) {
      std::string table = render_accuracy_table(report, report.fractions[i], ReportFormat::kCsv);
      if (i > 0) table.erase(0, table.find('\n') + 1);
      out += table;
    }
    return out;
  }
  std::string out;
  for (double f : report.fractions) out += render_accuracy_table(report, f, format) + "\n";
  for (double f : report.fractions) {
    for (auto k : report.optimizers) out += render_statistics_table(report, k, f, format) + "\n";
  }
  return out;
}

std::vector<AccuracyRow> parse_accuracy_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "group,optimizer,train_fraction,mean_accuracy_pct,n_trials") {
    throw DataError("accuracy CSV: bad header");
  }
  std::vector<AccuracyRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 5) throw DataError("accuracy CSV line " + std::to_string(line_no) + ": expected 5 fields");
    AccuracyRow r{fields[0], fields[1], fields[2], fields[3], 0};
    try {
      r.n_trials = std::stoi(fields[4]);
    } catch (const std::exception&) {
      throw DataError("accuracy CSV line " + std::to_string(line_no) + ": bad n_trials");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace hpcdetect
