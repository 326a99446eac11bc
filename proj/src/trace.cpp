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

#include "hpcdetect/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hpcdetect/errors.hpp"
#include "hpcdetect/random.hpp"

namespace hpcdetect {

TraceSeries TraceSeries::on_grid(std::string id, PerformanceGroup group, Matrix values) {
  TraceSeries t;
  t.trace_id = std::move(id);
  t.group = group;
  t.timestamps_us.resize(static_cast<std::size_t>(values.rows()));
  for (std::size_t k = 0; k < t.timestamps_us.size(); ++k) {
    t.timestamps_us[k] = kSampleIntervalUs * static_cast<std::int64_t>(k + 1);
  }
  t.values = std::move(values);
  return t;
}

ValidationResult validate_trace(const TraceSeries& trace) {
  auto fail = [](std::string reason) { return ValidationResult{false, std::move(reason)}; };
  if (trace.timestamps_us.size() != static_cast<std::size_t>(kWindowLength) ||
      trace.values.rows() != kWindowLength) {
    return fail("incomplete window: expected 20 samples");
  }
  if (trace.values.cols() != metric_count(trace.group)) {
    return fail("feature count does not match group " + std::string(group_name(trace.group)));
  }
  for (int k = 0; k < kWindowLength; ++k) {
    if (trace.timestamps_us[k] != kSampleIntervalUs * (k + 1)) {
      return fail("non-uniform 100 us spacing at sample " + std::to_string(k));
    }
  }
  for (Eigen::Index r = 0; r < trace.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < trace.values.cols(); ++c) {
      if (!std::isfinite(trace.values(r, c))) {
        return fail("non-finite value at sample " + std::to_string(r) + ", feature " +
                    std::to_string(c));
      }
    }
  }
  return {};
}

void LabeledDataset::add(TraceSeries trace, Label label) {
  if (trace.group != group_) {
    throw DataError("trace '" + trace.trace_id + "' has group " +
                    std::string(group_name(trace.group)) + ", dataset is " +
                    std::string(group_name(group_)));
  }
  if (contains(trace.trace_id)) {
    throw DataError("duplicate trace_id '" + trace.trace_id + "'");
  }
  entries_.push_back({std::move(trace), label});
}

std::size_t LabeledDataset::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [&](const LabeledTrace& e) { return e.label == label; }));
}

bool LabeledDataset::contains(std::string_view trace_id) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const LabeledTrace& e) { return e.trace.trace_id == trace_id; });
}

// --- CSV ---------------------------------------------------------------------

namespace {

struct PendingTrace {
  std::string id;
  PerformanceGroup group;
  std::optional<Label> label;
  std::size_t first_line;
  std::map<std::int64_t, std::vector<std::optional<double>>> cells;
};

[[noreturn]] void fail_at(std::size_t line, const std::string& msg) {
  throw DataError("line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

TraceSeries assemble(const PendingTrace& p) {
  const int features = metric_count(p.group);
  // Timestamps must form the contiguous grid 100, 200, ..., 100*n.
  std::int64_t expected = kSampleIntervalUs;
  for (const auto& [ts, row] : p.cells) {
    if (ts != expected) {
      fail_at(p.first_line, "trace '" + p.id + "': wrong timestamp grid, expected " +
                                std::to_string(expected) + " us but found " + std::to_string(ts));
    }
    expected += kSampleIntervalUs;
  }
  if (p.cells.size() < static_cast<std::size_t>(kWindowLength)) {
    fail_at(p.first_line, "trace '" + p.id + "': incomplete window, " +
                              std::to_string(p.cells.size()) + " of 20 timestamps");
  }
  Matrix values(kWindowLength, features);
  auto it = p.cells.begin();
  for (int r = 0; r < kWindowLength; ++r, ++it) {
    for (int c = 0; c < features; ++c) {
      if (!it->second[c]) {
        fail_at(p.first_line, "trace '" + p.id + "': missing cell at " +
                                  std::to_string(it->first) + " us for metric '" +
                                  metric_names(p.group)[c] + "'");
      }
      values(r, c) = *it->second[c];
    }
  }
  return TraceSeries::on_grid(p.id, p.group, std::move(values));
}

}  // namespace

std::vector<ParsedTrace> parse_trace_rows(std::istream& in, bool require_labels) {
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::vector<PendingTrace> pending;
  std::unordered_map<std::string, std::size_t> index;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (!seen_header) {
      if (view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
      if (view != kTraceCsvHeader) {
        fail_at(line_no, "expected header '" + std::string(kTraceCsvHeader) + "'");
      }
      seen_header = true;
      continue;
    }
    if (view.empty()) continue;
    auto fields = split_fields(view);
    if (fields.size() != 6) {
      fail_at(line_no, "expected 6 fields, found " + std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(f);
    const std::string id(fields[0]);
    if (id.empty()) fail_at(line_no, "empty trace_id");

    std::optional<Label> label;
    if (fields[1].empty()) {
      if (require_labels) fail_at(line_no, "missing label");
    } else {
      label = parse_label(fields[1]);
      if (!label) fail_at(line_no, "unknown label '" + std::string(fields[1]) + "'");
    }
    const auto group = parse_group(fields[2]);
    if (!group) fail_at(line_no, "unknown group '" + std::string(fields[2]) + "'");

    const auto ts = parse_int(fields[3]);
    if (!ts) fail_at(line_no, "non-numeric timestamp '" + std::string(fields[3]) + "'");
    if (*ts <= 0 || *ts % kSampleIntervalUs != 0) {
      fail_at(line_no, "wrong timestamp grid: " + std::to_string(*ts) +
                           " us is not a positive multiple of 100");
    }
    const auto metric = metric_index(*group, fields[4]);
    if (!metric) {
      fail_at(line_no, "unknown metric '" + std::string(fields[4]) + "' for group " +
                           std::string(fields[2]));
    }
    const auto value = parse_double(fields[5]);
    if (!value) fail_at(line_no, "non-numeric value '" + std::string(fields[5]) + "'");
    if (!std::isfinite(*value)) fail_at(line_no, "non-finite value");

    auto [it, inserted] = index.try_emplace(id, pending.size());
    if (inserted) pending.push_back({id, *group, label, line_no, {}});
    PendingTrace& p = pending[it->second];
    if (p.group != *group) fail_at(line_no, "trace '" + id + "' mixes groups");
    if (p.label != label) fail_at(line_no, "trace '" + id + "' has mixed labels");

    auto& row = p.cells[*ts];
    if (row.empty()) row.resize(static_cast<std::size_t>(metric_count(*group)));
    if (row[*metric]) {
      fail_at(line_no, "duplicate cell for trace '" + id + "' at " + std::to_string(*ts) +
                           " us, metric '" + std::string(fields[4]) + "'");
    }
    row[*metric] = *value;
  }
  if (!seen_header) throw DataError("empty input: missing header");

  std::vector<ParsedTrace> out;
  out.reserve(pending.size());
  for (const auto& p : pending) out.push_back({assemble(p), p.label});
  return out;
}

LabeledDataset parse_trace_csv(std::istream& in) {
  auto rows = parse_trace_rows(in, /*require_labels=*/true);
  if (rows.empty()) throw DataError("no traces in input");
  LabeledDataset dataset(rows.front().trace.group);
  for (auto& r : rows) {
    if (r.trace.group != dataset.group()) {
      throw DataError("mixed groups in one dataset: " + std::string(group_name(dataset.group())) +
                      " and " + std::string(group_name(r.trace.group)));
    }
    dataset.add(std::move(r.trace), *r.label);
  }
  return dataset;
}

LabeledDataset parse_trace_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace_csv(in);
}

LabeledDataset load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_trace_csv(in);
}

std::string write_trace_csv(const LabeledDataset& dataset) {
  std::string out(kTraceCsvHeader);
  out += '\n';
  const auto& names = metric_names(dataset.group());
  const std::string group(group_name(dataset.group()));
  for (const auto& e : dataset.entries()) {
    const std::string prefix =
        e.trace.trace_id + "," + std::string(label_name(e.label)) + "," + group + ",";
    for (Eigen::Index r = 0; r < e.trace.values.rows(); ++r) {
      const std::string ts = std::to_string(e.trace.timestamps_us[r]);
      for (Eigen::Index c = 0; c < e.trace.values.cols(); ++c) {
        out += prefix;
        out += ts;
        out += ',';
        out += names[c];
        out += ',';
        out += format_double(e.trace.values(r, c));
        out += '\n';
      }
    }
  }
  return out;
}

// --- Normalization -----------------------------------------------------------

Normalizer Normalizer::identity(int features) {
  return {Vector::Zero(features), Vector::Ones(features)};
}

Normalizer fit_normalizer(const LabeledDataset& dataset) {
  if (dataset.empty()) throw UsageError("fit_normalizer: empty dataset");
  const int features = metric_count(dataset.group());
  Vector mean = Vector::Zero(features);
  double n = 0.0;
  for (const auto& e : dataset.entries()) {
    mean += e.trace.values.colwise().sum().transpose();
    n += static_cast<double>(e.trace.values.rows());
  }
  mean /= n;
  // Second pass on centered values keeps the variance accurate for large offsets.
  Vector var = Vector::Zero(features);
  for (const auto& e : dataset.entries()) {
    var += (e.trace.values.rowwise() - mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  var /= n;
  return {mean, var.cwiseSqrt()};
}

Matrix apply_normalizer(const Normalizer& norm, const Matrix& values) {
  if (values.cols() != norm.feature_count()) {
    throw UsageError("apply_normalizer: trace has " + std::to_string(values.cols()) +
                     " features, normalizer has " + std::to_string(norm.feature_count()));
  }
  Matrix out(values.rows(), values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    if (norm.degenerate(static_cast<int>(c))) {
      out.col(c).setZero();
    } else {
      out.col(c) = (values.col(c).array() - norm.mean[c]) / norm.stddev[c];
    }
  }
  return out;
}

TraceSeries apply_normalizer(const Normalizer& norm, const TraceSeries& trace) {
  TraceSeries out = trace;
  out.values = apply_normalizer(norm, trace.values);
  return out;
}

// --- Splitting ---------------------------------------------------------------

namespace {

// floor() with a small guard so that e.g. 0.7 * 80 lands on 56, not 55.
std::size_t floor_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

Partition partition_by_class(const LabeledDataset& dataset, double first_fraction,
                             std::uint64_t seed, std::size_t min_per_class) {
  Partition out{LabeledDataset(dataset.group()), LabeledDataset(dataset.group())};
  CounterRng rng(seed);
  for (Label label : {Label::kBenign, Label::kRansomware}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (dataset.entries()[i].label == label) members.push_back(i);
    }
    if (members.size() < min_per_class) {
      throw UsageError("class " + std::string(label_name(label)) + " has " +
                       std::to_string(members.size()) + " entries, need at least " +
                       std::to_string(min_per_class));
    }
    shuffle_in_place(members, rng);
    const std::size_t take = floor_count(first_fraction, members.size());
    // Restore dataset order inside each side so outputs do not depend on
    // shuffle internals beyond membership.
    std::vector<std::size_t> first(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    std::vector<std::size_t> second(members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    for (auto i : first) out.first.add(dataset.entries()[i].trace, label);
    for (auto i : second) out.second.add(dataset.entries()[i].trace, label);
  }
  return out;
}

}  // namespace

Partition stratified_split(const LabeledDataset& dataset, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0, 1)");
  }
  return partition_by_class(dataset, train_fraction, seed, 2);
}

Partition validation_carve(const LabeledDataset& train, std::uint64_t seed) {
  auto carved = partition_by_class(train, kValidationFraction, derive_seed(seed, 0xCA5E), 4);
  return {std::move(carved.second), std::move(carved.first)};
}

}  // namespace hpcdetect
