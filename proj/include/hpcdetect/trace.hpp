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

#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hpcdetect {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr int kWindowLength = 20;
inline constexpr std::int64_t kSampleIntervalUs = 100;

/// Counter groups in reporting order.
enum class PerformanceGroup {
  kBranch,
  kClock,
  kCycleActivity,
  kData,
  kFlopsDp,
  kIcache,
  kL2Data,
  kL2Cache,
  kL3Data,
  kL3Cache,
  kTlbData,
  kTlbInstr,
  kUops,
  kUopsExec,
  kUopsIssue,
  kUopsRetire,
};

inline constexpr int kNumGroups = 16;

const std::array<PerformanceGroup, kNumGroups>& all_groups();
std::string_view group_name(PerformanceGroup group);
std::optional<PerformanceGroup> parse_group(std::string_view name);
const std::vector<std::string>& metric_names(PerformanceGroup group);
int metric_count(PerformanceGroup group);
/// Index of `metric` within the group's metric order, if it belongs there.
std::optional<int> metric_index(PerformanceGroup group, std::string_view metric);

/// Ransomware is the positive class.
enum class Label { kBenign = 0, kRansomware = 1 };

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);
inline double label_value(Label label) { return label == Label::kRansomware ? 1.0 : 0.0; }

/// One execution's first 20 samples for one performance group.
struct TraceSeries {
  std::string trace_id;
  PerformanceGroup group = PerformanceGroup::kClock;
  std::vector<std::int64_t> timestamps_us;
  Matrix values;  // rows = samples, cols = group metrics

  /// Builds a trace on the canonical 100..2000 us grid.
  static TraceSeries on_grid(std::string id, PerformanceGroup group, Matrix values);
};

struct ValidationResult {
  bool ok = true;
  std::string reason;

  explicit operator bool() const { return ok; }
};

ValidationResult validate_trace(const TraceSeries& trace);

struct LabeledTrace {
  TraceSeries trace;
  Label label;
};

class LabeledDataset {
 public:
  explicit LabeledDataset(PerformanceGroup group) : group_(group) {}

  /// Throws DataError if the trace belongs to a different group or reuses an id.
  void add(TraceSeries trace, Label label);

  PerformanceGroup group() const { return group_; }
  const std::vector<LabeledTrace>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t count(Label label) const;
  bool contains(std::string_view trace_id) const;

 private:
  PerformanceGroup group_;
  std::vector<LabeledTrace> entries_;
};

// --- CSV ingestion -----------------------------------------------------------

inline constexpr std::string_view kTraceCsvHeader =
    "trace_id,label,group,timestamp_us,metric_name,metric_value";

/// A parsed trace whose label column may be blank (detection input).
struct ParsedTrace {
  TraceSeries trace;
  std::optional<Label> label;
};

/// Parses long-format trace CSV. Traces longer than 20 samples are truncated;
/// shorter ones are rejected. When `require_labels` is false a blank label
/// column is accepted.
std::vector<ParsedTrace> parse_trace_rows(std::istream& in, bool require_labels);

LabeledDataset parse_trace_csv(std::istream& in);
LabeledDataset parse_trace_csv(std::string_view text);
LabeledDataset load_trace_csv(const std::string& path);

/// Emits rows ordered by trace, timestamp, metric with shortest round-trip floats.
std::string write_trace_csv(const LabeledDataset& dataset);

// --- Normalization -----------------------------------------------------------

inline constexpr double kDegenerateStd = 1e-12;

struct Normalizer {
  Vector mean;
  Vector stddev;

  int feature_count() const { return static_cast<int>(mean.size()); }
  bool degenerate(int feature) const { return stddev[feature] < kDegenerateStd; }

  /// mean 0 / std 1 for every feature.
  static Normalizer identity(int features);
};

Normalizer fit_normalizer(const LabeledDataset& dataset);
Matrix apply_normalizer(const Normalizer& norm, const Matrix& values);
TraceSeries apply_normalizer(const Normalizer& norm, const TraceSeries& trace);

// --- Splitting ---------------------------------------------------------------

struct Partition {
  LabeledDataset first;
  LabeledDataset second;
};

inline constexpr double kValidationFraction = 0.25;

/// Per class, floor(train_fraction * n) entries go to `first` (train).
Partition stratified_split(const LabeledDataset& dataset, double train_fraction, std::uint64_t seed);

/// Per class, floor(0.25 * n) entries go to `second` (validation); the rest to
/// `first` (fit).
Partition validation_carve(const LabeledDataset& train, std::uint64_t seed);

}  // namespace hpcdetect
