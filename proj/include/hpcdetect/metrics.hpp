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

#include <cstddef>
#include <optional>

#include "hpcdetect/rnn.hpp"

namespace hpcdetect {

inline constexpr double kDefaultThreshold = 0.5;

struct Verdict {
  Label label;
  double score;
};

/// Ransomware iff score >= threshold. Threshold must lie in (0, 1).
Verdict classify(const ModelParameters& model, const TraceSeries& trace,
                 double threshold = kDefaultThreshold);

/// Positive class is ransomware.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  void record(Label truth, Label predicted);
  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(const ModelParameters& model, const LabeledDataset& dataset,
                          double threshold = kDefaultThreshold);

/// Accuracy and miss/false-alarm rates. A rate is empty when its
/// denominator is zero.
struct RateSummary {
  double accuracy = 0.0;
  std::optional<double> fn_rate;  // FN / (FN + TP)
  std::optional<double> fp_rate;  // FP / (FP + TN)
  double tp_pct = 0.0;
  double tn_pct = 0.0;
  double fp_pct = 0.0;
  double fn_pct = 0.0;
};

RateSummary rates(const ConfusionCounts& counts);
/// Same arithmetic on real-valued cells, e.g. percentages averaged over trials.
RateSummary rates(double tp, double tn, double fp, double fn);

}  // namespace hpcdetect
