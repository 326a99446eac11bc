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

#include <string>
#include <string_view>
#include <vector>

#include "hpcdetect/train.hpp"

namespace hpcdetect {

enum class ReportFormat { kCsv, kText };

/// One row per group, one column per optimizer, accuracy as "96.34%".
/// CSV columns: group,optimizer,train_fraction,mean_accuracy_pct,n_trials.
std::string render_accuracy_table(const GridReport& report, double fraction, ReportFormat format);

/// TP/TN/FP/FN as percentages of the test set plus FN/FP rates, one row per
/// group. CSV columns: group,optimizer,tp_pct,tn_pct,fp_pct,fn_pct,fn_rate,fp_rate.
std::string render_statistics_table(const GridReport& report, OptimizerKind kind, double fraction,
                                    ReportFormat format);

/// Every accuracy table followed by every statistics table. The CSV form is
/// the accuracy CSV covering all fractions.
std::string render_report(const GridReport& report, ReportFormat format);

struct AccuracyRow {
  std::string group;
  std::string optimizer;
  std::string train_fraction;
  std::string mean_accuracy_pct;
  int n_trials = 0;

  bool operator==(const AccuracyRow&) const = default;
};

/// Reads back the accuracy CSV emitted by render_accuracy_table/render_report.
std::vector<AccuracyRow> parse_accuracy_csv(std::string_view text);

}  // namespace hpcdetect
