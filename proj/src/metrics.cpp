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

#include "hpcdetect/metrics.hpp"

#include "hpcdetect/errors.hpp"

namespace hpcdetect {

Verdict classify(const ModelParameters& model, const TraceSeries& trace, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold must lie in (0, 1)");
  const double score = model_forward(model, trace);
  return {score >= threshold ? Label::kRansomware : Label::kBenign, score};
}

void ConfusionCounts::record(Label truth, Label predicted) {
  if (truth == Label::kRansomware) {
    (predicted == Label::kRansomware ? tp : fn) += 1;
  } else {
    (predicted == Label::kRansomware ? fp : tn) += 1;
  }
}

ConfusionCounts confusion(const ModelParameters& model, const LabeledDataset& dataset, double threshold) {
  if (dataset.empty()) throw UsageError("confusion: empty dataset");
  ConfusionCounts counts;
  for (const auto& e : dataset.entries()) {
    counts.record(e.label, classify(model, e.trace, threshold).label);
  }
  return counts;
}

RateSummary rates(double tp, double tn, double fp, double fn) {
  RateSummary r;
  const double total = tp + tn + fp + fn;
  if (total > 0.0) {
    r.accuracy = (tp + tn) / total;
    r.tp_pct = 100.0 * tp / total;
    r.tn_pct = 100.0 * tn / total;
    r.fp_pct = 100.0 * fp / total;
    r.fn_pct = 100.0 * fn / total;
  }
  if (fn + tp > 0.0) r.fn_rate = fn / (fn + tp);
  if (fp + tn > 0.0) r.fp_rate = fp / (fp + tn);
  return r;
}

RateSummary rates(const ConfusionCounts& c) {
  return rates(static_cast<double>(c.tp), static_cast<double>(c.tn), static_cast<double>(c.fp),
               static_cast<double>(c.fn));
}

}  // namespace hpcdetect
