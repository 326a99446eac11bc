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

#include "hpcdetect/synth.hpp"

#include <cstdio>

#include "hpcdetect/errors.hpp"
#include "hpcdetect/random.hpp"

namespace hpcdetect {
namespace {

void check_profile(const ClassProfile& p, int features, const char* which) {
  if (p.base_mean.size() != features || p.drift.size() != features ||
      p.noise_std.size() != features) {
    throw UsageError(std::string(which) + " profile does not have " + std::to_string(features) +
                     " features");
  }
  if ((p.noise_std.array() < 0.0).any()) {
    throw UsageError(std::string(which) + " profile has negative noise std");
  }
  if (!(p.ar_coefficient >= 0.0 && p.ar_coefficient < 1.0)) {
    throw UsageError(std::string(which) + " profile AR coefficient outside [0, 1)");
  }
}

TraceSeries sample_trace(const ClassProfile& p, PerformanceGroup group, std::string id,
                         CounterRng& rng) {
  const int features = p.feature_count();
  Matrix values(kWindowLength, features);
  for (int f = 0; f < features; ++f) {
    double e = 0.0;
    for (int t = 0; t < kWindowLength; ++t) {
      const double eta = rng.normal(0.0, p.noise_std[f]);
      e = (t == 0) ? eta : p.ar_coefficient * e + eta;
      values(t, f) = p.base_mean[f] + p.drift[f] * t + e;
    }
  }
  return TraceSeries::on_grid(std::move(id), group, std::move(values));
}

}  // namespace

ProfilePair default_profiles(PerformanceGroup group, double separation) {
  const int features = metric_count(group);
  ClassProfile benign;
  benign.base_mean = Vector::LinSpaced(features, 10.0, 10.0 + 5.0 * (features - 1));
  benign.drift = Vector::Constant(features, 0.1);
  benign.noise_std = Vector::Ones(features);
  benign.ar_coefficient = 0.5;
  ClassProfile ransomware = benign;
  ransomware.base_mean.array() += separation;
  return {benign, ransomware};
}

ProfilePair degenerate_profiles(PerformanceGroup group) {
  const int features = metric_count(group);
  ClassProfile p;
  p.base_mean = Vector::Constant(features, 50.0);
  p.drift = Vector::Zero(features);
  p.noise_std = Vector::Zero(features);
  p.ar_coefficient = 0.0;
  return {p, p};
}

LabeledDataset generate_corpus(const CorpusSpec& spec) {
  const int features = metric_count(spec.group);
  check_profile(spec.benign, features, "benign");
  check_profile(spec.ransomware, features, "ransomware");
  if (spec.n_per_class < 1) throw UsageError("n_per_class must be positive");

  LabeledDataset dataset(spec.group);
  CounterRng rng(spec.seed);
  char id[48];
  for (Label label : {Label::kBenign, Label::kRansomware}) {
    const ClassProfile& profile = label == Label::kBenign ? spec.benign : spec.ransomware;
    for (int k = 0; k < spec.n_per_class; ++k) {
      std::snprintf(id, sizeof(id), "%s-%04d", label_name(label).data(), k);
      dataset.add(sample_trace(profile, spec.group, id, rng), label);
    }
  }
  return dataset;
}

}  // namespace hpcdetect
