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

#include <cstdint>
#include <utility>

#include "hpcdetect/trace.hpp"

namespace hpcdetect {

/// Generative parameters for one class: an AR(1) noise process riding on a
/// linear trend, value(t, f) = base(f) + drift(f) * t + e(t, f).
struct ClassProfile {
  Vector base_mean;
  Vector drift;
  Vector noise_std;
  double ar_coefficient = 0.0;

  int feature_count() const { return static_cast<int>(base_mean.size()); }
};

struct CorpusSpec {
  PerformanceGroup group = PerformanceGroup::kTlbData;
  ClassProfile benign;
  ClassProfile ransomware;
  int n_per_class = 50;
  std::uint64_t seed = 0;
};

struct ProfilePair {
  ClassProfile benign;
  ClassProfile ransomware;
};

/// Shared noise std 1.0 and AR 0.5; ransomware base means sit `separation`
/// above benign in every feature.
ProfilePair default_profiles(PerformanceGroup group, double separation);

/// Zero-noise constant profiles, identical for both classes.
ProfilePair degenerate_profiles(PerformanceGroup group);

/// Benign traces come first (ids benign-0000...), then ransomware.
LabeledDataset generate_corpus(const CorpusSpec& spec);

}  // namespace hpcdetect
