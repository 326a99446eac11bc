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
#include <optional>
#include <string_view>

#include "hpcdetect/rnn.hpp"

namespace hpcdetect {

enum class OptimizerKind { kSgd, kAdadelta, kAdamax, kRmsprop };

/// Reporting order: Adadelta, Adamax, RMSprop, SGD.
const std::array<OptimizerKind, 4>& all_optimizers();
std::string_view optimizer_name(OptimizerKind kind);
/// Case-insensitive.
std::optional<OptimizerKind> parse_optimizer(std::string_view name);

/// Hyperparameters for every kind; fields a kind does not use are ignored.
struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdadelta;
  double learning_rate = 1.0;
  double rho = 0.95;     // RMSprop, Adadelta
  double beta1 = 0.9;    // Adamax
  double beta2 = 0.999;  // Adamax
  double epsilon = 1e-7;

  /// Published defaults for `kind`.
  static OptimizerConfig defaults(OptimizerKind kind);
};

struct OptimizerState {
  OptimizerConfig config;
  std::int64_t step_count = 0;
  // RMSprop, Adadelta: EMA of g^2. Adamax: first-moment EMA.
  std::optional<ParameterSet> first;
  // Adadelta: EMA of squared updates. Adamax: infinity-norm accumulator.
  std::optional<ParameterSet> second;
};

OptimizerState new_state(const OptimizerConfig& config, const ParameterSet& params);
inline OptimizerState new_state(OptimizerKind kind, const ParameterSet& params) {
  return new_state(OptimizerConfig::defaults(kind), params);
}

/// Applies one update in place. Throws UsageError on shape mismatch and
/// DataError on a non-finite gradient (state and params left untouched).
void step(OptimizerState& state, ParameterSet& params, const Gradients& grads);

}  // namespace hpcdetect
