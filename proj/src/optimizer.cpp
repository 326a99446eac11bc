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

#include "hpcdetect/optimizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "hpcdetect/errors.hpp"

namespace hpcdetect {

const std::array<OptimizerKind, 4>& all_optimizers() {
  static const std::array<OptimizerKind, 4> kinds = {
      OptimizerKind::kAdadelta, OptimizerKind::kAdamax, OptimizerKind::kRmsprop, OptimizerKind::kSgd};
  return kinds;
}

std::string_view optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "SGD";
    case OptimizerKind::kAdadelta: return "Adadelta";
    case OptimizerKind::kAdamax: return "Adamax";
    case OptimizerKind::kRmsprop: return "RMSprop";
  }
  return "?";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "sgd") return OptimizerKind::kSgd;
  if (lower == "adadelta") return OptimizerKind::kAdadelta;
  if (lower == "adamax") return OptimizerKind::kAdamax;
  if (lower == "rmsprop") return OptimizerKind::kRmsprop;
  return std::nullopt;
}

OptimizerConfig OptimizerConfig::defaults(OptimizerKind kind) {
  OptimizerConfig c;
  c.kind = kind;
  switch (kind) {
    case OptimizerKind::kSgd: c.learning_rate = 0.01; break;
    case OptimizerKind::kRmsprop: c.learning_rate = 0.001; c.rho = 0.9; break;
    case OptimizerKind::kAdadelta: c.learning_rate = 1.0; c.rho = 0.95; break;
    case OptimizerKind::kAdamax: c.learning_rate = 0.002; break;
  }
  return c;
}

OptimizerState new_state(const OptimizerConfig& config, const ParameterSet& params) {
  OptimizerState s;
  s.config = config;
  const auto zeros = ParameterSet::zeros(params.input_dim(), params.hidden_dim());
  switch (config.kind) {
    case OptimizerKind::kSgd: break;
    case OptimizerKind::kRmsprop: s.first = zeros; break;
    case OptimizerKind::kAdadelta:
    case OptimizerKind::kAdamax:
      s.first = zeros;
      s.second = zeros;
      break;
  }
  return s;
}

void step(OptimizerState& state, ParameterSet& params, const Gradients& grads) {
  if (!grads.same_shape(params)) throw UsageError("optimizer step: gradient shape mismatch");
  if ((state.first && !state.first->same_shape(params)) ||
      (state.second && !state.second->same_shape(params))) {
    throw UsageError("optimizer step: state shape mismatch");
  }
  if (!grads.all_finite()) throw DataError("optimizer step: non-finite gradient");

  const OptimizerConfig& c = state.config;
  ++state.step_count;
  auto w = params.tensors();
  const auto g = grads.tensors();

  switch (c.kind) {
    case OptimizerKind::kSgd:
      for (std::size_t k = 0; k < w.size(); ++k) {
        for (std::size_t i = 0; i < w[k].size(); ++i) w[k][i] -= c.learning_rate * g[k][i];
      }
      break;

    case OptimizerKind::kRmsprop: {
      auto s = state.first->tensors();
      for (std::size_t k = 0; k < w.size(); ++k) {
        for (std::size_t i = 0; i < w[k].size(); ++i) {
          const double gi = g[k][i];
          s[k][i] = c.rho * s[k][i] + (1.0 - c.rho) * gi * gi;
          w[k][i] -= c.learning_rate * gi / std::sqrt(s[k][i] + c.epsilon);
        }
      }
      break;
    }

    case OptimizerKind::kAdadelta: {
      auto s = state.first->tensors();
      auto u = state.second->tensors();
      for (std::size_t k = 0; k < w.size(); ++k) {
        for (std::size_t i = 0; i < w[k].size(); ++i) {
          const double gi = g[k][i];
          s[k][i] = c.rho * s[k][i] + (1.0 - c.rho) * gi * gi;
          const double delta = -std::sqrt(u[k][i] + c.epsilon) / std::sqrt(s[k][i] + c.epsilon) * gi;
          u[k][i] = c.rho * u[k][i] + (1.0 - c.rho) * delta * delta;
          w[k][i] += c.learning_rate * delta;
        }
      }
      break;
    }

    case OptimizerKind::kAdamax: {
      auto m = state.first->tensors();
      auto u = state.second->tensors();
      const double correction = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_count));
      for (std::size_t k = 0; k < w.size(); ++k) {
        for (std::size_t i = 0; i < w[k].size(); ++i) {
          const double gi = g[k][i];
          m[k][i] = c.beta1 * m[k][i] + (1.0 - c.beta1) * gi;
          u[k][i] = std::max(c.beta2 * u[k][i], std::abs(gi));
          w[k][i] -= c.learning_rate * m[k][i] / (correction * (u[k][i] + c.epsilon));
        }
      }
      break;
    }
  }
}

}  // namespace hpcdetect
