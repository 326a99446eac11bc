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

#include <doctest.h>

#include <cmath>

#include "hpcdetect/errors.hpp"
#include "hpcdetect/optimizer.hpp"
#include "test_support.hpp"

using namespace hpcdetect;

namespace {

/// Single-scalar parameter set: only dense_bias is live; everything else is
/// 1x1 and held at zero gradient.
struct Scalar {
  ParameterSet params = ParameterSet::zeros(1, 1);
  Gradients grads = ParameterSet::zeros(1, 1);
  double& w() { return params.dense_bias[0]; }
  double& g() { return grads.dense_bias[0]; }
};

double one_step(OptimizerConfig config, double w, double g) {
  Scalar s;
  s.w() = w;
  s.g() = g;
  auto state = new_state(config, s.params);
  step(state, s.params, s.grads);
  return s.w();
}

}  // namespace

TEST_CASE("new_state") {
  const auto params = ParameterSet::zeros(3, 4);
  auto sgd = new_state(OptimizerKind::kSgd, params);
  CHECK_FALSE(sgd.first.has_value());
  CHECK_FALSE(sgd.second.has_value());
  CHECK(sgd.step_count == 0);
  auto rms = new_state(OptimizerKind::kRmsprop, params);
  REQUIRE(rms.first.has_value());
  CHECK(rms.first->same_shape(params));
  CHECK(rms.first->squared_norm() == 0.0);
  CHECK(rms.step_count == 0);
  auto ada = new_state(OptimizerKind::kAdadelta, params);
  CHECK((ada.first && ada.second));

  const auto d = OptimizerConfig::defaults(OptimizerKind::kAdamax);
  CHECK(d.learning_rate == 0.002);
  CHECK(d.beta1 == 0.9);
  CHECK(d.beta2 == 0.999);
  CHECK(d.epsilon == 1e-7);
  CHECK(OptimizerConfig::defaults(OptimizerKind::kRmsprop).rho == 0.9);
  CHECK(OptimizerConfig::defaults(OptimizerKind::kAdadelta).rho == 0.95);
  CHECK(OptimizerConfig::defaults(OptimizerKind::kAdadelta).learning_rate == 1.0);
  CHECK(OptimizerConfig::defaults(OptimizerKind::kSgd).learning_rate == 0.01);
}

TEST_CASE("single-step closed forms") {
  auto sgd = OptimizerConfig::defaults(OptimizerKind::kSgd);
  sgd.learning_rate = 0.1;
  CHECK(std::abs(one_step(sgd, 1.0, 0.5) - 0.95) < 1e-12);
  CHECK(std::abs(one_step(OptimizerConfig::defaults(OptimizerKind::kRmsprop), 1.0, 1.0) -
                 0.99683772392096925) < 1e-12);
  CHECK(std::abs(one_step(OptimizerConfig::defaults(OptimizerKind::kAdamax), 1.0, 1.0) -
                 0.99800000020000001) < 1e-12);
  CHECK(std::abs(one_step(OptimizerConfig::defaults(OptimizerKind::kAdadelta), 1.0, 1.0) -
                 0.99858578785183838) < 1e-12);
}

TEST_CASE("Adadelta and Adamax accumulators after one step") {
  Scalar s;
  s.w() = 1.0;
  s.g() = 1.0;
  auto ada = new_state(OptimizerKind::kAdadelta, s.params);
  step(ada, s.params, s.grads);
  CHECK(ada.first->dense_bias[0] == doctest::Approx(0.05));
  const double delta = -0.0014142121481616539;
  CHECK(ada.second->dense_bias[0] == doctest::Approx(0.05 * delta * delta).epsilon(1e-12));

  Scalar t;
  t.w() = 1.0;
  t.g() = 1.0;
  auto amx = new_state(OptimizerKind::kAdamax, t.params);
  step(amx, t.params, t.grads);
  CHECK(amx.first->dense_bias[0] == doctest::Approx(0.1));
  CHECK(amx.second->dense_bias[0] == 1.0);
  CHECK(amx.step_count == 1);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  for (auto kind : all_optimizers()) {
    auto params = init_params(3, 4, 5);
    const auto before = params;
    auto state = new_state(kind, params);
    const auto zero = ParameterSet::zeros(3, 4);
    for (int i = 0; i < 10; ++i) step(state, params, zero);
    const auto a = before.tensors();
    const auto b = std::as_const(params).tensors();
    for (std::size_t k = 0; k < a.size(); ++k) {
      for (std::size_t i = 0; i < a[k].size(); ++i) CHECK(a[k][i] == b[k][i]);
    }
    if (kind == OptimizerKind::kAdamax) CHECK(state.first->squared_norm() == 0.0);
  }
}

TEST_CASE("minimizing w^2 from 5") {
  for (auto kind : all_optimizers()) {
    Scalar s;
    s.w() = 5.0;
    auto state = new_state(kind, s.params);
    double previous = 5.0;
    bool monotone = true;
    for (int i = 0; i < 500; ++i) {
      s.g() = 2.0 * s.w();
      step(state, s.params, s.grads);
      monotone &= std::abs(s.w()) <= previous;
      previous = std::abs(s.w());
    }
    INFO(optimizer_name(kind));
    CHECK(std::abs(s.w()) < 5.0);
    if (kind == OptimizerKind::kSgd) CHECK(monotone);
  }
}

TEST_CASE("accumulators stay finite and nonnegative under random gradients") {
  CounterRng rng(8);
  for (auto kind : all_optimizers()) {
    auto params = init_params(2, 2, 1);
    auto state = new_state(kind, params);
    Gradients g = ParameterSet::zeros(2, 2);
    for (int i = 0; i < 10000; ++i) {
      for (auto t : g.tensors()) {
        for (double& v : t) v = rng.normal() * 10.0;
      }
      step(state, params, g);
    }
    CHECK(params.all_finite());
    if (state.first) CHECK(state.first->all_finite());
    if (state.second) CHECK(state.second->all_finite());
    auto nonneg = [](const ParameterSet& p) {
      for (auto t : p.tensors()) {
        for (double v : t) {
          if (v < 0.0) return false;
        }
      }
      return true;
    };
    if (kind == OptimizerKind::kRmsprop || kind == OptimizerKind::kAdadelta) CHECK(nonneg(*state.first));
    if (kind == OptimizerKind::kAdadelta || kind == OptimizerKind::kAdamax) CHECK(nonneg(*state.second));
  }
}

TEST_CASE("step is deterministic") {
  for (auto kind : all_optimizers()) {
    auto p1 = init_params(2, 3, 4), p2 = p1;
    auto s1 = new_state(kind, p1), s2 = new_state(kind, p2);
    auto g = init_params(2, 3, 5);
    for (int i = 0; i < 5; ++i) {
      step(s1, p1, g);
      step(s2, p2, g);
    }
    CHECK((p1.u_cell.array() == p2.u_cell.array()).all());
  }
}

TEST_CASE("step errors") {
  auto params = ParameterSet::zeros(2, 2);
  auto state = new_state(OptimizerKind::kRmsprop, params);
  CHECK_THROWS_AS(step(state, params, ParameterSet::zeros(2, 3)), UsageError);
  auto g = ParameterSet::zeros(2, 2);
  g.b_cell[1] = std::nan("");
  CHECK_THROWS_AS(step(state, params, g), DataError);
  CHECK(state.step_count == 0);
}

TEST_CASE("optimizer names") {
  CHECK(parse_optimizer("adadelta") == OptimizerKind::kAdadelta);
  CHECK(parse_optimizer("RMSprop") == OptimizerKind::kRmsprop);
  CHECK(parse_optimizer("SGD") == OptimizerKind::kSgd);
  CHECK(parse_optimizer("Adamax") == OptimizerKind::kAdamax);
  CHECK_FALSE(parse_optimizer("adam").has_value());
}
