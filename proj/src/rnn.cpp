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

#include "hpcdetect/rnn.hpp"

#include <algorithm>
#include <cmath>

#include "hpcdetect/errors.hpp"
#include "hpcdetect/random.hpp"

namespace hpcdetect {

const std::array<std::string_view, ParameterSet::kTensorCount>& ParameterSet::tensor_names() {
  static const std::array<std::string_view, kTensorCount> names = {
      "w_input", "w_forget", "w_cell", "w_output", "u_input",       "u_forget",  "u_cell",
      "u_output", "b_input", "b_forget", "b_cell", "b_output", "dense_weights", "dense_bias"};
  return names;
}

ParameterSet ParameterSet::zeros(int input_dim, int hidden_dim) {
  ParameterSet p;
  for (Matrix* m : {&p.w_input, &p.w_forget, &p.w_cell, &p.w_output}) {
    *m = Matrix::Zero(hidden_dim, input_dim);
  }
  for (Matrix* m : {&p.u_input, &p.u_forget, &p.u_cell, &p.u_output}) {
    *m = Matrix::Zero(hidden_dim, hidden_dim);
  }
  for (Vector* v : {&p.b_input, &p.b_forget, &p.b_cell, &p.b_output, &p.dense_weights}) {
    *v = Vector::Zero(hidden_dim);
  }
  p.dense_bias = Vector::Zero(1);
  return p;
}

namespace {

template <typename Dense>
std::span<double> span_of(Dense& d) {
  return {d.data(), static_cast<std::size_t>(d.size())};
}

template <typename Dense>
std::span<const double> span_of(const Dense& d) {
  return {d.data(), static_cast<std::size_t>(d.size())};
}

}  // namespace

std::array<std::span<double>, ParameterSet::kTensorCount> ParameterSet::tensors() {
  return {span_of(w_input),  span_of(w_forget), span_of(w_cell),   span_of(w_output),
          span_of(u_input),  span_of(u_forget), span_of(u_cell),   span_of(u_output),
          span_of(b_input),  span_of(b_forget), span_of(b_cell),   span_of(b_output),
          span_of(dense_weights), span_of(dense_bias)};
}

std::array<std::span<const double>, ParameterSet::kTensorCount> ParameterSet::tensors() const {
  return {span_of(w_input),  span_of(w_forget), span_of(w_cell),   span_of(w_output),
          span_of(u_input),  span_of(u_forget), span_of(u_cell),   span_of(u_output),
          span_of(b_input),  span_of(b_forget), span_of(b_cell),   span_of(b_output),
          span_of(dense_weights), span_of(dense_bias)};
}

bool ParameterSet::same_shape(const ParameterSet& other) const {
  auto shape = [](const auto& a, const auto& b) { return a.rows() == b.rows() && a.cols() == b.cols(); };
  return shape(w_input, other.w_input) && shape(w_forget, other.w_forget) &&
         shape(w_cell, other.w_cell) && shape(w_output, other.w_output) &&
         shape(u_input, other.u_input) && shape(u_forget, other.u_forget) &&
         shape(u_cell, other.u_cell) && shape(u_output, other.u_output) &&
         shape(b_input, other.b_input) && shape(b_forget, other.b_forget) &&
         shape(b_cell, other.b_cell) && shape(b_output, other.b_output) &&
         shape(dense_weights, other.dense_weights) && shape(dense_bias, other.dense_bias);
}

bool ParameterSet::all_finite() const {
  for (auto t : tensors()) {
    for (double v : t) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (auto t : tensors()) n += t.size();
  return n;
}

ParameterSet& ParameterSet::operator+=(const ParameterSet& other) {
  auto dst = tensors();
  auto src = other.tensors();
  for (std::size_t k = 0; k < kTensorCount; ++k) {
    for (std::size_t i = 0; i < dst[k].size(); ++i) dst[k][i] += src[k][i];
  }
  return *this;
}

ParameterSet& ParameterSet::operator*=(double scale) {
  for (auto t : tensors()) {
    for (double& v : t) v *= scale;
  }
  return *this;
}

void ParameterSet::set_zero() {
  for (auto t : tensors()) std::fill(t.begin(), t.end(), 0.0);
}

double ParameterSet::squared_norm() const {
  double s = 0.0;
  for (auto t : tensors()) {
    for (double v : t) s += v * v;
  }
  return s;
}

ParameterSet init_params(int input_dim, int hidden_dim, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1) throw UsageError("init_params: dimensions must be >= 1");
  ParameterSet p = ParameterSet::zeros(input_dim, hidden_dim);
  CounterRng rng(seed);
  auto fill = [&rng](auto& tensor, double bound) {
    for (Eigen::Index i = 0; i < tensor.size(); ++i) tensor.data()[i] = rng.uniform_symmetric(bound);
  };
  const double input_bound = std::sqrt(6.0 / (input_dim + hidden_dim));
  const double recurrent_bound = std::sqrt(6.0 / (2.0 * hidden_dim));
  for (Matrix* m : {&p.w_input, &p.w_forget, &p.w_cell, &p.w_output}) fill(*m, input_bound);
  for (Matrix* m : {&p.u_input, &p.u_forget, &p.u_cell, &p.u_output}) fill(*m, recurrent_bound);
  fill(p.dense_weights, std::sqrt(6.0 / (hidden_dim + 1.0)));
  p.b_forget.setOnes();
  return p;
}

ModelParameters init_model(PerformanceGroup group, int hidden_dim, std::uint64_t seed) {
  const int features = metric_count(group);
  return {group, init_params(features, hidden_dim, seed), Normalizer::identity(features)};
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce_loss(double p, double y) {
  const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double bce_loss(double p, Label y) { return bce_loss(p, label_value(y)); }

namespace {

void check_inputs(const ParameterSet& params, const Matrix& inputs) {
  if (inputs.cols() != params.input_dim()) {
    throw UsageError("input has " + std::to_string(inputs.cols()) + " features, model expects " +
                     std::to_string(params.input_dim()));
  }
  if (inputs.rows() < 1) throw UsageError("empty input sequence");
}

/// Per-timestep activations retained for the backward pass.
struct ForwardCache {
  Matrix input_gate, forget_gate, output_gate, candidate;  // T x H, post-activation
  Matrix cell, cell_tanh, hidden;                          // T x H
};

void run_lstm(const ParameterSet& p, const Matrix& x, ForwardCache& c) {
  const Eigen::Index steps = x.rows();
  const Eigen::Index hidden = p.hidden_dim();
  // Input projections for every step at once: T x H.
  c.input_gate.noalias() = x * p.w_input.transpose();
  c.forget_gate.noalias() = x * p.w_forget.transpose();
  c.output_gate.noalias() = x * p.w_output.transpose();
  c.candidate.noalias() = x * p.w_cell.transpose();
  c.cell.resize(steps, hidden);
  c.cell_tanh.resize(steps, hidden);
  c.hidden.resize(steps, hidden);

  Vector h_prev = Vector::Zero(hidden);
  Vector c_prev = Vector::Zero(hidden);
  Vector zi(hidden), zf(hidden), zo(hidden), zg(hidden);
  for (Eigen::Index t = 0; t < steps; ++t) {
    zi.noalias() = c.input_gate.row(t).transpose() + p.b_input;
    zf.noalias() = c.forget_gate.row(t).transpose() + p.b_forget;
    zo.noalias() = c.output_gate.row(t).transpose() + p.b_output;
    zg.noalias() = c.candidate.row(t).transpose() + p.b_cell;
    zi.noalias() += p.u_input * h_prev;
    zf.noalias() += p.u_forget * h_prev;
    zo.noalias() += p.u_output * h_prev;
    zg.noalias() += p.u_cell * h_prev;
    for (Eigen::Index j = 0; j < hidden; ++j) {
      const double i = sigmoid(zi[j]);
      const double f = sigmoid(zf[j]);
      const double o = sigmoid(zo[j]);
      const double g = std::tanh(zg[j]);
      const double cell = f * c_prev[j] + i * g;
      const double ct = std::tanh(cell);
      c.input_gate(t, j) = i;
      c.forget_gate(t, j) = f;
      c.output_gate(t, j) = o;
      c.candidate(t, j) = g;
      c.cell(t, j) = cell;
      c.cell_tanh(t, j) = ct;
      c.hidden(t, j) = o * ct;
      c_prev[j] = cell;
      h_prev[j] = o * ct;
    }
  }
}

double head(const ParameterSet& p, const Matrix& hidden, Vector& pooled) {
  pooled = gap_forward(hidden);
  return p.dense_weights.dot(pooled) + p.dense_bias[0];
}

}  // namespace

HiddenSequence lstm_forward(const ParameterSet& params, const Matrix& inputs) {
  check_inputs(params, inputs);
  ForwardCache cache;
  run_lstm(params, inputs, cache);
  return {std::move(cache.hidden), std::move(cache.cell)};
}

Vector gap_forward(const Matrix& hidden) {
  if (hidden.rows() < 1) throw UsageError("gap_forward: empty sequence");
  Vector out = Vector::Zero(hidden.cols());
  for (Eigen::Index t = 0; t < hidden.rows(); ++t) out += hidden.row(t).transpose();
  return out / static_cast<double>(hidden.rows());
}

Vector gap_forward(const HiddenSequence& hs) { return gap_forward(hs.hidden); }

double dense_sigmoid_forward(const ParameterSet& params, const Vector& pooled) {
  return sigmoid(params.dense_weights.dot(pooled) + params.dense_bias[0]);
}

double forward_normalized(const ParameterSet& params, const Matrix& inputs) {
  check_inputs(params, inputs);
  thread_local ForwardCache cache;
  run_lstm(params, inputs, cache);
  Vector pooled;
  return sigmoid(head(params, cache.hidden, pooled));
}

double model_forward(const ModelParameters& model, const TraceSeries& trace) {
  return forward_normalized(model.weights, apply_normalizer(model.normalizer, trace.values));
}

double backward_normalized(const ParameterSet& p, const Matrix& x, double target, Gradients& g,
                           double* probability) {
  check_inputs(p, x);
  thread_local ForwardCache c;
  run_lstm(p, x, c);
  Vector pooled;
  const double prob = sigmoid(head(p, c.hidden, pooled));
  if (probability) *probability = prob;
  const double loss = bce_loss(prob, target);

  if (!g.same_shape(p)) g = ParameterSet::zeros(p.input_dim(), p.hidden_dim());
  g.set_zero();

  // d loss / d logit. Zero where the probability clamp is active.
  const bool clamped = prob < kProbabilityClamp || prob > 1.0 - kProbabilityClamp;
  const double dlogit = clamped ? 0.0 : prob - target;
  g.dense_bias[0] = dlogit;
  g.dense_weights = dlogit * pooled;

  const Eigen::Index steps = x.rows();
  const Eigen::Index hidden = p.hidden_dim();
  // GAP spreads the pooled gradient evenly over every step's hidden state.
  const Vector dh_pool = (dlogit / static_cast<double>(steps)) * p.dense_weights;

  Vector dh_next = Vector::Zero(hidden);
  Vector dc_next = Vector::Zero(hidden);
  Vector dai(hidden), daf(hidden), dao(hidden), dag(hidden);
  Vector h_prev(hidden);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    for (Eigen::Index j = 0; j < hidden; ++j) {
      const double i = c.input_gate(t, j);
      const double f = c.forget_gate(t, j);
      const double o = c.output_gate(t, j);
      const double gg = c.candidate(t, j);
      const double ct = c.cell_tanh(t, j);
      const double c_prev = t > 0 ? c.cell(t - 1, j) : 0.0;
      const double dh = dh_pool[j] + dh_next[j];
      const double dc = dh * o * (1.0 - ct * ct) + dc_next[j];
      dao[j] = dh * ct * o * (1.0 - o);
      dai[j] = dc * gg * i * (1.0 - i);
      daf[j] = dc * c_prev * f * (1.0 - f);
      dag[j] = dc * i * (1.0 - gg * gg);
      dc_next[j] = dc * f;
    }
    const auto x_t = x.row(t);
    g.w_input.noalias() += dai * x_t;
    g.w_forget.noalias() += daf * x_t;
    g.w_output.noalias() += dao * x_t;
    g.w_cell.noalias() += dag * x_t;
    g.b_input += dai;
    g.b_forget += daf;
    g.b_output += dao;
    g.b_cell += dag;
    if (t > 0) {
      h_prev = c.hidden.row(t - 1).transpose();
      g.u_input.noalias() += dai * h_prev.transpose();
      g.u_forget.noalias() += daf * h_prev.transpose();
      g.u_output.noalias() += dao * h_prev.transpose();
      g.u_cell.noalias() += dag * h_prev.transpose();
      dh_next.noalias() = p.u_input.transpose() * dai;
      dh_next.noalias() += p.u_forget.transpose() * daf;
      dh_next.noalias() += p.u_output.transpose() * dao;
      dh_next.noalias() += p.u_cell.transpose() * dag;
    }
  }
  return loss;
}

LossAndGradients model_backward(const ModelParameters& model, const TraceSeries& trace, Label y) {
  LossAndGradients out;
  const Matrix x = apply_normalizer(model.normalizer, trace.values);
  out.loss = backward_normalized(model.weights, x, label_value(y), out.gradients, &out.probability);
  return out;
}

double gradient_check(const ModelParameters& model, const TraceSeries& trace, Label y, double eps) {
  if (!(eps > 0.0)) throw UsageError("gradient_check: eps must be positive");
  const Matrix x = apply_normalizer(model.normalizer, trace.values);
  const double target = label_value(y);
  Gradients analytic;
  backward_normalized(model.weights, x, target, analytic);

  ParameterSet probe = model.weights;
  auto probe_tensors = probe.tensors();
  const auto analytic_tensors = std::as_const(analytic).tensors();
  double worst = 0.0;
  for (std::size_t k = 0; k < ParameterSet::kTensorCount; ++k) {
    for (std::size_t i = 0; i < probe_tensors[k].size(); ++i) {
      double& w = probe_tensors[k][i];
      const double saved = w;
      w = saved + eps;
      const double plus = bce_loss(forward_normalized(probe, x), target);
      w = saved - eps;
      const double minus = bce_loss(forward_normalized(probe, x), target);
      w = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic_tensors[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace hpcdetect
