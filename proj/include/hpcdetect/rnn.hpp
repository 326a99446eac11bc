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
#include <span>
#include <string>
#include <string_view>

#include "hpcdetect/trace.hpp"

namespace hpcdetect {

inline constexpr int kDefaultHiddenDim = 32;

/// Trainable tensors of the LSTM -> GAP -> dense-sigmoid classifier. The same
/// layout doubles as the gradient container and as optimizer accumulators.
struct ParameterSet {
  // Input kernels, H x F.
  Matrix w_input, w_forget, w_cell, w_output;
  // Recurrent kernels, H x H.
  Matrix u_input, u_forget, u_cell, u_output;
  // Gate biases, H.
  Vector b_input, b_forget, b_cell, b_output;
  // Dense head.
  Vector dense_weights;
  Vector dense_bias;  // size 1

  static constexpr std::size_t kTensorCount = 14;
  static const std::array<std::string_view, kTensorCount>& tensor_names();

  /// Zero-filled set with the given dimensions.
  static ParameterSet zeros(int input_dim, int hidden_dim);

  int input_dim() const { return static_cast<int>(w_input.cols()); }
  int hidden_dim() const { return static_cast<int>(w_input.rows()); }

  std::array<std::span<double>, kTensorCount> tensors();
  std::array<std::span<const double>, kTensorCount> tensors() const;

  bool same_shape(const ParameterSet& other) const;
  bool all_finite() const;
  std::size_t scalar_count() const;

  ParameterSet& operator+=(const ParameterSet& other);
  ParameterSet& operator*=(double scale);
  void set_zero();
  double squared_norm() const;
};

using Gradients = ParameterSet;

/// Full model: weights plus the normalization fitted on the training subset.
struct ModelParameters {
  PerformanceGroup group = PerformanceGroup::kClock;
  ParameterSet weights;
  Normalizer normalizer;

  int input_dim() const { return weights.input_dim(); }
  int hidden_dim() const { return weights.hidden_dim(); }
};

/// Glorot-uniform kernels, zero biases except the forget gate (1.0).
ParameterSet init_params(int input_dim, int hidden_dim, std::uint64_t seed);

/// Convenience: init_params plus group and an identity normalizer.
ModelParameters init_model(PerformanceGroup group, int hidden_dim, std::uint64_t seed);

struct HiddenSequence {
  Matrix hidden;  // T x H
  Matrix cell;    // T x H
};

HiddenSequence lstm_forward(const ParameterSet& params, const Matrix& inputs);
Vector gap_forward(const HiddenSequence& hs);
Vector gap_forward(const Matrix& hidden);
double dense_sigmoid_forward(const ParameterSet& params, const Vector& pooled);

double sigmoid(double x);
inline constexpr double kProbabilityClamp = 1e-12;
double bce_loss(double p, Label y);
double bce_loss(double p, double y);

/// Probability of the ransomware class on already-normalized inputs.
double forward_normalized(const ParameterSet& params, const Matrix& inputs);
/// Normalizes the trace with the attached normalizer, then runs the network.
double model_forward(const ModelParameters& model, const TraceSeries& trace);

struct LossAndGradients {
  double loss = 0.0;
  double probability = 0.0;
  Gradients gradients;
};

/// Exact BPTT over normalized inputs. `grads` is overwritten.
double backward_normalized(const ParameterSet& params, const Matrix& inputs, double target,
                           Gradients& grads, double* probability = nullptr);

LossAndGradients model_backward(const ModelParameters& model, const TraceSeries& trace, Label y);

/// Largest relative discrepancy between analytic and central-difference
/// gradients over every trainable scalar:
/// |a - b| / max(|a|, |b|, 1e-8).
double gradient_check(const ModelParameters& model, const TraceSeries& trace, Label y, double eps);

// --- Model file --------------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const ModelParameters& model);
ModelParameters deserialize_model(std::string_view text);
void save_model(const ModelParameters& model, const std::string& path);
ModelParameters load_model(const std::string& path);

}  // namespace hpcdetect
