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
#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "hpcdetect/metrics.hpp"
#include "hpcdetect/optimizer.hpp"

namespace hpcdetect {

struct TrainConfig {
  int epochs = 1000;
  int batch_size = 16;
  OptimizerConfig optimizer = OptimizerConfig::defaults(OptimizerKind::kAdadelta);
  int hidden_dim = kDefaultHiddenDim;
  std::uint64_t seed = 0;
  double train_fraction = 0.70;
  int n_trials = 50;
  /// Global gradient-norm clip; 0 disables clipping.
  double clip_norm = 0.0;
  double threshold = kDefaultThreshold;

  /// Throws UsageError naming the offending field.
  void validate() const;
};

/// Reads `key = value` lines ('#' starts a comment). Required keys: optimizer,
/// epochs, train_fraction, seed. Optimizer hyperparameters default to the
/// chosen kind's published values.
TrainConfig parse_train_config(std::istream& in);
TrainConfig load_train_config(const std::string& path);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainedModel {
  ModelParameters model;  // parameters with the lowest validation loss
  std::vector<EpochRecord> history;
  double initial_val_loss = 0.0;
  int best_epoch = 0;
  std::int64_t optimizer_steps = 0;
};

/// Fits the normalizer on `fit`, initializes from config.seed and trains for
/// config.epochs epochs, keeping the best-validation-loss parameters.
/// Throws DivergenceError when a loss becomes non-finite.
TrainedModel train_model(const LabeledDataset& fit, const LabeledDataset& val, const TrainConfig& config);

std::string history_csv(const std::vector<EpochRecord>& history);

struct TrialResult {
  PerformanceGroup group = PerformanceGroup::kClock;
  OptimizerKind optimizer = OptimizerKind::kAdadelta;
  double train_fraction = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  ConfusionCounts counts;
  int best_epoch = 0;
  std::vector<std::string> fit_ids, val_ids, test_ids;
};

/// Split, carve, train and score on the held-out test set, all seeded from
/// config.seed.
TrialResult run_trial(const LabeledDataset& dataset, const TrainConfig& config);

/// Like run_trial but also returns the trained model.
TrialResult run_trial(const LabeledDataset& dataset, const TrainConfig& config, TrainedModel* trained);

struct GridCell {
  PerformanceGroup group = PerformanceGroup::kClock;
  OptimizerKind optimizer = OptimizerKind::kAdadelta;
  double train_fraction = 0.0;
  int n_trials = 0;  // successful trials
  double mean_accuracy = 0.0;
  double tp_pct = 0.0, tn_pct = 0.0, fp_pct = 0.0, fn_pct = 0.0;
  std::vector<std::string> failures;
};

struct GridReport {
  std::vector<PerformanceGroup> groups;
  std::vector<OptimizerKind> optimizers;
  std::vector<double> fractions;
  std::vector<GridCell> cells;  // group-major, then optimizer, then fraction

  const GridCell& cell(PerformanceGroup group, OptimizerKind kind, double fraction) const;
  bool empty() const { return cells.empty(); }
};

using DatasetSource = std::function<LabeledDataset(PerformanceGroup)>;

struct GridSpec {
  std::vector<PerformanceGroup> groups;
  std::vector<OptimizerKind> optimizers;
  std::vector<double> fractions;
  int n_trials = 50;
  std::uint64_t master_seed = 0;
  /// epochs, batch_size, hidden_dim, clip_norm and threshold are taken from
  /// here; optimizer hyperparameters use each kind's defaults.
  TrainConfig base;
  DatasetSource datasets;
  int jobs = 1;
};

/// Trial seed for one grid coordinate: mix64(mix64(master) + key) where key
/// packs (trial << 17 | permille << 7 | group << 2 | kind). Injective for a
/// fixed master seed because mix64 is a bijection and the key packing is.
std::uint64_t trial_seed(std::uint64_t master_seed, PerformanceGroup group, OptimizerKind kind,
                         double fraction, int trial);

GridReport run_grid(const GridSpec& spec);

/// Aggregates finished trials into a cell (arithmetic means).
GridCell aggregate_trials(PerformanceGroup group, OptimizerKind kind, double fraction,
                          const std::vector<TrialResult>& trials);

}  // namespace hpcdetect
