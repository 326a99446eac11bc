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

#include "hpcdetect/train.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "hpcdetect/errors.hpp"
#include "hpcdetect/random.hpp"

namespace hpcdetect {
namespace {

enum SeedTag : std::uint64_t { kInitTag = 1, kShuffleTag = 2, kSplitTag = 3, kCarveTag = 4 };

struct PreparedSet {
  std::vector<Matrix> inputs;
  std::vector<double> targets;
};

PreparedSet prepare(const LabeledDataset& set, const Normalizer& norm) {
  PreparedSet out;
  out.inputs.reserve(set.size());
  out.targets.reserve(set.size());
  for (const auto& e : set.entries()) {
    out.inputs.push_back(apply_normalizer(norm, e.trace.values));
    out.targets.push_back(label_value(e.label));
  }
  return out;
}

double mean_loss(const ParameterSet& params, const PreparedSet& set) {
  double total = 0.0;
  for (std::size_t i = 0; i < set.inputs.size(); ++i) {
    total += bce_loss(forward_normalized(params, set.inputs[i]), set.targets[i]);
  }
  return total / static_cast<double>(set.inputs.size());
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (hidden_dim < 1) throw UsageError("hidden_dim must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw UsageError("train_fraction must lie in (0, 1)");
  if (n_trials < 1) throw UsageError("n_trials must be >= 1");
  if (!(clip_norm >= 0.0)) throw UsageError("clip_norm must be >= 0");
  if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold must lie in (0, 1)");
  if (!(optimizer.learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
  if (!(optimizer.epsilon > 0.0)) throw UsageError("epsilon must be positive");
  if (!(optimizer.rho >= 0.0 && optimizer.rho < 1.0)) throw UsageError("rho must lie in [0, 1)");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0)) throw UsageError("beta1 must lie in [0, 1)");
  if (!(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) throw UsageError("beta2 must lie in [0, 1)");
}

TrainConfig parse_train_config(std::istream& in) {
  std::map<std::string, std::pair<std::string, int>> entries;
  static const std::set<std::string> known = {
      "epochs", "batch_size", "optimizer", "learning_rate", "rho",      "beta1",     "beta2",
      "epsilon", "hidden_dim", "seed",     "train_fraction", "n_trials", "clip_norm", "threshold"};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!known.count(key)) {
      throw DataError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!entries.emplace(key, std::make_pair(value, line_no)).second) {
      throw DataError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  for (const char* required : {"optimizer", "epochs", "train_fraction", "seed"}) {
    if (!entries.count(required)) {
      throw DataError(std::string("config: missing required key '") + required + "'");
    }
  }

  auto bad = [&](const std::string& key) -> DataError {
    return DataError("config line " + std::to_string(entries.at(key).second) + ": invalid value '" +
                     entries.at(key).first + "' for '" + key + "'");
  };
  auto get_double = [&](const std::string& key, double& out) {
    auto it = entries.find(key);
    if (it == entries.end()) return;
    const std::string& s = it->second.first;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(out)) throw bad(key);
  };
  auto get_int = [&](const std::string& key, auto& out) {
    auto it = entries.find(key);
    if (it == entries.end()) return;
    const std::string& s = it->second.first;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw bad(key);
  };

  TrainConfig c;
  const auto kind = parse_optimizer(entries.at("optimizer").first);
  if (!kind) throw bad("optimizer");
  c.optimizer = OptimizerConfig::defaults(*kind);
  get_int("epochs", c.epochs);
  get_int("batch_size", c.batch_size);
  get_int("hidden_dim", c.hidden_dim);
  get_int("seed", c.seed);
  get_int("n_trials", c.n_trials);
  get_double("train_fraction", c.train_fraction);
  get_double("clip_norm", c.clip_norm);
  get_double("threshold", c.threshold);
  get_double("learning_rate", c.optimizer.learning_rate);
  get_double("rho", c.optimizer.rho);
  get_double("beta1", c.optimizer.beta1);
  get_double("beta2", c.optimizer.beta2);
  get_double("epsilon", c.optimizer.epsilon);
  try {
    c.validate();
  } catch (const UsageError& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path + "'");
  return parse_train_config(in);
}

TrainedModel train_model(const LabeledDataset& fit, const LabeledDataset& val, const TrainConfig& config) {
  config.validate();
  if (fit.empty() || val.empty()) throw UsageError("train_model: fit and validation sets must be non-empty");
  if (fit.group() != val.group()) throw UsageError("train_model: fit and validation groups differ");

  TrainedModel out;
  ModelParameters& model = out.model;
  model.group = fit.group();
  model.normalizer = fit_normalizer(fit);
  model.weights = init_params(metric_count(fit.group()), config.hidden_dim,
                              derive_seed(config.seed, kInitTag));

  const PreparedSet fit_set = prepare(fit, model.normalizer);
  const PreparedSet val_set = prepare(val, model.normalizer);

  ParameterSet params = model.weights;
  OptimizerState state = new_state(config.optimizer, params);
  CounterRng shuffle_rng(derive_seed(config.seed, kShuffleTag));
  std::vector<std::size_t> order(fit_set.inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Gradients batch_grad = ParameterSet::zeros(params.input_dim(), params.hidden_dim());
  Gradients sample_grad = batch_grad;

  out.initial_val_loss = mean_loss(params, val_set);
  double best_val = std::numeric_limits<double>::infinity();
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_in_place(order, shuffle_rng);
    double train_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      batch_grad.set_zero();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        train_total += backward_normalized(params, fit_set.inputs[idx], fit_set.targets[idx], sample_grad);
        batch_grad += sample_grad;
      }
      batch_grad *= 1.0 / static_cast<double>(end - start);
      if (!std::isfinite(train_total) || !batch_grad.all_finite()) {
        throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch));
      }
      if (config.clip_norm > 0.0) {
        const double norm = std::sqrt(batch_grad.squared_norm());
        if (norm > config.clip_norm) batch_grad *= config.clip_norm / norm;
      }
      step(state, params, batch_grad);
    }
    const double val_loss = mean_loss(params, val_set);
    if (!std::isfinite(val_loss)) {
      throw DivergenceError(epoch, "validation loss diverged at epoch " + std::to_string(epoch));
    }
    out.history.push_back({epoch, train_total / static_cast<double>(order.size()), val_loss});
    if (val_loss < best_val) {
      best_val = val_loss;
      out.best_epoch = epoch;
      model.weights = params;
    }
  }
  out.optimizer_steps = state.step_count;
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_loss\n";
  char buf[96];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss);
    out += buf;
  }
  return out;
}

TrialResult run_trial(const LabeledDataset& dataset, const TrainConfig& config, TrainedModel* trained) {
  config.validate();
  auto split = stratified_split(dataset, config.train_fraction, derive_seed(config.seed, kSplitTag));
  auto carve = validation_carve(split.first, derive_seed(config.seed, kCarveTag));
  const LabeledDataset& fit = carve.first;
  const LabeledDataset& val = carve.second;
  const LabeledDataset& test = split.second;

  TrainedModel model = train_model(fit, val, config);

  TrialResult r;
  r.group = dataset.group();
  r.optimizer = config.optimizer.kind;
  r.train_fraction = config.train_fraction;
  r.seed = config.seed;
  r.counts = confusion(model.model, test, config.threshold);
  r.accuracy = rates(r.counts).accuracy;
  r.best_epoch = model.best_epoch;
  for (const auto& e : fit.entries()) r.fit_ids.push_back(e.trace.trace_id);
  for (const auto& e : val.entries()) r.val_ids.push_back(e.trace.trace_id);
  for (const auto& e : test.entries()) r.test_ids.push_back(e.trace.trace_id);
  if (trained) *trained = std::move(model);
  return r;
}

TrialResult run_trial(const LabeledDataset& dataset, const TrainConfig& config) {
  return run_trial(dataset, config, nullptr);
}

const GridCell& GridReport::cell(PerformanceGroup group, OptimizerKind kind, double fraction) const {
  for (const auto& c : cells) {
    if (c.group == group && c.optimizer == kind && std::abs(c.train_fraction - fraction) < 1e-9) return c;
  }
  throw UsageError("grid report has no cell for " + std::string(group_name(group)) + "/" +
                   std::string(optimizer_name(kind)));
}

namespace {

std::uint64_t fraction_permille(double fraction) {
  return static_cast<std::uint64_t>(std::llround(fraction * 1000.0));
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, PerformanceGroup group, OptimizerKind kind,
                         double fraction, int trial) {
  const std::uint64_t key = (static_cast<std::uint64_t>(trial) << 17) | (fraction_permille(fraction) << 7) |
                            (static_cast<std::uint64_t>(group) << 2) | static_cast<std::uint64_t>(kind);
  return mix64(mix64(master_seed) + key);
}

GridCell aggregate_trials(PerformanceGroup group, OptimizerKind kind, double fraction,
                          const std::vector<TrialResult>& trials) {
  GridCell cell;
  cell.group = group;
  cell.optimizer = kind;
  cell.train_fraction = fraction;
  cell.n_trials = static_cast<int>(trials.size());
  if (trials.empty()) return cell;
  for (const auto& t : trials) {
    const RateSummary r = rates(t.counts);
    cell.mean_accuracy += t.accuracy;
    cell.tp_pct += r.tp_pct;
    cell.tn_pct += r.tn_pct;
    cell.fp_pct += r.fp_pct;
    cell.fn_pct += r.fn_pct;
  }
  const double n = static_cast<double>(trials.size());
  cell.mean_accuracy /= n;
  cell.tp_pct /= n;
  cell.tn_pct /= n;
  cell.fp_pct /= n;
  cell.fn_pct /= n;
  return cell;
}

GridReport run_grid(const GridSpec& spec) {
  if (spec.groups.empty() || spec.optimizers.empty() || spec.fractions.empty()) {
    throw UsageError("run_grid: groups, optimizers and fractions must be non-empty");
  }
  if (spec.n_trials < 1) throw UsageError("run_grid: n_trials must be >= 1");
  if (!spec.datasets) throw UsageError("run_grid: no dataset source");
  std::set<std::uint64_t> permilles;
  for (double f : spec.fractions) {
    if (!(f > 0.0 && f < 1.0)) throw UsageError("run_grid: fractions must lie in (0, 1)");
    if (!permilles.insert(fraction_permille(f)).second) {
      throw UsageError("run_grid: fractions must differ at 0.001 resolution");
    }
  }

  GridReport report;
  report.groups = spec.groups;
  report.optimizers = spec.optimizers;
  report.fractions = spec.fractions;

  // Load every group's data up front; a failed load fails that group's cells.
  std::vector<std::optional<LabeledDataset>> data(spec.groups.size());
  std::vector<std::string> load_errors(spec.groups.size());
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    try {
      data[g] = spec.datasets(spec.groups[g]);
    } catch (const std::exception& e) {
      load_errors[g] = e.what();
    }
  }

  struct Job {
    std::size_t cell;
    std::size_t group_index;
    int trial;
  };
  const std::size_t per_group = spec.optimizers.size() * spec.fractions.size();
  const std::size_t n_cells = spec.groups.size() * per_group;
  report.cells.resize(n_cells);
  std::vector<Job> jobs;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    for (std::size_t k = 0; k < spec.optimizers.size(); ++k) {
      for (std::size_t f = 0; f < spec.fractions.size(); ++f) {
        const std::size_t idx = g * per_group + k * spec.fractions.size() + f;
        if (!data[g]) continue;
        for (int t = 0; t < spec.n_trials; ++t) jobs.push_back({idx, g, t});
      }
    }
  }

  const auto cell_coords = [&](std::size_t idx) {
    const std::size_t g = idx / per_group;
    const std::size_t k = (idx % per_group) / spec.fractions.size();
    const std::size_t f = idx % spec.fractions.size();
    return std::make_tuple(spec.groups[g], spec.optimizers[k], spec.fractions[f]);
  };

  std::vector<std::optional<TrialResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      const auto [group, kind, fraction] = cell_coords(job.cell);
      TrainConfig cfg = spec.base;
      cfg.optimizer = OptimizerConfig::defaults(kind);
      cfg.train_fraction = fraction;
      cfg.seed = trial_seed(spec.master_seed, group, kind, fraction, job.trial);
      try {
        results[j] = run_trial(*data[job.group_index], cfg);
      } catch (const std::exception& e) {
        errors[j] = "trial " + std::to_string(job.trial) + ": " + e.what();
      }
    }
  };
  const int threads = std::max(1, spec.jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  // Aggregate in job order so the report never depends on completion order.
  std::vector<std::vector<TrialResult>> per_cell(n_cells);
  std::vector<std::vector<std::string>> cell_failures(n_cells);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (results[j]) {
      per_cell[jobs[j].cell].push_back(std::move(*results[j]));
    } else {
      cell_failures[jobs[j].cell].push_back(errors[j]);
    }
  }
  for (std::size_t idx = 0; idx < n_cells; ++idx) {
    const auto [group, kind, fraction] = cell_coords(idx);
    report.cells[idx] = aggregate_trials(group, kind, fraction, per_cell[idx]);
    report.cells[idx].failures = std::move(cell_failures[idx]);
    const std::size_t g = idx / per_group;
    if (!data[g]) report.cells[idx].failures.push_back("data: " + load_errors[g]);
  }
  return report;
}

}  // namespace hpcdetect
