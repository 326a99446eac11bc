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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hpcdetect/errors.hpp"
#include "hpcdetect/metrics.hpp"
#include "hpcdetect/random.hpp"
#include "hpcdetect/report.hpp"
#include "hpcdetect/rnn.hpp"
#include "hpcdetect/synth.hpp"
#include "hpcdetect/trace.hpp"
#include "hpcdetect/train.hpp"

namespace fs = std::filesystem;
using namespace hpcdetect;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kDivergence = 4 };

std::string format(const char* spec, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, value);
  return buf;
}

std::string rate_text(const std::optional<double>& r) { return r ? format("%.4f", *r) : "NA"; }

PerformanceGroup require_group(const std::string& name) {
  auto g = parse_group(name);
  if (!g) throw UsageError("unknown performance group '" + name + "'");
  return *g;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw DataError("cannot write " + path.string());
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

void print_rates(const ConfusionCounts& counts) {
  const RateSummary r = rates(counts);
  std::cout << "accuracy: " << format("%.2f%%", 100.0 * r.accuracy) << "\n"
            << "tp=" << counts.tp << " tn=" << counts.tn << " fp=" << counts.fp << " fn=" << counts.fn << "\n"
            << "fn_rate: " << rate_text(r.fn_rate) << "\n"
            << "fp_rate: " << rate_text(r.fp_rate) << "\n";
}

// --- synth -------------------------------------------------------------------

struct SynthArgs {
  std::string group;
  double separation = 4.0;
  int n_per_class = 50;
  std::uint64_t seed = 0;
  std::string preset = "default";
  std::string out;
};

int run_synth(const SynthArgs& a) {
  const PerformanceGroup group = require_group(a.group);
  const ProfilePair p = a.preset == "degenerate" ? degenerate_profiles(group) : default_profiles(group, a.separation);
  const LabeledDataset ds = generate_corpus({group, p.benign, p.ransomware, a.n_per_class, a.seed});
  write_file(a.out, write_trace_csv(ds));
  std::cout << ds.size() << " traces written to " << a.out << "\n";
  return kOk;
}

// --- validate ----------------------------------------------------------------

int run_validate(const std::string& data) {
  const LabeledDataset ds = load_trace_csv(data);
  std::cout << "ok: " << ds.size() << " traces, group " << group_name(ds.group()) << ", "
            << ds.count(Label::kBenign) << " benign, " << ds.count(Label::kRansomware) << " ransomware\n";
  return kOk;
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
  std::string data, config, out, history;
};

int run_train(const TrainArgs& a) {
  const TrainConfig config = load_train_config(a.config);
  const LabeledDataset ds = load_trace_csv(a.data);
  TrainedModel trained;
  const TrialResult result = run_trial(ds, config, &trained);
  save_model(trained.model, a.out);
  const std::string history = a.history.empty() ? a.out + ".history.csv" : a.history;
  write_file(history, history_csv(trained.history));
  std::cout << "group: " << group_name(ds.group()) << "\n"
            << "optimizer: " << optimizer_name(config.optimizer.kind) << "\n"
            << "best epoch: " << trained.best_epoch << "\n"
            << "test traces: " << result.counts.total() << "\n";
  print_rates(result.counts);
  return kOk;
}

// --- grid --------------------------------------------------------------------

struct GridArgs {
  std::string data_dir, synthetic, out;
  std::string groups, optimizers = "Adadelta,Adamax,RMSprop,SGD", fractions = "0.7,0.8,0.9";
  int trials = 50;
  std::uint64_t seed = 0;
  int epochs = 1000, batch_size = 16, hidden_dim = kDefaultHiddenDim, jobs = 1;
};

struct SyntheticSpec {
  double separation = 4.0;
  int n_per_class = 50;
  bool degenerate = false;
};

SyntheticSpec parse_synthetic(const std::string& text) {
  SyntheticSpec s;
  for (const std::string& item : split_list(text)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--synthetic: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    try {
      if (key == "separation") {
        s.separation = std::stod(value);
      } else if (key == "n_per_class") {
        s.n_per_class = std::stoi(value);
      } else if (key == "preset") {
        if (value != "default" && value != "degenerate") throw UsageError("--synthetic: unknown preset '" + value + "'");
        s.degenerate = value == "degenerate";
      } else {
        throw UsageError("--synthetic: unknown key '" + key + "'");
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const UsageError*>(&e)) throw;
      throw UsageError("--synthetic: bad value for '" + key + "'");
    }
  }
  return s;
}

std::string fraction_tag(double fraction) { return std::to_string(static_cast<int>(std::lround(fraction * 100))); }

int run_grid_cmd(const GridArgs& a) {
  if (a.data_dir.empty() == a.synthetic.empty()) throw UsageError("grid: pass exactly one of --data-dir or --synthetic");

  GridSpec spec;
  for (const auto& name : split_list(a.groups)) spec.groups.push_back(require_group(name));
  if (spec.groups.empty()) spec.groups.assign(all_groups().begin(), all_groups().end());
  for (const auto& name : split_list(a.optimizers)) {
    auto kind = parse_optimizer(name);
    if (!kind) throw UsageError("unknown optimizer '" + name + "'");
    spec.optimizers.push_back(*kind);
  }
  for (const auto& text : split_list(a.fractions)) {
    double f = 0.0;
    try {
      f = std::stod(text);
    } catch (const std::exception&) {
      throw UsageError("bad fraction '" + text + "'");
    }
    if (!(f > 0.0 && f < 1.0)) throw UsageError("fraction must lie in (0, 1): " + text);
    spec.fractions.push_back(f);
  }
  if (spec.optimizers.empty() || spec.fractions.empty()) throw UsageError("grid: empty optimizer or fraction list");
  spec.n_trials = a.trials;
  spec.master_seed = a.seed;
  spec.base.epochs = a.epochs;
  spec.base.batch_size = a.batch_size;
  spec.base.hidden_dim = a.hidden_dim;
  spec.base.n_trials = a.trials;
  spec.base.validate();
  spec.jobs = a.jobs;

  if (!a.synthetic.empty()) {
    const SyntheticSpec s = parse_synthetic(a.synthetic);
    const std::uint64_t master = a.seed;
    spec.datasets = [s, master](PerformanceGroup g) {
      const ProfilePair p = s.degenerate ? degenerate_profiles(g) : default_profiles(g, s.separation);
      const std::uint64_t seed = derive_seed(master, 0x5EED00 + static_cast<std::uint64_t>(g));
      return generate_corpus({g, p.benign, p.ransomware, s.n_per_class, seed});
    };
  } else {
    const fs::path dir = a.data_dir;
    spec.datasets = [dir](PerformanceGroup g) {
      LabeledDataset ds = load_trace_csv((dir / (std::string(group_name(g)) + ".csv")).string());
      if (ds.group() != g) throw DataError("file holds group " + std::string(group_name(ds.group())));
      return ds;
    };
  }

  const GridReport report = run_grid(spec);

  std::string failures;
  std::size_t resolved = 0;
  for (const GridCell& c : report.cells) {
    if (c.n_trials > 0) ++resolved;
    for (const auto& f : c.failures) {
      failures += std::string(group_name(c.group)) + "," + std::string(optimizer_name(c.optimizer)) + "," +
                  format("%.2f", c.train_fraction) + ": " + f + "\n";
    }
  }

  fs::create_directories(a.out);
  const fs::path out = a.out;
  for (double f : spec.fractions) {
    const std::string tag = fraction_tag(f);
    write_file(out / ("accuracy_" + tag + ".txt"), render_accuracy_table(report, f, ReportFormat::kText));
    write_file(out / ("accuracy_" + tag + ".csv"), render_accuracy_table(report, f, ReportFormat::kCsv));
    for (OptimizerKind k : spec.optimizers) {
      const std::string stem = "statistics_" + std::string(optimizer_name(k)) + "_" + tag;
      write_file(out / (stem + ".txt"), render_statistics_table(report, k, f, ReportFormat::kText));
      write_file(out / (stem + ".csv"), render_statistics_table(report, k, f, ReportFormat::kCsv));
    }
  }
  write_file(out / "failures.log", failures);

  std::cout << render_report(report, ReportFormat::kText);
  if (!failures.empty()) std::cerr << "some trials failed; see " << (out / "failures.log").string() << "\n";
  if (resolved == 0) throw DataError("grid: no cell produced a successful trial");
  return kOk;
}

// --- eval / detect -----------------------------------------------------------

int run_eval(const std::string& model_path, const std::string& data, double threshold) {
  const ModelParameters model = load_model(model_path);
  const LabeledDataset ds = load_trace_csv(data);
  if (ds.group() != model.group) {
    throw DataError("model group " + std::string(group_name(model.group)) + " does not match data group " +
                    std::string(group_name(ds.group())));
  }
  std::cout << "traces: " << ds.size() << "\n";
  print_rates(confusion(model, ds, threshold));
  return kOk;
}

int run_detect(const std::string& model_path, const std::string& trace_path, double threshold) {
  const ModelParameters model = load_model(model_path);
  std::ifstream in(trace_path);
  if (!in) throw DataError("cannot open " + trace_path);
  const auto traces = parse_trace_rows(in, false);
  for (const ParsedTrace& p : traces) {
    if (p.trace.group != model.group) {
      throw DataError("trace " + p.trace.trace_id + " is group " + std::string(group_name(p.trace.group)) +
                      " but the model expects " + std::string(group_name(model.group)));
    }
  }
  for (const ParsedTrace& p : traces) {
    const Verdict v = classify(model, p.trace, threshold);
    std::cout << p.trace.trace_id << "," << format("%.6f", v.score) << "," << label_name(v.label)
              << ",samples_used=" << p.trace.values.rows() << "\n";
  }
  return kOk;
}

// --- gradcheck ---------------------------------------------------------------

int run_gradcheck(std::uint64_t seed, const std::string& dims, double eps) {
  int f = 0, h = 0;
  char x = 0, extra = 0;
  if (std::sscanf(dims.c_str(), "%d%c%d%c", &f, &x, &h, &extra) != 3 || x != 'x') {
    throw UsageError("--dims must look like FxH, got '" + dims + "'");
  }
  if (f < 1 || h < 1 || f > 8 || h > 8) throw UsageError("--dims: F and H must lie in [1, 8]");

  ModelParameters model{PerformanceGroup::kClock, init_params(f, h, seed), Normalizer::identity(f)};
  CounterRng rng(derive_seed(seed, 0x6C));
  Matrix values(kWindowLength, f);
  for (Eigen::Index i = 0; i < values.size(); ++i) values.data()[i] = rng.normal();
  const TraceSeries trace = TraceSeries::on_grid("gradcheck", PerformanceGroup::kClock, std::move(values));
  const Label y = rng.uniform01() < 0.5 ? Label::kBenign : Label::kRansomware;

  const double err = gradient_check(model, trace, y, eps);
  const bool pass = err < 1e-4;
  std::cout << (pass ? "PASS" : "FAIL") << " dims=" << f << "x" << h << " max_rel_error=" << format("%.6e", err)
            << "\n";
  return pass ? kOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ransomware detection from hardware performance counter traces"};
  app.require_subcommand(1, 1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled trace corpus");
  synth_cmd->add_option("--group", synth.group, "Performance group, e.g. TLB_DATA")->required();
  synth_cmd->add_option("--separation", synth.separation, "Ransomware mean offset per feature")->capture_default_str();
  synth_cmd->add_option("--n-per-class", synth.n_per_class, "Traces per class")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--preset", synth.preset, "Profile preset")
      ->check(CLI::IsMember({"default", "degenerate"}))
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output CSV path")->required();

  std::string validate_data;
  auto* validate_cmd = app.add_subcommand("validate", "Check a labeled trace CSV");
  validate_cmd->add_option("--data", validate_data, "Trace CSV")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Split, train and score one model");
  train_cmd->add_option("--data", train.data, "Labeled trace CSV")->required();
  train_cmd->add_option("--config", train.config, "Training config (key = value)")->required();
  train_cmd->add_option("--out", train.out, "Model JSON output path")->required();
  train_cmd->add_option("--history", train.history, "Loss history CSV (default <out>.history.csv)");

  GridArgs grid;
  auto* grid_cmd = app.add_subcommand("grid", "Run the group x optimizer x fraction grid");
  auto* data_dir_opt = grid_cmd->add_option("--data-dir", grid.data_dir, "Directory holding <GROUP>.csv files");
  auto* synthetic_opt = grid_cmd->add_option(
      "--synthetic", grid.synthetic, "Synthetic corpora, e.g. separation=4,n_per_class=50[,preset=degenerate]");
  data_dir_opt->excludes(synthetic_opt);
  grid_cmd->add_option("--groups", grid.groups, "Comma-separated groups (default all)");
  grid_cmd->add_option("--optimizers", grid.optimizers, "Comma-separated optimizers")->capture_default_str();
  grid_cmd->add_option("--fractions", grid.fractions, "Comma-separated training fractions")->capture_default_str();
  grid_cmd->add_option("--trials", grid.trials, "Trials per cell")->check(CLI::PositiveNumber)->capture_default_str();
  grid_cmd->add_option("--seed", grid.seed, "Master seed")->capture_default_str();
  grid_cmd->add_option("--epochs", grid.epochs, "Epochs per trial")->capture_default_str();
  grid_cmd->add_option("--batch-size", grid.batch_size, "Mini-batch size")->capture_default_str();
  grid_cmd->add_option("--hidden-dim", grid.hidden_dim, "LSTM hidden units")->capture_default_str();
  grid_cmd->add_option("--jobs", grid.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  grid_cmd->add_option("--out", grid.out, "Report directory")->required();

  std::string eval_model, eval_data;
  double eval_threshold = kDefaultThreshold;
  auto* eval_cmd = app.add_subcommand("eval", "Score a saved model on a labeled trace CSV");
  eval_cmd->add_option("--model", eval_model, "Model JSON")->required();
  eval_cmd->add_option("--data", eval_data, "Labeled trace CSV")->required();
  eval_cmd->add_option("--threshold", eval_threshold, "Decision threshold")->capture_default_str();

  std::string detect_model, detect_trace;
  double detect_threshold = kDefaultThreshold;
  auto* detect_cmd = app.add_subcommand("detect", "Classify stored traces from their first 20 samples");
  detect_cmd->add_option("--model", detect_model, "Model JSON")->required();
  detect_cmd->add_option("--trace", detect_trace, "Trace CSV (label column may be blank)")->required();
  detect_cmd->add_option("--threshold", detect_threshold, "Decision threshold")->capture_default_str();

  std::uint64_t gc_seed = 0;
  std::string gc_dims = "3x4";
  double gc_eps = 1e-5;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  gc_cmd->add_option("--seed", gc_seed, "Random seed")->capture_default_str();
  gc_cmd->add_option("--dims", gc_dims, "Input and hidden sizes as FxH, each at most 8")->capture_default_str();
  gc_cmd->add_option("--eps", gc_eps, "Finite-difference step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*validate_cmd) return run_validate(validate_data);
    if (*train_cmd) return run_train(train);
    if (*grid_cmd) return run_grid_cmd(grid);
    if (*eval_cmd) return run_eval(eval_model, eval_data, eval_threshold);
    if (*detect_cmd) return run_detect(detect_model, detect_trace, detect_threshold);
    if (*gc_cmd) return run_gradcheck(gc_seed, gc_dims, gc_eps);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged at epoch " << e.epoch() << ": " << e.what() << "\n";
    return kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
