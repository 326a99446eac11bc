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

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hpcdetect/errors.hpp"
#include "hpcdetect/metrics.hpp"
#include "hpcdetect/report.hpp"
#include "hpcdetect/rnn.hpp"
#include "hpcdetect/synth.hpp"
#include "hpcdetect/trace.hpp"
#include "hpcdetect/train.hpp"

namespace py = pybind11;
using namespace hpcdetect;

namespace {

PerformanceGroup to_group(const std::string& name) {
  auto g = parse_group(name);
  if (!g) throw UsageError("unknown performance group '" + name + "'");
  return *g;
}

OptimizerKind to_optimizer(const std::string& name) {
  auto k = parse_optimizer(name);
  if (!k) throw UsageError("unknown optimizer '" + name + "'");
  return *k;
}

Label to_label(const std::string& name) {
  auto l = parse_label(name);
  if (!l) throw UsageError("label must be 'benign' or 'ransomware'");
  return *l;
}

TraceSeries make_trace(PerformanceGroup group, const Matrix& values, std::string id = "trace") {
  if (values.rows() < kWindowLength) throw DataError("trace needs 20 samples");
  return TraceSeries::on_grid(std::move(id), group, values.topRows(kWindowLength));
}

py::dict rates_dict(const RateSummary& r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["fn_rate"] = r.fn_rate ? py::cast(*r.fn_rate) : py::none();
  d["fp_rate"] = r.fp_rate ? py::cast(*r.fp_rate) : py::none();
  d["tp_pct"] = r.tp_pct;
  d["tn_pct"] = r.tn_pct;
  d["fp_pct"] = r.fp_pct;
  d["fn_pct"] = r.fn_pct;
  return d;
}

LabeledDataset synth_corpus(const std::string& group, double separation, int n_per_class, std::uint64_t seed,
                            const std::string& preset) {
  const PerformanceGroup g = to_group(group);
  if (preset != "default" && preset != "degenerate") throw UsageError("preset must be 'default' or 'degenerate'");
  const ProfilePair p = preset == "degenerate" ? degenerate_profiles(g) : default_profiles(g, separation);
  return generate_corpus({g, p.benign, p.ransomware, n_per_class, seed});
}

}  // namespace

PYBIND11_MODULE(hpcdetect, m) {
  m.doc() = "LSTM ransomware detector over hardware performance counter traces";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  m.attr("WINDOW_LENGTH") = kWindowLength;

  m.def("groups", [] {
    std::vector<std::string> names;
    for (auto g : all_groups()) names.emplace_back(group_name(g));
    return names;
  });
  m.def("metric_names", [](const std::string& group) { return metric_names(to_group(group)); }, py::arg("group"));

  py::class_<LabeledDataset>(m, "Dataset")
      .def_property_readonly("group", [](const LabeledDataset& d) { return std::string(group_name(d.group())); })
      .def("__len__", &LabeledDataset::size)
      .def("count", [](const LabeledDataset& d, const std::string& label) { return d.count(to_label(label)); })
      .def_property_readonly("ids",
                             [](const LabeledDataset& d) {
                               std::vector<std::string> ids;
                               for (const auto& e : d.entries()) ids.push_back(e.trace.trace_id);
                               return ids;
                             })
      .def_property_readonly("labels",
                             [](const LabeledDataset& d) {
                               std::vector<std::string> labels;
                               for (const auto& e : d.entries()) labels.emplace_back(label_name(e.label));
                               return labels;
                             })
      .def("values", [](const LabeledDataset& d, std::size_t i) -> Matrix { return d.entries().at(i).trace.values; })
      .def("to_csv", &write_trace_csv);

  m.def("parse_csv", py::overload_cast<std::string_view>(&parse_trace_csv), py::arg("text"));
  m.def("load_csv", &load_trace_csv, py::arg("path"));
  m.def("generate_corpus", &synth_corpus, py::arg("group"), py::arg("separation") = 4.0, py::arg("n_per_class") = 50,
        py::arg("seed") = 0, py::arg("preset") = "default");

  py::class_<ModelParameters>(m, "Model")
      .def_property_readonly("group", [](const ModelParameters& p) { return std::string(group_name(p.group)); })
      .def_property_readonly("input_dim", &ModelParameters::input_dim)
      .def_property_readonly("hidden_dim", &ModelParameters::hidden_dim)
      .def_property_readonly("scalar_count", [](const ModelParameters& p) { return p.weights.scalar_count(); })
      .def("to_json", &serialize_model)
      .def_static("from_json", &deserialize_model, py::arg("text"))
      .def(
          "forward", [](const ModelParameters& p, const Matrix& values) { return model_forward(p, make_trace(p.group, values)); },
          py::arg("values"))
      .def(
          "classify",
          [](const ModelParameters& p, const Matrix& values, double threshold) {
            const Verdict v = classify(p, make_trace(p.group, values), threshold);
            return py::make_tuple(std::string(label_name(v.label)), v.score);
          },
          py::arg("values"), py::arg("threshold") = kDefaultThreshold)
      .def(
          "gradient_check",
          [](const ModelParameters& p, const Matrix& values, const std::string& label, double eps) {
            return gradient_check(p, make_trace(p.group, values), to_label(label), eps);
          },
          py::arg("values"), py::arg("label"), py::arg("eps") = 1e-5)
      .def(
          "evaluate",
          [](const ModelParameters& p, const LabeledDataset& d, double threshold) {
            return rates_dict(rates(confusion(p, d, threshold)));
          },
          py::arg("dataset"), py::arg("threshold") = kDefaultThreshold);

  m.def(
      "init_model", [](const std::string& group, int hidden_dim, std::uint64_t seed) { return init_model(to_group(group), hidden_dim, seed); },
      py::arg("group"), py::arg("hidden_dim") = kDefaultHiddenDim, py::arg("seed") = 0);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](const std::string& optimizer, int epochs, double train_fraction, std::uint64_t seed,
                       int batch_size, int hidden_dim) {
             TrainConfig c;
             c.optimizer = OptimizerConfig::defaults(to_optimizer(optimizer));
             c.epochs = epochs;
             c.train_fraction = train_fraction;
             c.seed = seed;
             c.batch_size = batch_size;
             c.hidden_dim = hidden_dim;
             c.validate();
             return c;
           }),
           py::arg("optimizer") = "Adadelta", py::arg("epochs") = 1000, py::arg("train_fraction") = 0.7,
           py::arg("seed") = 0, py::arg("batch_size") = 16, py::arg("hidden_dim") = kDefaultHiddenDim)
      .def_static("parse", [](const std::string& text) {
        std::istringstream in(text);
        return parse_train_config(in);
      })
      .def_property_readonly("optimizer", [](const TrainConfig& c) { return std::string(optimizer_name(c.optimizer.kind)); })
      .def_property_readonly("learning_rate", [](const TrainConfig& c) { return c.optimizer.learning_rate; })
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("hidden_dim", &TrainConfig::hidden_dim)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("train_fraction", &TrainConfig::train_fraction)
      .def_readwrite("clip_norm", &TrainConfig::clip_norm)
      .def_readwrite("threshold", &TrainConfig::threshold);

  m.def(
      "run_trial",
      [](const LabeledDataset& d, const TrainConfig& c) {
        TrainedModel trained;
        TrialResult r;
        {
          py::gil_scoped_release release;
          r = run_trial(d, c, &trained);
        }
        py::dict out;
        out["accuracy"] = r.accuracy;
        out["tp"] = r.counts.tp;
        out["tn"] = r.counts.tn;
        out["fp"] = r.counts.fp;
        out["fn"] = r.counts.fn;
        out["best_epoch"] = r.best_epoch;
        out["fit_ids"] = r.fit_ids;
        out["val_ids"] = r.val_ids;
        out["test_ids"] = r.test_ids;
        out["initial_val_loss"] = trained.initial_val_loss;
        std::vector<std::tuple<int, double, double>> history;
        for (const auto& e : trained.history) history.emplace_back(e.epoch, e.train_loss, e.val_loss);
        out["history"] = history;
        out["model"] = std::move(trained.model);
        return out;
      },
      py::arg("dataset"), py::arg("config"));

  py::class_<GridReport>(m, "GridReport")
      .def("accuracy_table",
           [](const GridReport& r, double fraction, bool csv) {
             return render_accuracy_table(r, fraction, csv ? ReportFormat::kCsv : ReportFormat::kText);
           },
           py::arg("fraction"), py::arg("csv") = false)
      .def("statistics_table",
           [](const GridReport& r, const std::string& optimizer, double fraction, bool csv) {
             return render_statistics_table(r, to_optimizer(optimizer), fraction,
                                            csv ? ReportFormat::kCsv : ReportFormat::kText);
           },
           py::arg("optimizer"), py::arg("fraction"), py::arg("csv") = false)
      .def("render", [](const GridReport& r, bool csv) { return render_report(r, csv ? ReportFormat::kCsv : ReportFormat::kText); },
           py::arg("csv") = false)
      .def("mean_accuracy",
           [](const GridReport& r, const std::string& group, const std::string& optimizer, double fraction) {
             return r.cell(to_group(group), to_optimizer(optimizer), fraction).mean_accuracy;
           });

  m.def(
      "run_grid",
      [](const std::map<std::string, LabeledDataset>& datasets, const std::vector<std::string>& optimizers,
         const std::vector<double>& fractions, int trials, std::uint64_t seed, int epochs, int hidden_dim, int jobs) {
        GridSpec spec;
        std::map<PerformanceGroup, LabeledDataset> by_group;
        for (const auto& [name, ds] : datasets) {
          const PerformanceGroup g = to_group(name);
          spec.groups.push_back(g);
          by_group.emplace(g, ds);
        }
        for (const auto& name : optimizers) spec.optimizers.push_back(to_optimizer(name));
        spec.fractions = fractions;
        spec.n_trials = trials;
        spec.master_seed = seed;
        spec.base.epochs = epochs;
        spec.base.hidden_dim = hidden_dim;
        spec.jobs = jobs;
        spec.datasets = [&by_group](PerformanceGroup g) { return by_group.at(g); };
        py::gil_scoped_release release;
        return run_grid(spec);
      },
      py::arg("datasets"), py::arg("optimizers") = std::vector<std::string>{"Adadelta", "Adamax", "RMSprop", "SGD"},
      py::arg("fractions") = std::vector<double>{0.7}, py::arg("trials") = 50, py::arg("seed") = 0,
      py::arg("epochs") = 1000, py::arg("hidden_dim") = kDefaultHiddenDim, py::arg("jobs") = 1);

  m.def("rates", [](double tp, double tn, double fp, double fn) { return rates_dict(rates(tp, tn, fp, fn)); },
        py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));
}
