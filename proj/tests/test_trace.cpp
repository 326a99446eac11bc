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

#include <set>
#include <sstream>

#include "hpcdetect/errors.hpp"
#include "test_support.hpp"

using namespace hpcdetect;
using hpcdetect::testing::random_dataset;
using hpcdetect::testing::random_trace;

namespace {

std::string csv_for(const std::string& id, const std::string& label, PerformanceGroup group, int samples,
                    double base = 1.0) {
  std::string out(kTraceCsvHeader);
  out += "\n";
  const auto& names = metric_names(group);
  for (int t = 1; t <= samples; ++t) {
    for (std::size_t f = 0; f < names.size(); ++f) {
      out += id + "," + label + "," + std::string(group_name(group)) + "," + std::to_string(100 * t) + "," +
             names[f] + "," + std::to_string(base + t + 0.5 * f) + "\n";
    }
  }
  return out;
}

std::string error_of(const std::string& text) {
  try {
    parse_trace_csv(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("metric counts follow the group table") {
  const std::vector<std::pair<std::string, int>> expected = {
      {"BRANCH", 4},   {"CLOCK", 1},    {"CYCLE_ACTIVITY", 4}, {"DATA", 1},      {"FLOPS_DP", 5},
      {"ICACHE", 4},   {"L2_DATA", 6},  {"L2_CACHE", 3},       {"L3_DATA", 6},   {"L3_CACHE", 3},
      {"TLB_DATA", 6}, {"TLB_INSTR", 3}, {"UOPS", 3},          {"UOPS_EXEC", 3}, {"UOPS_ISSUE", 3},
      {"UOPS_RETIRE", 3}};
  REQUIRE(expected.size() == all_groups().size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto g = all_groups()[i];
    CHECK(group_name(g) == expected[i].first);
    CHECK(metric_count(g) == expected[i].second);
    CHECK(parse_group(expected[i].first) == g);
    const auto& names = metric_names(g);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
  }
  CHECK_FALSE(parse_group("L3_DATA:").has_value());
}

TEST_CASE("validate_trace") {
  CounterRng rng(1);
  auto trace = random_trace(PerformanceGroup::kBranch, rng);
  CHECK(validate_trace(trace).ok);

  SUBCASE("non-uniform spacing") {
    trace.timestamps_us[2] = 250;
    auto r = validate_trace(trace);
    CHECK_FALSE(r.ok);
    CHECK(r.reason.find("non-uniform 100 us spacing") != std::string::npos);
  }
  SUBCASE("NaN value") {
    trace.values(5, 2) = std::nan("");
    auto r = validate_trace(trace);
    CHECK_FALSE(r.ok);
    CHECK(r.reason.find("non-finite value") != std::string::npos);
  }
  SUBCASE("short window") {
    trace.values.conservativeResize(19, Eigen::NoChange);
    trace.timestamps_us.pop_back();
    CHECK(validate_trace(trace).reason.find("incomplete window") != std::string::npos);
  }
  SUBCASE("wrong width") {
    trace.values.conservativeResize(Eigen::NoChange, 3);
    CHECK_FALSE(validate_trace(trace).ok);
  }
}

TEST_CASE("validate_trace fuzz: accepts exactly the valid traces") {
  CounterRng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const auto group = all_groups()[rng.uniform_below(kNumGroups)];
    auto trace = random_trace(group, rng);
    bool should_pass = true;
    switch (rng.uniform_below(5)) {
      case 0: break;
      case 1: {
        const auto k = rng.uniform_below(kWindowLength);
        trace.timestamps_us[k] += static_cast<std::int64_t>(rng.uniform_below(99)) + 1;
        should_pass = false;
        break;
      }
      case 2: {
        const auto r = static_cast<Eigen::Index>(rng.uniform_below(kWindowLength));
        const auto c = static_cast<Eigen::Index>(rng.uniform_below(trace.values.cols()));
        trace.values(r, c) = rng.uniform01() < 0.5 ? std::numeric_limits<double>::infinity() : std::nan("");
        should_pass = false;
        break;
      }
      case 3: {
        const auto keep = static_cast<Eigen::Index>(rng.uniform_below(kWindowLength));
        trace.values.conservativeResize(keep, Eigen::NoChange);
        trace.timestamps_us.resize(static_cast<std::size_t>(keep));
        should_pass = false;
        break;
      }
      case 4:
        trace.values.conservativeResize(Eigen::NoChange, trace.values.cols() + 1);
        trace.values.col(trace.values.cols() - 1).setZero();
        should_pass = false;
        break;
    }
    CHECK(validate_trace(trace).ok == should_pass);
  }
}

TEST_CASE("parse_trace_csv shapes") {
  SUBCASE("one CLOCK trace") {
    auto ds = parse_trace_csv(csv_for("a", "benign", PerformanceGroup::kClock, 20));
    REQUIRE(ds.size() == 1);
    CHECK(ds.group() == PerformanceGroup::kClock);
    CHECK(ds.entries()[0].label == Label::kBenign);
    CHECK(ds.entries()[0].trace.values.rows() == 20);
    CHECK(ds.entries()[0].trace.values.cols() == 1);
    CHECK(validate_trace(ds.entries()[0].trace).ok);
  }
  SUBCASE("two BRANCH traces, rows shuffled") {
    auto text = csv_for("a", "benign", PerformanceGroup::kBranch, 20);
    auto second = csv_for("b", "ransomware", PerformanceGroup::kBranch, 20, 3.0);
    text += second.substr(second.find('\n') + 1);
    // Reverse the data rows; order must not matter.
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) lines.push_back(line);
    std::string shuffled = std::string(kTraceCsvHeader) + "\n";
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) shuffled += *it + "\n";
    auto ds = parse_trace_csv(shuffled);
    REQUIRE(ds.size() == 2);
    for (const auto& e : ds.entries()) {
      CHECK(e.trace.values.rows() == 20);
      CHECK(e.trace.values.cols() == 4);
    }
    const auto& a = ds.entries()[0].trace.trace_id == "a" ? ds.entries()[0] : ds.entries()[1];
    CHECK(a.trace.values(0, 1) == doctest::Approx(2.5));
    CHECK(a.trace.values(19, 3) == doctest::Approx(22.5));
  }
  SUBCASE("longer traces are truncated to the first 20 samples") {
    auto ds = parse_trace_csv(csv_for("a", "benign", PerformanceGroup::kClock, 25));
    CHECK(ds.entries()[0].trace.values.rows() == 20);
    CHECK(ds.entries()[0].trace.values(19, 0) == doctest::Approx(21.0));
  }
}

TEST_CASE("parse_trace_csv errors") {
  CHECK(error_of(csv_for("a", "benign", PerformanceGroup::kClock, 19)).find("incomplete window") !=
        std::string::npos);

  auto text = csv_for("a", "benign", PerformanceGroup::kClock, 20);
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string t = text;
    t.replace(t.find(from), from.size(), to);
    return error_of(t);
  };
  CHECK(replace(",CLOCK,100,", ",CLOCKX,100,").find("unknown group") != std::string::npos);
  CHECK(replace("Uncore Clock [MHz]", "Core Clock").find("unknown metric") != std::string::npos);
  CHECK(replace(",CLOCK,100,Uncore Clock [MHz],2.000000", ",CLOCK,100,Uncore Clock [MHz],abc")
            .find("non-numeric value") != std::string::npos);
  CHECK(replace(",CLOCK,100,", ",CLOCK,150,").find("wrong timestamp grid") != std::string::npos);
  CHECK(replace(",CLOCK,200,", ",CLOCK,100,").find("duplicate cell") != std::string::npos);
  CHECK(replace("a,benign,CLOCK,300", "a,ransomware,CLOCK,300").find("mixed labels") != std::string::npos);
  CHECK(replace(",CLOCK,500,", ",CLOCK,2100,").find("wrong timestamp grid") != std::string::npos);
  CHECK(replace(",CLOCK,100,Uncore Clock [MHz],2.000000", ",CLOCK,100,Uncore Clock [MHz],nan")
            .find("non-finite") != std::string::npos);
  CHECK(replace("trace_id,label", "id,label").find("header") != std::string::npos);

  // Missing cell: BRANCH trace lacking one metric at one timestamp.
  auto branch = csv_for("b", "benign", PerformanceGroup::kBranch, 20);
  const auto pos = branch.find("b,benign,BRANCH,700,Branch rate,");
  branch.erase(pos, branch.find('\n', pos) - pos + 1);
  CHECK(error_of(branch).find("missing cell") != std::string::npos);

  // Error messages carry line numbers.
  CHECK(replace(",CLOCK,100,", ",CLOCKX,100,").rfind("line 2:", 0) == 0);
}

TEST_CASE("blank labels are only accepted for detection input") {
  auto text = csv_for("a", "", PerformanceGroup::kClock, 20);
  CHECK(error_of(text).find("missing label") != std::string::npos);
  std::istringstream in(text);
  auto rows = parse_trace_rows(in, false);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].label.has_value());
}

TEST_CASE("CSV write/parse round trip is bit-exact") {
  CounterRng rng(5);
  for (auto group : all_groups()) {
    auto ds = random_dataset(group, 3, 2, rng);
    // Include awkward magnitudes.
    ds = [&] {
      LabeledDataset out(group);
      for (auto e : ds.entries()) {
        e.trace.values *= std::pow(10.0, static_cast<double>(rng.uniform_below(40)) - 20.0);
        out.add(std::move(e.trace), e.label);
      }
      return out;
    }();
    auto back = parse_trace_csv(write_trace_csv(ds));
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CHECK(back.entries()[i].trace.trace_id == ds.entries()[i].trace.trace_id);
      CHECK(back.entries()[i].label == ds.entries()[i].label);
      CHECK(back.entries()[i].trace.timestamps_us == ds.entries()[i].trace.timestamps_us);
      CHECK((back.entries()[i].trace.values.array() == ds.entries()[i].trace.values.array()).all());
    }
  }
}

TEST_CASE("dataset invariants") {
  LabeledDataset ds(PerformanceGroup::kClock);
  CounterRng rng(3);
  ds.add(random_trace(PerformanceGroup::kClock, rng, "x"), Label::kBenign);
  CHECK_THROWS_AS(ds.add(random_trace(PerformanceGroup::kClock, rng, "x"), Label::kBenign), DataError);
  CHECK_THROWS_AS(ds.add(random_trace(PerformanceGroup::kData, rng, "y"), Label::kBenign), DataError);
}

TEST_CASE("fit_normalizer and apply_normalizer") {
  SUBCASE("constant feature is degenerate") {
    LabeledDataset ds(PerformanceGroup::kClock);
    ds.add(TraceSeries::on_grid("a", PerformanceGroup::kClock, Matrix::Constant(20, 1, 7.0)), Label::kBenign);
    auto n = fit_normalizer(ds);
    CHECK(n.mean[0] == 7.0);
    CHECK(n.stddev[0] == 0.0);
    CHECK(n.degenerate(0));
    CHECK(apply_normalizer(n, ds.entries()[0].trace).values(0, 0) == 0.0);
  }
  SUBCASE("two-point population std") {
    Matrix v(20, 1);
    for (int t = 0; t < 20; ++t) v(t, 0) = t % 2 ? 3.0 : 1.0;
    LabeledDataset ds(PerformanceGroup::kClock);
    ds.add(TraceSeries::on_grid("a", PerformanceGroup::kClock, v), Label::kBenign);
    auto n = fit_normalizer(ds);
    CHECK(n.mean[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(n.stddev[0] == doctest::Approx(1.0).epsilon(1e-15));
    Normalizer fixed{Vector::Constant(1, 2.0), Vector::Constant(1, 1.0)};
    CHECK(apply_normalizer(fixed, Matrix::Constant(1, 1, 3.0))(0, 0) == 1.0);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(apply_normalizer(Normalizer::identity(2), Matrix::Zero(20, 3)), UsageError);
  }
  SUBCASE("empty dataset") {
    CHECK_THROWS_AS(fit_normalizer(LabeledDataset(PerformanceGroup::kClock)), UsageError);
  }
}

TEST_CASE("normalized fitting set has zero mean and unit std; inverse round-trips") {
  CounterRng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto group = all_groups()[rng.uniform_below(kNumGroups)];
    LabeledDataset ds(group);
    const int n = 2 + static_cast<int>(rng.uniform_below(20));
    for (int i = 0; i < n; ++i) {
      auto t = random_trace(group, rng, "t" + std::to_string(i));
      for (Eigen::Index c = 0; c < t.values.cols(); ++c) {
        t.values.col(c) = t.values.col(c) * (1.0 + 100.0 * c) + Matrix::Constant(20, 1, 1000.0 * c);
      }
      ds.add(std::move(t), i % 2 ? Label::kBenign : Label::kRansomware);
    }
    const auto norm = fit_normalizer(ds);
    const int features = metric_count(group);
    Vector sum = Vector::Zero(features), sq = Vector::Zero(features);
    double count = 0;
    for (const auto& e : ds.entries()) {
      const Matrix z = apply_normalizer(norm, e.trace.values);
      sum += z.colwise().sum().transpose();
      sq += z.array().square().colwise().sum().matrix().transpose();
      count += 20;
      // Inverse transform reproduces the input.
      for (int c = 0; c < features; ++c) {
        for (int r = 0; r < 20; ++r) {
          const double back = z(r, c) * norm.stddev[c] + norm.mean[c];
          CHECK(std::abs(back - e.trace.values(r, c)) <= 1e-12 * std::max(1.0, std::abs(e.trace.values(r, c))));
        }
      }
    }
    for (int c = 0; c < features; ++c) {
      const double mean = sum[c] / count;
      const double stddev = std::sqrt(sq[c] / count - mean * mean);
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(stddev - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("stratified_split floor counts") {
  CounterRng rng(1);
  SUBCASE("80 ransomware + 76 benign at 0.70") {
    auto ds = random_dataset(PerformanceGroup::kClock, 76, 80, rng);
    auto p = stratified_split(ds, 0.70, 42);
    CHECK(p.first.count(Label::kRansomware) == 56);
    CHECK(p.first.count(Label::kBenign) == 53);
    CHECK(p.first.size() == 109);
    CHECK(p.second.size() == 47);
  }
  SUBCASE("10 + 10 at 0.90") {
    auto ds = random_dataset(PerformanceGroup::kClock, 10, 10, rng);
    auto p = stratified_split(ds, 0.90, 1);
    CHECK(p.first.count(Label::kRansomware) == 9);
    CHECK(p.first.count(Label::kBenign) == 9);
    CHECK(p.second.count(Label::kRansomware) == 1);
    CHECK(p.second.count(Label::kBenign) == 1);
  }
  SUBCASE("determinism") {
    auto ds = random_dataset(PerformanceGroup::kClock, 12, 15, rng);
    auto a = stratified_split(ds, 0.8, 9);
    auto b = stratified_split(ds, 0.8, 9);
    for (std::size_t i = 0; i < a.first.size(); ++i) {
      CHECK(a.first.entries()[i].trace.trace_id == b.first.entries()[i].trace.trace_id);
    }
  }
  SUBCASE("errors") {
    auto ds = random_dataset(PerformanceGroup::kClock, 1, 5, rng);
    CHECK_THROWS_AS(stratified_split(ds, 0.7, 1), UsageError);
    auto ok = random_dataset(PerformanceGroup::kClock, 5, 5, rng);
    CHECK_THROWS_AS(stratified_split(ok, 0.0, 1), UsageError);
    CHECK_THROWS_AS(stratified_split(ok, 1.0, 1), UsageError);
  }
}

TEST_CASE("validation_carve floor counts") {
  CounterRng rng(2);
  auto ds = random_dataset(PerformanceGroup::kClock, 53, 56, rng);
  auto c = validation_carve(ds, 3);
  CHECK(c.second.count(Label::kRansomware) == 14);
  CHECK(c.second.count(Label::kBenign) == 13);
  CHECK(c.first.count(Label::kRansomware) == 42);
  CHECK(c.first.count(Label::kBenign) == 40);

  auto small = random_dataset(PerformanceGroup::kClock, 8, 8, rng);
  auto s = validation_carve(small, 3);
  CHECK(s.second.size() == 4);
  CHECK(s.first.size() == 12);
  auto again = validation_carve(small, 3);
  for (std::size_t i = 0; i < s.second.size(); ++i) {
    CHECK(s.second.entries()[i].trace.trace_id == again.second.entries()[i].trace.trace_id);
  }
  CHECK_THROWS_AS(validation_carve(random_dataset(PerformanceGroup::kClock, 3, 8, rng), 1), UsageError);
}

TEST_CASE("split and carve partitions are disjoint, exhaustive and floored (property)") {
  CounterRng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int nb = 4 + static_cast<int>(rng.uniform_below(40));
    const int nr = 4 + static_cast<int>(rng.uniform_below(40));
    auto ds = random_dataset(PerformanceGroup::kClock, nb, nr, rng);
    const double fraction = 0.05 + 0.9 * rng.uniform01();
    const auto seed = rng.next_u64();
    auto p = stratified_split(ds, fraction, seed);
    std::set<std::string> a, b;
    for (const auto& e : p.first.entries()) a.insert(e.trace.trace_id);
    for (const auto& e : p.second.entries()) b.insert(e.trace.trace_id);
    CHECK(a.size() + b.size() == ds.size());
    for (const auto& id : a) CHECK(b.count(id) == 0);
    CHECK(p.first.count(Label::kBenign) == static_cast<std::size_t>(std::floor(fraction * nb + 1e-9)));
    CHECK(p.first.count(Label::kRansomware) == static_cast<std::size_t>(std::floor(fraction * nr + 1e-9)));

    auto c = validation_carve(ds, seed);
    CHECK(c.second.count(Label::kBenign) == static_cast<std::size_t>(nb / 4));
    CHECK(c.second.count(Label::kRansomware) == static_cast<std::size_t>(nr / 4));
    CHECK(c.first.size() + c.second.size() == ds.size());
  }
}
