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

#include "hpcdetect/trace.hpp"

#include <algorithm>

namespace hpcdetect {
namespace {

struct GroupInfo {
  PerformanceGroup id;
  std::string_view name;
  std::vector<std::string> metrics;
};

const std::vector<GroupInfo>& group_table() {
  static const std::vector<GroupInfo> table = {
      {PerformanceGroup::kBranch,
       "BRANCH",
       {"Branch rate", "Branch misprediction rate", "Branch misprediction ratio",
        "Instructions per branch"}},
      {PerformanceGroup::kClock, "CLOCK", {"Uncore Clock [MHz]"}},
      {PerformanceGroup::kCycleActivity,
       "CYCLE_ACTIVITY",
       {"Cycles without execution [%]", "Cycles with stalls due to L1D [%]",
        "Cycles with stalls due to L2 [%]", "Cycles w/o execution due to memory [%]"}},
      {PerformanceGroup::kData, "DATA", {"Load to store ratio"}},
      {PerformanceGroup::kFlopsDp,
       "FLOPS_DP",
       {"DP MFLOP/s", "AVX DP MFLOP/s", "Packed MUOPS/s", "Scalar MUOPS/s",
        "Vectorization ratio"}},
      {PerformanceGroup::kIcache,
       "ICACHE",
       {"L1I request rate", "L1I miss rate", "L1I miss ratio", "L1I stall rate"}},
      {PerformanceGroup::kL2Data,
       "L2_DATA",
       {"L2D load bandwidth [MBytes/s]", "L2D load data volume [GBytes]",
        "L2D evict bandwidth [MBytes/s]", "L2D evict data volume [GBytes]",
        "L2 bandwidth [MBytes/s]", "L2 data volume [GBytes]"}},
      {PerformanceGroup::kL2Cache, "L2_CACHE", {"L2 request rate", "L2 miss rate", "L2 miss ratio"}},
      {PerformanceGroup::kL3Data,
       "L3_DATA",
       {"L3 load bandwidth [MBytes/s]", "L3 load data volume [GBytes]",
        "L3 evict bandwidth [MBytes/s]", "L3 evict data volume [GBytes]",
        "L3 bandwidth [MBytes/s]", "L3 data volume [GBytes]"}},
      {PerformanceGroup::kL3Cache, "L3_CACHE", {"L3 request rate", "L3 miss rate", "L3 miss ratio"}},
      {PerformanceGroup::kTlbData,
       "TLB_DATA",
       {"L1 DTLB load misses", "L1 DTLB load miss rate", "L1 DTLB load miss duration [Cyc]",
        "L1 DTLB store misses", "L1 DTLB store miss rate", "L1 DTLB store miss duration [Cyc]"}},
      {PerformanceGroup::kTlbInstr,
       "TLB_INSTR",
       {"L1 ITLB misses", "L1 ITLB miss rate", "L1 ITLB miss duration [Cyc]"}},
      {PerformanceGroup::kUops, "UOPS", {"Issued UOPs", "Executed UOPs", "Retired UOPs"}},
      {PerformanceGroup::kUopsExec,
       "UOPS_EXEC",
       {"Used cycles ratio [%]", "Unused cycles ratio [%]", "Avg stall duration [cycles]"}},
      {PerformanceGroup::kUopsIssue,
       "UOPS_ISSUE",
       {"Used cycles ratio [%]", "Unused cycles ratio [%]", "Avg stall duration [cycles]"}},
      {PerformanceGroup::kUopsRetire,
       "UOPS_RETIRE",
       {"Used cycles ratio [%]", "Unused cycles ratio [%]", "Avg stall duration [cycles]"}},
  };
  return table;
}

const GroupInfo& info(PerformanceGroup group) {
  return group_table()[static_cast<std::size_t>(group)];
}

}  // namespace

const std::array<PerformanceGroup, kNumGroups>& all_groups() {
  static const std::array<PerformanceGroup, kNumGroups> groups = [] {
    std::array<PerformanceGroup, kNumGroups> out{};
    for (int i = 0; i < kNumGroups; ++i) out[i] = static_cast<PerformanceGroup>(i);
    return out;
  }();
  return groups;
}

std::string_view group_name(PerformanceGroup group) { return info(group).name; }

std::optional<PerformanceGroup> parse_group(std::string_view name) {
  for (const auto& g : group_table()) {
    if (g.name == name) return g.id;
  }
  return std::nullopt;
}

const std::vector<std::string>& metric_names(PerformanceGroup group) {
  return info(group).metrics;
}

int metric_count(PerformanceGroup group) {
  return static_cast<int>(info(group).metrics.size());
}

std::optional<int> metric_index(PerformanceGroup group, std::string_view metric) {
  const auto& names = info(group).metrics;
  auto it = std::find(names.begin(), names.end(), metric);
  if (it == names.end()) return std::nullopt;
  return static_cast<int>(it - names.begin());
}

std::string_view label_name(Label label) {
  return label == Label::kRansomware ? "ransomware" : "benign";
}

std::optional<Label> parse_label(std::string_view name) {
  if (name == "benign") return Label::kBenign;
  if (name == "ransomware") return Label::kRansomware;
  return std::nullopt;
}

}  // namespace hpcdetect
