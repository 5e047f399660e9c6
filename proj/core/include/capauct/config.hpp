// Copyright 2026 The capauct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "capauct/dist.hpp"

namespace capauct {

/// Parses the short forms produced by ValueDistribution::describe, e.g.
/// "uniform:0,1", "equal_revenue:h=1000", "exponential:rate=2" and
/// "piecewise_cdf:0,0;1,0.5;2,1". Bare "uniform" and "exponential" use the
/// unit defaults.
ValueDistribution parse_distribution(const std::string& text);

/// A finite positive number, or "inf".
double parse_capacity(const std::string& text);
std::string format_capacity(double capacity);

struct AgentConfig {
  std::string distribution;
  double capacity = kInf;

  bool operator==(const AgentConfig&) const = default;
};

/// Everything one CLI run needs. Flags given on the command line override the
/// values loaded from a file.
struct ExperimentConfig {
  std::vector<AgentConfig> agents;
  std::vector<std::string> mechanisms;
  std::vector<std::size_t> grid_sizes;
  std::vector<std::size_t> sample_counts;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  bool operator==(const ExperimentConfig&) const = default;

  /// Checks distributions parse and mechanisms are known.
  void validate() const;
  std::vector<AgentSpec> agent_specs() const;
};

std::string config_to_json(const ExperimentConfig& config);
/// Throws InvalidArgument on malformed input.
ExperimentConfig config_from_json(const std::string& text);

}  // namespace capauct
