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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "capauct/config.hpp"

namespace capauct::cli {

/// Raw command-line values before they are merged with a config file.
struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::size_t> k;
  std::vector<std::size_t> samples;
  std::vector<std::string> dists;
  std::vector<std::string> capacities;
  std::size_t n = 0;
  std::vector<std::string> mechanisms;
  unsigned threads = 0;
};

/// Loads the config file (if any) and lets every given flag replace the
/// corresponding field. A single --capacity applies to every agent; --n
/// replicates a single distribution.
ExperimentConfig resolve(const Flags& flags);

struct VerifyOptions {
  /// "bid-shift=<delta>" raises every equilibrium bid by delta.
  std::string inject;
  bool paper_examples = false;
  unsigned threads = 0;
};

// Each command writes its files under config.output_dir, prints a short
// summary to `out` and returns the process exit status.
int solve_lp(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int fpa_eq(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int simulate(const ExperimentConfig& config, unsigned threads, std::ostream& out, std::ostream& err);
int payment_curve(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int bound(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int verify(const ExperimentConfig& config, const VerifyOptions& options, std::ostream& out,
           std::ostream& err);

/// Parses argv and dispatches; used by main and by the CLI tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace capauct::cli
