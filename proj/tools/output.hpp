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

#include <filesystem>
#include <fstream>
#include <string>

#include "capauct/error.hpp"

namespace capauct::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSolver = 3;

/// Largest tolerated best-response gain in the IC audits.
inline constexpr double kAuditThreshold = 0.01;

/// Output directory; files are written single-threaded, in a fixed order.
class Output {
 public:
  explicit Output(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  std::ofstream open(const std::string& name) const {
    const auto p = path(name);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary);
    if (!os) throw InvalidArgument("cannot write " + p.string());
    return os;
  }

  void write(const std::string& name, const std::string& text) const { open(name) << text; }

 private:
  std::filesystem::path dir_;
};

}  // namespace capauct::cli
