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

// Hand-built feasible rules used as reference points by bound and verify.

#pragma once

#include <algorithm>
#include <vector>

#include "capauct/dist.hpp"
#include "capauct/two_price.hpp"

namespace capauct::cli {

/// Always serve at price v - C.
inline TwoPricedRule sell_always(const DiscreteTypeSpace& space, double capacity) {
  TwoPricedRule r;
  r.grid = space.values;
  r.capacity = capacity;
  r.qv.assign(space.size(), 0.0);
  r.qc.assign(space.size(), 1.0);
  return r;
}

/// qc rises linearly from zero at `anchor` with the given slope per unit of
/// value; the win probability is min(qc + base, 1).
inline TwoPricedRule linear_lottery(const DiscreteTypeSpace& space, double capacity, double base,
                                    double slope, double anchor) {
  TwoPricedRule r;
  r.grid = space.values;
  r.capacity = capacity;
  for (double v : space.values) {
    const double qc = std::clamp(slope * (v - anchor), 0.0, 1.0);
    r.qc.push_back(qc);
    r.qv.push_back(std::min(qc + base, 1.0) - qc);
  }
  return r;
}

}  // namespace capauct::cli
