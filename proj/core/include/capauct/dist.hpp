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
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "capauct/random.hpp"

namespace capauct {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

/// F(z) = 1 - 1/z on [1, h) with the remaining mass 1/h as an atom at h.
struct EqualRevenue {
  double h = 1000.0;
};

struct Exponential {
  double rate = 1.0;
};

/// Linear interpolation between (value, cdf) knots. The last two knots may
/// share a value, which places an atom at the upper support.
struct PiecewiseCdf {
  std::vector<std::pair<double, double>> points;
};

/// A one-dimensional value distribution. Immutable after construction.
class ValueDistribution {
 public:
  using Model = std::variant<Uniform, EqualRevenue, Exponential, PiecewiseCdf>;

  static ValueDistribution uniform(double lo, double hi);
  static ValueDistribution equal_revenue(double h);
  static ValueDistribution exponential(double rate);
  static ValueDistribution piecewise_cdf(
      std::vector<std::pair<double, double>> points);

  double lower_support() const;
  /// May be +inf (exponential).
  double upper_support() const;
  double cdf(double v) const;
  /// lim_{z -> v-} cdf(z); differs from cdf only at the upper atom.
  double cdf_left(double v) const;
  double pdf(double v) const;
  double quantile(double u) const;
  double atom_at_upper() const;

  /// Largest value worth putting on a finite grid: the upper support, or a
  /// far quantile for unbounded supports.
  double effective_upper(double tail_mass = 1e-9) const;

  const Model& model() const { return model_; }
  /// Short form used by the CLI, e.g. "uniform:0,1" or "equal_revenue:h=1000".
  std::string describe() const;

 private:
  explicit ValueDistribution(Model m) : model_(std::move(m)) {}
  Model model_;
};

/// Finite type space; values strictly increasing, masses positive, sum 1.
struct DiscreteTypeSpace {
  std::vector<double> values;
  std::vector<double> masses;

  std::size_t size() const { return values.size(); }
  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;
};

struct AgentSpec {
  std::variant<ValueDistribution, DiscreteTypeSpace> distribution;
  double capacity = kInf;

  const ValueDistribution* continuous() const {
    return std::get_if<ValueDistribution>(&distribution);
  }
  const DiscreteTypeSpace* discrete() const {
    return std::get_if<DiscreteTypeSpace>(&distribution);
  }
};

/// phi(v) = v - (1 - F(v)) / f(v).
double virtual_value(const ValueDistribution& d, double v);

/// Non-decreasing virtual value on a quantile-uniform grid, tolerance 1e-9.
bool is_regular(const ValueDistribution& d, std::size_t grid_size = 1000);

/// Smallest v with phi(v) >= 0; the lower support when phi >= 0 everywhere.
double monopoly_reserve(const ValueDistribution& d);

/// Smallest value z in the support with phi(z) >= target (bisection, 1e-9).
/// Returns the upper support when phi never reaches the target.
double inverse_virtual_value(const ValueDistribution& d, double target);

/// Quantile-midpoint discretization into k equal-mass points; an upper atom
/// heavier than 1/(2k) is kept as its own point.
DiscreteTypeSpace discretize(const ValueDistribution& d, std::size_t k);

/// Inverse-transform draw.
inline double draw(const ValueDistribution& d, Rng& rng) {
  return d.quantile(rng.uniform());
}

std::vector<double> sample(const ValueDistribution& d, std::uint64_t seed,
                           std::size_t n);

/// Forward-difference discrete virtual values
/// phi_i = v_i - (1 - F_i) (v_{i+1} - v_i) / f_i.
std::vector<double> discrete_virtual_values(const DiscreteTypeSpace& t);

}  // namespace capauct
