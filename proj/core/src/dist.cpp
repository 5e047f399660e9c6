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

#include "capauct/dist.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "capauct/error.hpp"

namespace capauct {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kTol = 1e-9;

// Index of the segment [p_j, p_{j+1}) containing v; requires p_0 <= v < p_last.
std::size_t segment_of(const PiecewiseCdf& m, double v) {
  const auto& p = m.points;
  auto it = std::upper_bound(p.begin(), p.end(), v,
                             [](double x, const auto& pt) { return x < pt.first; });
  return static_cast<std::size_t>(std::distance(p.begin(), it)) - 1;
}

double segment_slope(const PiecewiseCdf& m, std::size_t j) {
  const auto& a = m.points[j];
  const auto& b = m.points[j + 1];
  if (b.first <= a.first) return 0.0;
  return (b.second - a.second) / (b.first - a.first);
}

double piecewise_atom(const PiecewiseCdf& m) {
  const auto& p = m.points;
  const std::size_t n = p.size();
  if (n >= 2 && p[n - 2].first == p[n - 1].first) return p[n - 1].second - p[n - 2].second;
  return 0.0;
}

}  // namespace

ValueDistribution ValueDistribution::uniform(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw InvalidArgument("uniform requires finite lo < hi");
  return ValueDistribution(Uniform{lo, hi});
}

ValueDistribution ValueDistribution::equal_revenue(double h) {
  if (!(std::isfinite(h) && h > 1.0))
    throw InvalidArgument("equal_revenue requires finite h > 1");
  return ValueDistribution(EqualRevenue{h});
}

ValueDistribution ValueDistribution::exponential(double rate) {
  if (!(std::isfinite(rate) && rate > 0.0))
    throw InvalidArgument("exponential requires rate > 0");
  return ValueDistribution(Exponential{rate});
}

ValueDistribution ValueDistribution::piecewise_cdf(
    std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw InvalidArgument("piecewise_cdf needs >= 2 points");
  // Drop exact repeats.
  points.erase(std::unique(points.begin(), points.end()), points.end());
  for (const auto& [v, f] : points)
    if (!std::isfinite(v) || !(f >= 0.0 && f <= 1.0))
      throw InvalidArgument("piecewise_cdf points must be finite with F in [0,1]");
  if (points.front().second != 0.0)
    throw InvalidArgument("piecewise_cdf must start at F = 0");
  if (points.back().second != 1.0)
    throw InvalidArgument("piecewise_cdf must end at F = 1");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first < points[i - 1].first || points[i].second < points[i - 1].second)
      throw InvalidArgument("piecewise_cdf points must be non-decreasing");
    if (points[i].first == points[i - 1].first && i + 1 != points.size())
      throw InvalidArgument("piecewise_cdf: atoms are only supported at the upper support");
  }
  if (points.size() == 2 && points[0].first == points[1].first)
    throw InvalidArgument("piecewise_cdf: degenerate point mass");
  return ValueDistribution(PiecewiseCdf{std::move(points)});
}

double ValueDistribution::lower_support() const {
  return std::visit(Overloaded{
                        [](const Uniform& u) { return u.lo; },
                        [](const EqualRevenue&) { return 1.0; },
                        [](const Exponential&) { return 0.0; },
                        [](const PiecewiseCdf& p) { return p.points.front().first; },
                    },
                    model_);
}

double ValueDistribution::upper_support() const {
  return std::visit(Overloaded{
                        [](const Uniform& u) { return u.hi; },
                        [](const EqualRevenue& e) { return e.h; },
                        [](const Exponential&) { return kInf; },
                        [](const PiecewiseCdf& p) { return p.points.back().first; },
                    },
                    model_);
}

double ValueDistribution::atom_at_upper() const {
  return std::visit(Overloaded{
                        [](const Uniform&) { return 0.0; },
                        [](const EqualRevenue& e) { return 1.0 / e.h; },
                        [](const Exponential&) { return 0.0; },
                        [](const PiecewiseCdf& p) { return piecewise_atom(p); },
                    },
                    model_);
}

double ValueDistribution::cdf(double v) const {
  return std::visit(
      Overloaded{
          [v](const Uniform& u) { return std::clamp((v - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
          [v](const EqualRevenue& e) {
            if (v < 1.0) return 0.0;
            if (v >= e.h) return 1.0;
            return 1.0 - 1.0 / v;
          },
          [v](const Exponential& x) { return v <= 0.0 ? 0.0 : -std::expm1(-x.rate * v); },
          [v](const PiecewiseCdf& p) {
            if (v < p.points.front().first) return 0.0;
            if (v >= p.points.back().first) return 1.0;
            const std::size_t j = segment_of(p, v);
            const auto& a = p.points[j];
            return a.second + segment_slope(p, j) * (v - a.first);
          },
      },
      model_);
}

double ValueDistribution::cdf_left(double v) const {
  if (v == upper_support()) return 1.0 - atom_at_upper();
  return cdf(v);
}

double ValueDistribution::pdf(double v) const {
  return std::visit(
      Overloaded{
          [v](const Uniform& u) { return (v < u.lo || v > u.hi) ? 0.0 : 1.0 / (u.hi - u.lo); },
          [v](const EqualRevenue& e) { return (v < 1.0 || v > e.h) ? 0.0 : 1.0 / (v * v); },
          [v](const Exponential& x) { return v < 0.0 ? 0.0 : x.rate * std::exp(-x.rate * v); },
          [v](const PiecewiseCdf& p) {
            const auto& pts = p.points;
            if (v < pts.front().first || v > pts.back().first) return 0.0;
            // The last continuous segment ends where the atom (if any) sits.
            std::size_t last = pts.size() - 2;
            if (piecewise_atom(p) > 0.0) last = pts.size() - 3;
            std::size_t j = v >= pts[last + 1].first ? last : segment_of(p, v);
            double s = segment_slope(p, j);
            // At a knot where the density drops to zero, report the density of
            // the segment that ends there.
            if (s == 0.0 && j > 0 && v == pts[j].first) s = segment_slope(p, j - 1);
            return s;
          },
      },
      model_);
}

double ValueDistribution::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  return std::visit(
      Overloaded{
          [u](const Uniform& x) { return x.lo + u * (x.hi - x.lo); },
          [u](const EqualRevenue& e) {
            if (u >= 1.0 - 1.0 / e.h) return e.h;
            return std::min(1.0 / (1.0 - u), e.h);
          },
          [u](const Exponential& x) { return u >= 1.0 ? kInf : -std::log1p(-u) / x.rate; },
          [u](const PiecewiseCdf& p) {
            const auto& pts = p.points;
            if (u <= 0.0) return pts.front().first;
            // First knot whose cdf reaches u; interpolate inside its segment.
            for (std::size_t j = 1; j < pts.size(); ++j) {
              if (pts[j].second >= u) {
                const auto& a = pts[j - 1];
                const auto& b = pts[j];
                if (b.first == a.first || b.second == a.second) return b.first;
                return a.first + (u - a.second) * (b.first - a.first) / (b.second - a.second);
              }
            }
            return pts.back().first;
          },
      },
      model_);
}

double ValueDistribution::effective_upper(double tail_mass) const {
  const double hi = upper_support();
  if (std::isfinite(hi)) return hi;
  return quantile(1.0 - tail_mass);
}

std::string ValueDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const Uniform& u) { os << "uniform:" << u.lo << "," << u.hi; },
                 [&](const EqualRevenue& e) { os << "equal_revenue:h=" << e.h; },
                 [&](const Exponential& x) { os << "exponential:rate=" << x.rate; },
                 [&](const PiecewiseCdf& p) {
                   os << "piecewise_cdf:";
                   for (std::size_t i = 0; i < p.points.size(); ++i)
                     os << (i ? ";" : "") << p.points[i].first << "," << p.points[i].second;
                 },
             },
             model_);
  return os.str();
}

void DiscreteTypeSpace::validate() const {
  if (values.empty()) throw InvalidArgument("empty type space");
  if (values.size() != masses.size())
    throw LengthMismatch("values and masses differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw InvalidArgument("non-finite type value");
    if (i > 0 && !(values[i] > values[i - 1]))
      throw InvalidArgument("type values must be strictly increasing");
    if (!(masses[i] > 0.0)) throw InvalidArgument("type masses must be positive");
    total += masses[i];
  }
  if (std::abs(total - 1.0) > kTol) throw InvalidArgument("type masses must sum to 1");
}

double virtual_value(const ValueDistribution& d, double v) {
  const double lo = d.lower_support();
  const double hi = d.upper_support();
  if (!(v >= lo - kTol && v <= hi + kTol)) throw OutOfSupport("value outside the support");
  const double f = d.pdf(v);
  if (!(f > 0.0)) throw ZeroDensity("density vanishes at the evaluation point");
  return v - (1.0 - d.cdf(v)) / f;
}

bool is_regular(const ValueDistribution& d, std::size_t grid_size) {
  if (grid_size < 2) throw InvalidArgument("is_regular needs grid_size >= 2");
  double prev = -kInf;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(grid_size);
    const double phi = virtual_value(d, d.quantile(u));
    if (phi < prev - kTol * std::max(1.0, std::abs(prev))) return false;
    prev = std::max(prev, phi);
  }
  return true;
}

namespace {

bool reaches(const ValueDistribution& d, double z, double target) {
  return virtual_value(d, z) >= target - kTol * std::max(1.0, std::abs(target));
}

}  // namespace

double inverse_virtual_value(const ValueDistribution& d, double target) {
  double lo = d.lower_support();
  double hi = d.effective_upper(1e-12);
  if (reaches(d, lo, target)) return lo;
  if (!reaches(d, hi, target)) return d.upper_support();
  while (hi - lo > kTol * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (reaches(d, mid, target)) hi = mid; else lo = mid;
  }
  return hi;
}

double monopoly_reserve(const ValueDistribution& d) {
  if (!is_regular(d)) throw NotRegular("monopoly_reserve requires a regular distribution");
  return inverse_virtual_value(d, 0.0);
}

DiscreteTypeSpace discretize(const ValueDistribution& d, std::size_t k) {
  if (k < 1) throw InvalidArgument("discretize needs k >= 1");
  DiscreteTypeSpace out;
  const double atom = d.atom_at_upper();
  const double kd = static_cast<double>(k);
  if (atom > 0.5 / kd) {
    const double cont = 1.0 - atom;
    auto m = static_cast<std::size_t>(std::floor(cont * kd + kTol));
    m = std::max<std::size_t>(m, 1);
    const double md = static_cast<double>(m);
    // Masses are differences of the cumulative levels so their sum telescopes.
    double prev_level = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double level = i + 1 == m ? cont : cont * (static_cast<double>(i) + 1.0) / md;
      out.values.push_back(d.quantile(cont * (static_cast<double>(i) + 0.5) / md));
      out.masses.push_back(level - prev_level);
      prev_level = level;
    }
    out.values.push_back(d.upper_support());
    out.masses.push_back(1.0 - cont);
  } else {
    double prev_level = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double level = i + 1 == k ? 1.0 : (static_cast<double>(i) + 1.0) / kd;
      out.values.push_back(d.quantile((static_cast<double>(i) + 0.5) / kd));
      out.masses.push_back(level - prev_level);
      prev_level = level;
    }
  }
  // Merge coincident points (possible when a quantile clips to the atom).
  DiscreteTypeSpace merged;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (!merged.values.empty() && out.values[i] <= merged.values.back()) {
      merged.masses.back() += out.masses[i];
    } else {
      merged.values.push_back(out.values[i]);
      merged.masses.push_back(out.masses[i]);
    }
  }
  return merged;
}

std::vector<double> sample(const ValueDistribution& d, std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw(d, rng));
  return out;
}

std::vector<double> discrete_virtual_values(const DiscreteTypeSpace& t) {
  t.validate();
  std::vector<double> phi(t.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    cum += t.masses[i];
    const double tail = i + 1 == t.size() ? 0.0 : std::max(0.0, 1.0 - cum);
    const double gap = i + 1 == t.size() ? 0.0 : t.values[i + 1] - t.values[i];
    phi[i] = t.values[i] - tail * gap / t.masses[i];
  }
  return phi;
}

}  // namespace capauct
