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

#include "capauct/config.hpp"

#include <cmath>
#include <variant>
#include <nlohmann/json.hpp>

#include "capauct/auctions.hpp"
#include "capauct/error.hpp"

namespace capauct {
namespace {

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("trailing characters in number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// "key=value" or a bare value.
double keyed(const std::string& s, const std::string& key) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) return parse_number(s);
  if (s.substr(0, eq) != key) throw InvalidArgument("expected '" + key + "=' in '" + s + "'");
  return parse_number(s.substr(eq + 1));
}

template <class... F>
struct Overload : F... {
  using F::operator()...;
};
template <class... F>
Overload(F...) -> Overload<F...>;

nlohmann::ordered_json distribution_to_json(const ValueDistribution& d) {
  nlohmann::ordered_json j;
  std::visit(Overload{
                 [&](const Uniform& m) {
                   j["kind"] = "uniform";
                   j["lo"] = m.lo;
                   j["hi"] = m.hi;
                 },
                 [&](const EqualRevenue& m) {
                   j["kind"] = "equal_revenue";
                   j["h"] = m.h;
                 },
                 [&](const Exponential& m) {
                   j["kind"] = "exponential";
                   j["rate"] = m.rate;
                 },
                 [&](const PiecewiseCdf& m) {
                   j["kind"] = "piecewise_cdf";
                   j["points"] = nlohmann::ordered_json::array();
                   for (const auto& [v, f] : m.points) j["points"].push_back({v, f});
                 },
             },
             d.model());
  return j;
}

ValueDistribution distribution_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_distribution(j.get<std::string>());
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "uniform") return ValueDistribution::uniform(j.value("lo", 0.0), j.value("hi", 1.0));
  if (kind == "equal_revenue") return ValueDistribution::equal_revenue(j.at("h").get<double>());
  if (kind == "exponential") return ValueDistribution::exponential(j.value("rate", 1.0));
  if (kind == "piecewise_cdf") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : j.at("points")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return ValueDistribution::piecewise_cdf(std::move(pts));
  }
  throw InvalidArgument("unknown distribution kind '" + kind + "'");
}

}  // namespace

ValueDistribution parse_distribution(const std::string& text) {
  const auto colon = text.find(':');
  const std::string family = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (family == "uniform") {
    if (args.empty()) return ValueDistribution::uniform(0.0, 1.0);
    const auto parts = split(args, ',');
    if (parts.size() != 2) throw InvalidArgument("uniform takes 'lo,hi'");
    return ValueDistribution::uniform(parse_number(parts[0]), parse_number(parts[1]));
  }
  if (family == "equal_revenue") {
    if (args.empty()) throw InvalidArgument("equal_revenue needs h");
    return ValueDistribution::equal_revenue(keyed(args, "h"));
  }
  if (family == "exponential") {
    return ValueDistribution::exponential(args.empty() ? 1.0 : keyed(args, "rate"));
  }
  if (family == "piecewise_cdf") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& item : split(args, ';')) {
      const auto xy = split(item, ',');
      if (xy.size() != 2) throw InvalidArgument("piecewise_cdf knots are 'value,F'");
      pts.emplace_back(parse_number(xy[0]), parse_number(xy[1]));
    }
    return ValueDistribution::piecewise_cdf(std::move(pts));
  }
  throw InvalidArgument("unknown distribution family '" + family + "'");
}

double parse_capacity(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "infinity") return kInf;
  const double c = parse_number(text);
  if (!(c > 0.0)) throw InvalidArgument("capacity must be positive");
  return c;
}

std::string format_capacity(double capacity) {
  if (std::isinf(capacity)) return "inf";
  nlohmann::json j = capacity;
  return j.dump();
}

void ExperimentConfig::validate() const {
  for (const auto& a : agents) {
    (void)parse_distribution(a.distribution);
    if (!(a.capacity > 0.0)) throw InvalidArgument("capacity must be positive");
  }
  for (const auto& m : mechanisms) (void)mechanism_kind_from_string(m);
}

std::vector<AgentSpec> ExperimentConfig::agent_specs() const {
  std::vector<AgentSpec> out;
  for (const auto& a : agents) out.push_back(AgentSpec{parse_distribution(a.distribution), a.capacity});
  return out;
}

std::string config_to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["agents"] = nlohmann::ordered_json::array();
  for (const auto& a : config.agents) {
    nlohmann::ordered_json aj;
    aj["distribution"] = distribution_to_json(parse_distribution(a.distribution));
    if (std::isinf(a.capacity)) aj["capacity"] = "inf";
    else aj["capacity"] = a.capacity;
    j["agents"].push_back(aj);
  }
  j["mechanisms"] = config.mechanisms;
  j["grid_sizes"] = config.grid_sizes;
  j["sample_counts"] = config.sample_counts;
  j["seed"] = config.seed;
  j["output_dir"] = config.output_dir;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("agents")) {
      for (const auto& aj : j.at("agents")) {
        AgentConfig a;
        a.distribution = distribution_from_json(aj.at("distribution")).describe();
        const auto& cap = aj.contains("capacity") ? aj.at("capacity") : nlohmann::json("inf");
        a.capacity = cap.is_string() ? parse_capacity(cap.get<std::string>()) : cap.get<double>();
        c.agents.push_back(a);
      }
    }
    if (j.contains("mechanisms")) c.mechanisms = j.at("mechanisms").get<std::vector<std::string>>();
    if (j.contains("grid_sizes")) c.grid_sizes = j.at("grid_sizes").get<std::vector<std::size_t>>();
    if (j.contains("sample_counts")) c.sample_counts = j.at("sample_counts").get<std::vector<std::size_t>>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace capauct
