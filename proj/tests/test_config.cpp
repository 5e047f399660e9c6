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

#include <cmath>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "capauct/config.hpp"
#include "capauct/error.hpp"

namespace capauct {
namespace {

TEST(ParseDistribution, ShortFormsRoundTripThroughDescribe) {
  for (const char* text : {"uniform:0,1", "uniform:2,5", "equal_revenue:h=1000", "exponential:rate=2",
                           "piecewise_cdf:0,0;1,0.45;4,0.55;5,1"}) {
    const ValueDistribution d = parse_distribution(text);
    const ValueDistribution again = parse_distribution(d.describe());
    for (double u : {0.1, 0.5, 0.9}) EXPECT_DOUBLE_EQ(d.quantile(u), again.quantile(u)) << text;
  }
  EXPECT_DOUBLE_EQ(parse_distribution("uniform").upper_support(), 1.0);
  EXPECT_DOUBLE_EQ(virtual_value(parse_distribution("exponential"), 2.0), 1.0);
}

TEST(ParseDistribution, RejectsGarbage) {
  for (const char* text : {"", "gaussian:0,1", "uniform:0", "uniform:1,0", "uniform:0,1x", "equal_revenue:k=3",
                           "piecewise_cdf:0,0;1"})
    EXPECT_THROW(parse_distribution(text), InvalidArgument) << text;
}

TEST(ParseCapacity, NumbersAndInfinity) {
  EXPECT_DOUBLE_EQ(parse_capacity("0.25"), 0.25);
  EXPECT_TRUE(std::isinf(parse_capacity("inf")));
  EXPECT_TRUE(std::isinf(parse_capacity("infinity")));
  EXPECT_THROW(parse_capacity("0"), InvalidArgument);
  EXPECT_THROW(parse_capacity("-1"), InvalidArgument);
  EXPECT_THROW(parse_capacity("big"), InvalidArgument);
  EXPECT_EQ(format_capacity(kInf), "inf");
  EXPECT_DOUBLE_EQ(parse_capacity(format_capacity(0.1)), 0.1);
}

TEST(ExperimentConfig, JsonRoundTrip) {
  ExperimentConfig c;
  c.agents = {{"uniform:0,1", 0.25}, {"exponential:rate=1", kInf}, {"equal_revenue:h=100", 1.0}};
  c.mechanisms = {"FPA", "CSP"};
  c.grid_sizes = {250, 1000};
  c.sample_counts = {100000};
  c.seed = 99;
  c.output_dir = "results/run1";
  EXPECT_NO_THROW(c.validate());
  const ExperimentConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.agent_specs().size(), 3u);
}

TEST(ExperimentConfig, AcceptsObjectFormDistributions) {
  const ExperimentConfig c = config_from_json(R"({
    "agents": [{"distribution": {"kind": "uniform", "lo": 0, "hi": 2}, "capacity": "inf"},
               {"distribution": "exponential:rate=1", "capacity": 0.5}],
    "seed": 7
  })");
  ASSERT_EQ(c.agents.size(), 2u);
  EXPECT_DOUBLE_EQ(parse_distribution(c.agents[0].distribution).upper_support(), 2.0);
  EXPECT_TRUE(std::isinf(c.agents[0].capacity));
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.output_dir, "out");
}

TEST(ExperimentConfig, MalformedInputIsInvalidArgument) {
  EXPECT_THROW(config_from_json("{"), InvalidArgument);
  EXPECT_THROW(config_from_json(R"({"agents": 3})"), InvalidArgument);
  ExperimentConfig c;
  c.agents = {{"uniform:0,1", 1.0}};
  c.mechanisms = {"Dutch"};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.mechanisms.clear();
  c.agents[0].capacity = -2.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

}  // namespace
}  // namespace capauct
