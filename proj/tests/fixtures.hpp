#pragma once

#include <random>
#include <string>
#include <vector>

#include "tierprice/domain.hpp"
#include "tierprice/ingestion.hpp"
#include "tierprice/market.hpp"

namespace fixture {

// Random flows: lognormal demand, uniform distance in [1, 1000) miles, and a
// random region label.
inline std::vector<tierprice::FlowRecord> random_flows(std::size_t n, std::uint64_t seed,
                                                       bool labels = false) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> demand(3.0, 1.2);
  std::uniform_real_distribution<double> distance(1.0, 1000.0);
  std::uniform_int_distribution<int> region(0, 2);
  std::vector<tierprice::FlowRecord> flows(n);
  for (std::size_t i = 0; i < n; ++i) {
    flows[i].flow_id = "r" + std::to_string(1000 + i);
    flows[i].demand_mbps = demand(rng);
    flows[i].distance_miles = distance(rng);
    if (labels) flows[i].region = static_cast<tierprice::Region>(region(rng));
  }
  return flows;
}

inline tierprice::MarketParams ced_params(double alpha = 1.1, double p0 = 20.0) {
  return {tierprice::DemandModel::Ced, alpha, p0, 0.2, 0.0};
}

inline tierprice::MarketParams logit_params(double alpha = 1.1, double p0 = 20.0,
                                            double s0 = 0.2) {
  return {tierprice::DemandModel::Logit, alpha, p0, s0, 0.0};
}

inline tierprice::CostModelSpec linear_cost(double theta = 0.2) {
  tierprice::CostModelSpec spec;
  spec.kind = tierprice::CostKind::Linear;
  spec.theta = theta;
  return spec;
}

// Synthetic flows with the EU ISP dataset moments.
inline std::vector<tierprice::FlowRecord> eu_like(std::size_t n = 10000, std::uint64_t seed = 1) {
  return tierprice::synth_generate(*tierprice::synth_preset("eu-isp", n, seed));
}

}  // namespace fixture
