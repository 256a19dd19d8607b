#pragma once

// Distance/label based relative costs f(d) and realized unit costs.
//
//   Linear    f = d + theta * d_max
//   Concave   f = max(eps, a * log_b(d / d_max) + c) + theta * max_pre_base
//   Regional  f = 1, 2^theta, 3^theta   (metro, national, international)
//   DestType  f = d * m, m = 1 (customer), 2 (peer), theta + 2 (1 - theta)
//             for unlabeled flows (expected multiplier)
//
// Realized costs are c = gamma * f. Base terms are expressed relative to
// gamma, so the absolute base cost is beta = gamma * theta * max_pre_base.

#include <span>
#include <vector>

#include "tierprice/domain.hpp"

namespace tierprice::cost {

inline constexpr double kConcaveFloor = 0.05;
// Relative costs are clamped to at least this fraction of the largest one.
inline constexpr double kCostFloorFraction = 1e-6;
inline constexpr double kMetroMiles = 10.0;
inline constexpr double kNationalMiles = 100.0;

Region classify_region(const FlowRecord& flow);

double dest_type_multiplier(const FlowRecord& flow, double theta);

// Largest cost before the base term, over any flow with distance <= d_max.
// Zero for Regional and DestType, which carry no base term.
double max_pre_base_cost(const CostModelSpec& spec, double d_max);

// Relative cost of one flow, base term included, before floor clamping.
double relative_cost(const CostModelSpec& spec, const FlowRecord& flow, double d_max);

// Relative costs for a whole flow set, with the floor applied.
std::vector<double> relative_costs(const CostModelSpec& spec,
                                   std::span<const FlowRecord> flows);

std::vector<double> realize_costs(std::span<const double> relative, double gamma);

// Label used by the class-constrained bundler, if the cost model defines one.
std::optional<FlowClass> class_label(const CostModelSpec& spec, const FlowRecord& flow);

// Splits every flow without a dest_type label into a customer part carrying
// theta of its demand and a peer part carrying the rest. Zero parts are
// dropped.
std::vector<FlowRecord> split_dest_type(std::span<const FlowRecord> flows, double theta);

void validate_spec(const CostModelSpec& spec);

}  // namespace tierprice::cost
