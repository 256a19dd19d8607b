#pragma once

// Flow CSV input/output and the moment-matched synthetic flow generator.
//
// Flow CSV:    flow_id,demand_mbps,distance_miles[,region][,dest_type]
// Fitted CSV:  flow_id,q,d,v,c,class_label
// Params CSV:  one header row and one value row (see write_params_csv)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tierprice/domain.hpp"

namespace tierprice {

struct FlowReadResult {
  std::vector<FlowRecord> flows;  // first-appearance order
  std::size_t dropped_zero = 0;
  std::size_t merged_duplicates = 0;
};

// Parses a flow CSV. Zero-demand rows are dropped and counted; rows sharing
// a flow_id are merged by summing demand (distance and labels of the first
// occurrence are kept).
FlowReadResult read_flows_csv(std::istream& in);
FlowReadResult read_flows_csv(const std::filesystem::path& path);
void write_flows_csv(std::ostream& out, std::span<const FlowRecord> flows);

std::vector<FittedFlow> read_fitted_csv(std::istream& in);
void write_fitted_csv(std::ostream& out, std::span<const FittedFlow> flows);

struct ParamsRecord {
  MarketParams market;
  CostModelSpec cost;
};
ParamsRecord read_params_csv(std::istream& in);
void write_params_csv(std::ostream& out, const ParamsRecord& params);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double x);

struct DatasetMoments {
  std::size_t n_flows = 10000;
  double weighted_avg_distance_miles = 54.0;
  double cv_distance = 0.70;
  double aggregate_gbps = 37.0;
  double cv_demand = 1.71;
  std::uint64_t seed = 1;
};

// Dataset moments of the EU ISP, CDN and Internet2 traces.
std::optional<DatasetMoments> synth_preset(std::string_view name, std::size_t n_flows,
                                           std::uint64_t seed);

// Draws lognormal demands and distances independently. The lognormal shape
// is solved on the drawn sample so the realized (population) CVs equal the
// targets; demands are then scaled to the aggregate and distances to the
// demand-weighted mean. Deterministic for a given seed.
std::vector<FlowRecord> synth_generate(const DatasetMoments& moments);

// Realized moments of a flow set (aggregate reported in Gbps).
DatasetMoments measure_moments(std::span<const FlowRecord> flows);

}  // namespace tierprice
