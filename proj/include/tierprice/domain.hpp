#pragma once

// Core value types shared by every pricing module. Units are fixed:
// demand in Mbps, prices and costs in $/Mbps/month, distance in miles.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tierprice {

enum class Region { Metro, National, International };
enum class DestType { Customer, Peer };

// Class label used by the class-constrained bundler: either a region or a
// destination type, depending on the active cost model.
enum class FlowClass { Metro, National, International, Customer, Peer };

enum class DemandModel { Ced, Logit };
enum class CostKind { Linear, Concave, Regional, DestType };

struct FlowRecord {
  std::string flow_id;
  double demand_mbps = 0.0;
  double distance_miles = 0.0;
  std::optional<Region> region;
  std::optional<DestType> dest_type;
};

struct MarketParams {
  DemandModel model = DemandModel::Ced;
  double alpha = 1.1;
  double p0 = 20.0;
  double s0 = 0.2;             // logit only
  double consumer_mass = 0.0;  // logit only; derived when fitting
};

struct CostModelSpec {
  CostKind kind = CostKind::Linear;
  double theta = 0.2;
  double gamma = 0.0;  // set by fitting
  double beta = 0.0;   // absolute base cost, gamma * theta * max pre-base cost
  double concave_a = 0.5;
  double concave_b = 6.0;
  double concave_c = 1.0;
};

struct FittedFlow {
  std::string flow_id;
  double q = 0.0;
  double d = 0.0;
  double v = 0.0;
  double c = 0.0;
  std::optional<FlowClass> class_label;
};

// Partition of a flow set into `num_bundles` tiers. `assignment[i]` is the
// bundle of flow i, where flows are indexed in the market's canonical order
// (ascending flow_id). Empty bundles are allowed.
struct Bundling {
  std::vector<int> assignment;
  int num_bundles = 1;

  std::size_t size() const { return assignment.size(); }
  // Member indices of every bundle, empty bundles included.
  std::vector<std::vector<std::size_t>> groups() const;
  int effective_bundles() const;
};

// Throws InvalidConfig unless every flow sits in exactly one bundle in range.
void validate_bundling(const Bundling& bundling, std::size_t num_flows);

struct TierOutcome {
  Bundling bundling;
  std::vector<double> prices;  // one per bundle; NaN for empty bundles
  double profit = 0.0;
  double consumer_surplus = 0.0;
  double profit_capture = 0.0;
  double surplus_capture = 0.0;
};

void validate_params(const MarketParams& params);

std::string_view to_string(Region r);
std::string_view to_string(DestType t);
std::string_view to_string(FlowClass c);
std::string_view to_string(DemandModel m);
std::string_view to_string(CostKind k);

std::optional<Region> parse_region(std::string_view s);
std::optional<DestType> parse_dest_type(std::string_view s);
std::optional<FlowClass> parse_flow_class(std::string_view s);
std::optional<DemandModel> parse_demand_model(std::string_view s);
std::optional<CostKind> parse_cost_kind(std::string_view s);

FlowClass to_class(Region r);
FlowClass to_class(DestType t);

}  // namespace tierprice
