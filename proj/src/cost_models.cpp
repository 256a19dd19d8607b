#include "tierprice/cost_models.hpp"

#include <algorithm>
#include <cmath>

#include "tierprice/error.hpp"

namespace tierprice::cost {

namespace {

double concave_shape(const CostModelSpec& spec, double d, double d_max) {
  if (d <= 0.0 || d_max <= 0.0) return kConcaveFloor;
  const double x = d / d_max;
  const double y = spec.concave_a * std::log(x) / std::log(spec.concave_b) + spec.concave_c;
  return std::max(kConcaveFloor, y);
}

}  // namespace

void validate_spec(const CostModelSpec& spec) {
  if (!std::isfinite(spec.theta) || spec.theta < 0.0)
    throw Error(ErrorCode::InvalidConfig, "theta must be nonnegative");
  if (spec.kind == CostKind::DestType && spec.theta > 1.0)
    throw Error(ErrorCode::InvalidConfig, "dest-type theta is a fraction in [0, 1]");
  if (spec.kind == CostKind::Concave &&
      (spec.concave_a <= 0.0 || spec.concave_b <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "concave model needs a > 0 and b > 1");
}

Region classify_region(const FlowRecord& flow) {
  if (flow.region) return *flow.region;
  if (flow.distance_miles < kMetroMiles) return Region::Metro;
  if (flow.distance_miles < kNationalMiles) return Region::National;
  return Region::International;
}

double dest_type_multiplier(const FlowRecord& flow, double theta) {
  if (flow.dest_type) return *flow.dest_type == DestType::Customer ? 1.0 : 2.0;
  return theta * 1.0 + (1.0 - theta) * 2.0;
}

double max_pre_base_cost(const CostModelSpec& spec, double d_max) {
  switch (spec.kind) {
    case CostKind::Linear:
      return d_max;
    case CostKind::Concave:
      // The shape is increasing in d, so the maximum sits at d_max.
      return std::max(kConcaveFloor, spec.concave_c);
    case CostKind::Regional:
    case CostKind::DestType:
      return 0.0;
  }
  return 0.0;
}

double relative_cost(const CostModelSpec& spec, const FlowRecord& flow, double d_max) {
  const double d = flow.distance_miles;
  double value = 0.0;
  switch (spec.kind) {
    case CostKind::Linear:
      value = d + spec.theta * max_pre_base_cost(spec, d_max);
      break;
    case CostKind::Concave:
      value = concave_shape(spec, d, d_max) + spec.theta * max_pre_base_cost(spec, d_max);
      break;
    case CostKind::Regional:
      switch (classify_region(flow)) {
        case Region::Metro: value = 1.0; break;
        case Region::National: value = std::pow(2.0, spec.theta); break;
        case Region::International: value = std::pow(3.0, spec.theta); break;
      }
      break;
    case CostKind::DestType:
      value = d * dest_type_multiplier(flow, spec.theta);
      break;
  }
  if (!std::isfinite(value) || value < 0.0)
    throw Error(ErrorCode::NonPositiveCost, "relative cost of flow " + flow.flow_id);
  return value;
}

std::vector<double> relative_costs(const CostModelSpec& spec,
                                   std::span<const FlowRecord> flows) {
  validate_spec(spec);
  double d_max = 0.0;
  for (const auto& f : flows) d_max = std::max(d_max, f.distance_miles);

  std::vector<double> rel;
  rel.reserve(flows.size());
  for (const auto& f : flows) rel.push_back(relative_cost(spec, f, d_max));

  const double top = rel.empty() ? 0.0 : *std::max_element(rel.begin(), rel.end());
  if (!(top > 0.0))
    throw Error(ErrorCode::NonPositiveCost, "every relative cost is zero");
  const double floor = kCostFloorFraction * top;
  for (double& r : rel) r = std::max(r, floor);
  return rel;
}

std::vector<double> realize_costs(std::span<const double> relative, double gamma) {
  std::vector<double> out(relative.size());
  std::transform(relative.begin(), relative.end(), out.begin(),
                 [gamma](double r) { return gamma * r; });
  return out;
}

std::optional<FlowClass> class_label(const CostModelSpec& spec, const FlowRecord& flow) {
  switch (spec.kind) {
    case CostKind::Regional:
      return to_class(classify_region(flow));
    case CostKind::DestType:
      if (flow.dest_type) return to_class(*flow.dest_type);
      return std::nullopt;
    case CostKind::Linear:
    case CostKind::Concave:
      if (flow.region) return to_class(*flow.region);
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<FlowRecord> split_dest_type(std::span<const FlowRecord> flows, double theta) {
  std::vector<FlowRecord> out;
  out.reserve(flows.size() * 2);
  for (const auto& f : flows) {
    if (f.dest_type) {
      out.push_back(f);
      continue;
    }
    FlowRecord customer = f;
    customer.flow_id += "#customer";
    customer.demand_mbps = theta * f.demand_mbps;
    customer.dest_type = DestType::Customer;
    FlowRecord peer = f;
    peer.flow_id += "#peer";
    peer.demand_mbps = (1.0 - theta) * f.demand_mbps;
    peer.dest_type = DestType::Peer;
    if (customer.demand_mbps > 0.0) out.push_back(std::move(customer));
    if (peer.demand_mbps > 0.0) out.push_back(std::move(peer));
  }
  return out;
}

}  // namespace tierprice::cost
