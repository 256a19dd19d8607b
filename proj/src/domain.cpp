#include "tierprice/domain.hpp"

#include <algorithm>
#include <cmath>

#include "tierprice/error.hpp"

namespace tierprice {

std::vector<std::vector<std::size_t>> Bundling::groups() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_bundles));
  for (std::size_t i = 0; i < assignment.size(); ++i)
    out[static_cast<std::size_t>(assignment[i])].push_back(i);
  return out;
}

int Bundling::effective_bundles() const {
  std::vector<bool> used(static_cast<std::size_t>(num_bundles), false);
  for (int b : assignment) used[static_cast<std::size_t>(b)] = true;
  return static_cast<int>(std::count(used.begin(), used.end(), true));
}

void validate_bundling(const Bundling& bundling, std::size_t num_flows) {
  if (bundling.num_bundles < 1)
    throw Error(ErrorCode::InvalidConfig, "bundle count must be at least 1");
  if (bundling.assignment.size() != num_flows)
    throw Error(ErrorCode::InvalidConfig, "bundling does not cover the flow set");
  for (int b : bundling.assignment)
    if (b < 0 || b >= bundling.num_bundles)
      throw Error(ErrorCode::InvalidConfig, "bundle index out of range");
}

void validate_params(const MarketParams& params) {
  if (!std::isfinite(params.p0) || params.p0 <= 0.0)
    throw Error(ErrorCode::InvalidPrice, "P0 must be positive");
  if (!std::isfinite(params.alpha))
    throw Error(ErrorCode::InvalidAlpha, "alpha must be finite");
  switch (params.model) {
    case DemandModel::Ced:
      if (params.alpha <= 1.0)
        throw Error(ErrorCode::InvalidAlpha, "CED requires alpha > 1");
      break;
    case DemandModel::Logit:
      if (params.alpha <= 0.0)
        throw Error(ErrorCode::InvalidAlpha, "logit requires alpha > 0");
      if (!(params.s0 > 0.0 && params.s0 < 1.0))
        throw Error(ErrorCode::InvalidShare, "s0 must lie in (0, 1)");
      if (params.consumer_mass < 0.0 || !std::isfinite(params.consumer_mass))
        throw Error(ErrorCode::InvalidConfig, "consumer mass must be positive");
      break;
  }
}

std::string_view to_string(Region r) {
  switch (r) {
    case Region::Metro: return "metro";
    case Region::National: return "national";
    case Region::International: return "international";
  }
  return "";
}

std::string_view to_string(DestType t) {
  return t == DestType::Customer ? "customer" : "peer";
}

std::string_view to_string(FlowClass c) {
  switch (c) {
    case FlowClass::Metro: return "metro";
    case FlowClass::National: return "national";
    case FlowClass::International: return "international";
    case FlowClass::Customer: return "customer";
    case FlowClass::Peer: return "peer";
  }
  return "";
}

std::string_view to_string(DemandModel m) {
  return m == DemandModel::Ced ? "ced" : "logit";
}

std::string_view to_string(CostKind k) {
  switch (k) {
    case CostKind::Linear: return "linear";
    case CostKind::Concave: return "concave";
    case CostKind::Regional: return "regional";
    case CostKind::DestType: return "dest-type";
  }
  return "";
}

std::optional<Region> parse_region(std::string_view s) {
  if (s == "metro") return Region::Metro;
  if (s == "national") return Region::National;
  if (s == "international") return Region::International;
  return std::nullopt;
}

std::optional<DestType> parse_dest_type(std::string_view s) {
  if (s == "customer") return DestType::Customer;
  if (s == "peer") return DestType::Peer;
  return std::nullopt;
}

std::optional<FlowClass> parse_flow_class(std::string_view s) {
  if (auto r = parse_region(s)) return to_class(*r);
  if (auto t = parse_dest_type(s)) return to_class(*t);
  return std::nullopt;
}

std::optional<DemandModel> parse_demand_model(std::string_view s) {
  if (s == "ced") return DemandModel::Ced;
  if (s == "logit") return DemandModel::Logit;
  return std::nullopt;
}

std::optional<CostKind> parse_cost_kind(std::string_view s) {
  if (s == "linear") return CostKind::Linear;
  if (s == "concave") return CostKind::Concave;
  if (s == "regional") return CostKind::Regional;
  if (s == "dest-type") return CostKind::DestType;
  return std::nullopt;
}

FlowClass to_class(Region r) {
  switch (r) {
    case Region::Metro: return FlowClass::Metro;
    case Region::National: return FlowClass::National;
    case Region::International: return FlowClass::International;
  }
  return FlowClass::Metro;
}

FlowClass to_class(DestType t) {
  return t == DestType::Customer ? FlowClass::Customer : FlowClass::Peer;
}

}  // namespace tierprice
