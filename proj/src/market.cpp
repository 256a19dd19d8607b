#include "tierprice/market.hpp"

#include <algorithm>
#include <cmath>

#include "tierprice/cost_models.hpp"
#include "tierprice/error.hpp"

namespace tierprice {

Market Market::fit(std::span<const FlowRecord> records, MarketParams params,
                   CostModelSpec cost_spec, MarketOptions options) {
  validate_params(params);
  cost::validate_spec(cost_spec);

  std::vector<FlowRecord> flows(records.begin(), records.end());
  if (options.split_dest_type && cost_spec.kind == CostKind::DestType)
    flows = cost::split_dest_type(flows, cost_spec.theta);
  if (flows.empty()) throw Error(ErrorCode::InvalidConfig, "no flows to fit");

  std::sort(flows.begin(), flows.end(),
            [](const FlowRecord& a, const FlowRecord& b) { return a.flow_id < b.flow_id; });
  for (std::size_t i = 1; i < flows.size(); ++i)
    if (flows[i].flow_id == flows[i - 1].flow_id)
      throw Error(ErrorCode::InvalidConfig, "duplicate flow_id " + flows[i].flow_id);

  std::vector<double> q(flows.size());
  double d_max = 0.0;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    q[i] = flows[i].demand_mbps;
    d_max = std::max(d_max, flows[i].distance_miles);
  }

  const auto rel = cost::relative_costs(cost_spec, flows);
  std::vector<double> v;
  if (params.model == DemandModel::Ced) {
    v = ced::fit_valuations(q, params.p0, params.alpha);
    cost_spec.gamma = ced::fit_gamma(v, rel, params.p0, params.alpha);
  } else {
    v = logit::fit_valuations(q, params.p0, params.alpha, params.s0);
    cost_spec.gamma = logit::fit_gamma(v, rel, params.p0, params.alpha);
    params.consumer_mass = logit::consumer_mass(q, params.s0);
  }
  cost_spec.beta = cost_spec.gamma * cost_spec.theta * cost::max_pre_base_cost(cost_spec, d_max);
  const auto c = cost::realize_costs(rel, cost_spec.gamma);

  Market m;
  m.params_ = params;
  m.cost_spec_ = cost_spec;
  m.options_ = options;
  m.flows_.reserve(flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    m.flows_.push_back(FittedFlow{flows[i].flow_id, q[i], flows[i].distance_miles, v[i], c[i],
                                  cost::class_label(cost_spec, flows[i])});
  }
  m.index_and_baseline();
  return m;
}

Market Market::from_fitted(std::vector<FittedFlow> flows, MarketParams params,
                           CostModelSpec cost_spec, MarketOptions options) {
  validate_params(params);
  if (flows.empty()) throw Error(ErrorCode::InvalidConfig, "no flows");
  std::sort(flows.begin(), flows.end(),
            [](const FittedFlow& a, const FittedFlow& b) { return a.flow_id < b.flow_id; });
  for (const auto& f : flows)
    if (!(f.c > 0.0) || !(f.q > 0.0))
      throw Error(ErrorCode::DomainError, "fitted flow " + f.flow_id + " is not positive");
  if (params.model == DemandModel::Logit && !(params.consumer_mass > 0.0))
    throw Error(ErrorCode::InvalidConfig, "logit market needs a positive consumer mass");
  Market m;
  m.flows_ = std::move(flows);
  m.params_ = params;
  m.cost_spec_ = cost_spec;
  m.options_ = options;
  m.index_and_baseline();
  return m;
}

void Market::index_and_baseline() {
  const std::size_t n = flows_.size();
  q_.resize(n);
  v_.resize(n);
  c_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    q_[i] = flows_[i].q;
    v_[i] = flows_[i].v;
    c_[i] = flows_[i].c;
  }

  const double alpha = params_.alpha;
  const std::vector<double> uniform(n, params_.p0);
  if (params_.model == DemandModel::Ced) {
    std::vector<double> best(n);
    for (std::size_t i = 0; i < n; ++i) best[i] = ced::optimal_price(c_[i], alpha);
    baseline_.profit_orig = ced::profit(v_, c_, uniform, alpha);
    baseline_.surplus_orig = ced::consumer_surplus(v_, uniform, alpha, options_.surplus_form);
    baseline_.profit_max = ced::profit(v_, c_, best, alpha);
    baseline_.surplus_max = ced::consumer_surplus(v_, best, alpha, options_.surplus_form);
  } else {
    const double mass = params_.consumer_mass;
    auto solver = options_.solver;
    solver.initial_price = params_.p0;
    const auto best = logit::solve_prices(v_, c_, alpha, mass, solver);
    baseline_.profit_orig = logit::profit(v_, uniform, c_, alpha, mass);
    baseline_.surplus_orig = logit::consumer_surplus(v_, uniform, alpha, mass);
    baseline_.profit_max = logit::profit(v_, best.prices, c_, alpha, mass);
    baseline_.surplus_max = logit::consumer_surplus(v_, best.prices, alpha, mass);
  }
}

std::vector<double> Market::potential_profits() const {
  std::vector<double> out(flows_.size());
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    out[i] = params_.model == DemandModel::Ced
                 ? ced::potential_profit(v_[i], c_[i], params_.alpha)
                 : logit::potential_profit(q_[i], params_.alpha, params_.s0,
                                           params_.consumer_mass);
  }
  return out;
}

}  // namespace tierprice
