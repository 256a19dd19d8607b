#pragma once

#include <span>
#include <vector>

#include "tierprice/demand_ced.hpp"
#include "tierprice/demand_logit.hpp"
#include "tierprice/domain.hpp"

namespace tierprice {

struct MarketOptions {
  ced::SurplusForm surplus_form = ced::SurplusForm::UtilityMinusPayment;
  // DestType cost model only: split unlabeled flows into customer and peer
  // parts instead of pricing them at the expected multiplier.
  bool split_dest_type = false;
  logit::SolverOptions solver{};
};

// Reference points for the capture metrics: uniform pricing at P0 and
// per-flow optimal pricing.
struct Baseline {
  double profit_orig = 0.0;
  double profit_max = 0.0;
  double surplus_orig = 0.0;
  double surplus_max = 0.0;
};

// A flow set with fitted valuations and costs plus its cached baselines.
// Flows are held in ascending flow_id order; every index-based API in the
// library refers to this order.
class Market {
 public:
  static Market fit(std::span<const FlowRecord> records, MarketParams params,
                    CostModelSpec cost_spec, MarketOptions options = {});

  // Rebuilds a market from previously fitted flows.
  static Market from_fitted(std::vector<FittedFlow> flows, MarketParams params,
                            CostModelSpec cost_spec, MarketOptions options = {});

  const std::vector<FittedFlow>& flows() const { return flows_; }
  std::size_t size() const { return flows_.size(); }
  const MarketParams& params() const { return params_; }
  const CostModelSpec& cost_spec() const { return cost_spec_; }
  const MarketOptions& options() const { return options_; }
  const Baseline& baseline() const { return baseline_; }

  std::span<const double> q() const { return q_; }
  std::span<const double> v() const { return v_; }
  std::span<const double> c() const { return c_; }

  // Weight of the profit-weighted bundler for each flow.
  std::vector<double> potential_profits() const;

 private:
  Market() = default;
  void index_and_baseline();

  std::vector<FittedFlow> flows_;
  MarketParams params_;
  CostModelSpec cost_spec_;
  MarketOptions options_;
  Baseline baseline_;
  std::vector<double> q_, v_, c_;
};

}  // namespace tierprice
