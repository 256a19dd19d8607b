#pragma once

// Experiment drivers behind the CLI: capture curves over bundle counts,
// cost-model theta sweeps and parameter-robustness sweeps.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tierprice/bundling.hpp"
#include "tierprice/ingestion.hpp"
#include "tierprice/market.hpp"

namespace tierprice {

struct ExperimentConfig {
  std::optional<std::filesystem::path> input;
  std::optional<DatasetMoments> synth;
  MarketParams params{DemandModel::Ced, 1.1, 20.0, 0.2, 0.0};
  CostModelSpec cost{};
  MarketOptions market_options{};
  std::vector<StrategyKind> strategies{StrategyKind::ProfitWeighted};
  std::vector<int> bundles{1, 2, 3, 4, 5, 6, 7, 8};
  OptimalMode optimal_mode = OptimalMode::Auto;
  std::vector<double> theta_grid;
  std::vector<double> alpha_grid;
  std::vector<double> p0_grid;
  std::vector<double> s0_grid;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Smallest s0 a sweep may use; s0 = 0 lies outside the logit model.
inline constexpr double kMinSweepS0 = 0.01;

struct ResultRow {
  std::string sweep_param;  // empty for plain capture curves
  double sweep_value = 0.0;
  StrategyKind strategy = StrategyKind::ProfitWeighted;
  int num_bundles = 1;
  int effective_bundles = 1;
  double profit = 0.0;
  double profit_capture = 0.0;
  double consumer_surplus = 0.0;
  double surplus_capture = 0.0;
  std::vector<double> prices;
};

struct SweepBaseline {
  std::string sweep_param;
  double sweep_value = 0.0;
  Baseline baseline;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<SweepBaseline> baselines;
  std::map<std::string, std::string> metadata;
};

struct LoadedFlows {
  std::vector<FlowRecord> flows;
  std::map<std::string, std::string> notes;
};

LoadedFlows load_flows(const ExperimentConfig& config);

// Rows for every (strategy, B): fit, bundle, price, evaluate.
ResultTable run_capture_curve(const ExperimentConfig& config);
ResultTable run_capture_curve(const ExperimentConfig& config, const std::vector<FlowRecord>& flows);

// Refits at every theta. profit_capture and surplus_capture hold profit and
// surplus divided by their maxima over the whole sweep.
ResultTable run_theta_sweep(const ExperimentConfig& config);
ResultTable run_theta_sweep(const ExperimentConfig& config, const std::vector<FlowRecord>& flows);

// Refits at every point of each non-empty grid (alpha, p0, s0). Besides the
// per-point rows, emits summary rows "<param>:min" (alpha, p0) or
// "<param>:max" (s0) whose sweep_value is the grid point that attained the
// extremum.
ResultTable run_sensitivity_sweep(const ExperimentConfig& config);
ResultTable run_sensitivity_sweep(const ExperimentConfig& config,
                                  const std::vector<FlowRecord>& flows);

inline constexpr const char* kResultsHeader =
    "sweep_param,sweep_value,strategy,num_bundles,effective_bundles,profit,profit_capture,"
    "consumer_surplus,surplus_capture";

void write_results_csv(std::ostream& out, const ResultTable& table);
// Long format: sweep_param,sweep_value,strategy,num_bundles,bundle,price
void write_prices_csv(std::ostream& out, const ResultTable& table);

// Writes through a temporary file in the same directory, then renames.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer);

// Runs job(i) for i in [0, n) on at most `threads` workers. The first
// exception thrown by any job is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job);

}  // namespace tierprice
