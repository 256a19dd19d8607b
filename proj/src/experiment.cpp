#include "tierprice/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>
#include <unistd.h>

#include "tierprice/error.hpp"

namespace tierprice {

namespace {

void validate_config(const ExperimentConfig& config) {
  if (config.strategies.empty()) throw Error(ErrorCode::InvalidConfig, "no strategies selected");
  if (config.bundles.empty()) throw Error(ErrorCode::InvalidConfig, "no bundle counts selected");
  for (int b : config.bundles)
    if (b < 1) throw Error(ErrorCode::InvalidConfig, "bundle counts must be at least 1");
}

struct Job {
  const Market* market;
  std::string sweep_param;
  double sweep_value;
  StrategyKind strategy;
  int bundles;
};

std::vector<ResultRow> run_jobs(const std::vector<Job>& jobs, const ExperimentConfig& config) {
  std::vector<ResultRow> rows(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t k) {
    const auto& job = jobs[k];
    const auto bundling = build_bundles(job.strategy, *job.market, job.bundles, config.optimal_mode);
    const auto outcome = evaluate_bundling(*job.market, bundling);
    auto& row = rows[k];
    row.sweep_param = job.sweep_param;
    row.sweep_value = job.sweep_value;
    row.strategy = job.strategy;
    row.num_bundles = job.bundles;
    row.effective_bundles = bundling.effective_bundles();
    row.profit = outcome.profit;
    row.profit_capture = outcome.profit_capture;
    row.consumer_surplus = outcome.consumer_surplus;
    row.surplus_capture = outcome.surplus_capture;
    row.prices = outcome.prices;
  });
  return rows;
}

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.sweep_param != b.sweep_param) return a.sweep_param < b.sweep_param;
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    if (a.strategy != b.strategy) return a.strategy < b.strategy;
    return a.num_bundles < b.num_bundles;
  });
}

void note_optimal_mode(ResultTable& table, const ExperimentConfig& config, const Market& market) {
  if (std::find(config.strategies.begin(), config.strategies.end(), StrategyKind::Optimal) ==
      config.strategies.end())
    return;
  table.metadata["optimal_mode"] =
      std::string(to_string(resolve_optimal_mode(market, config.optimal_mode)));
}

std::vector<Market> fit_all(const std::vector<FlowRecord>& flows,
                            const std::vector<std::pair<MarketParams, CostModelSpec>>& setups,
                            const ExperimentConfig& config) {
  std::vector<std::optional<Market>> fitted(setups.size());
  parallel_for(setups.size(), config.threads, [&](std::size_t k) {
    fitted[k] = Market::fit(flows, setups[k].first, setups[k].second, config.market_options);
  });
  std::vector<Market> out;
  out.reserve(fitted.size());
  for (auto& m : fitted) out.push_back(std::move(*m));
  return out;
}

std::string format_grid_value(double x) { return format_double(x); }

}  // namespace

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

LoadedFlows load_flows(const ExperimentConfig& config) {
  LoadedFlows out;
  if (config.input && config.synth)
    throw Error(ErrorCode::InvalidConfig, "give either an input CSV or a synthetic preset, not both");
  if (config.input) {
    auto read = read_flows_csv(*config.input);
    out.flows = std::move(read.flows);
    out.notes["input"] = config.input->string();
    out.notes["dropped_zero_demand_rows"] = std::to_string(read.dropped_zero);
    out.notes["merged_duplicate_rows"] = std::to_string(read.merged_duplicates);
  } else if (config.synth) {
    out.flows = synth_generate(*config.synth);
    out.notes["input"] = "synthetic";
    out.notes["synthetic_seed"] = std::to_string(config.synth->seed);
    out.notes["synthetic_assumption"] =
        "demand and distance sampled independently (lognormal, moment-matched)";
  } else {
    throw Error(ErrorCode::InvalidConfig, "no input: pass an input CSV or a synthetic preset");
  }
  return out;
}

ResultTable run_capture_curve(const ExperimentConfig& config) {
  auto loaded = load_flows(config);
  auto table = run_capture_curve(config, loaded.flows);
  table.metadata.insert(loaded.notes.begin(), loaded.notes.end());
  return table;
}

ResultTable run_capture_curve(const ExperimentConfig& config, const std::vector<FlowRecord>& flows) {
  validate_config(config);
  const auto market = Market::fit(flows, config.params, config.cost, config.market_options);
  std::vector<Job> jobs;
  for (auto s : config.strategies)
    for (int b : config.bundles) jobs.push_back({&market, "", 0.0, s, b});

  ResultTable table;
  table.rows = run_jobs(jobs, config);
  sort_rows(table.rows);
  table.baselines.push_back({"", 0.0, market.baseline()});
  table.metadata["flows"] = std::to_string(market.size());
  table.metadata["gamma"] = format_double(market.cost_spec().gamma);
  note_optimal_mode(table, config, market);
  return table;
}

ResultTable run_theta_sweep(const ExperimentConfig& config) {
  auto loaded = load_flows(config);
  auto table = run_theta_sweep(config, loaded.flows);
  table.metadata.insert(loaded.notes.begin(), loaded.notes.end());
  return table;
}

ResultTable run_theta_sweep(const ExperimentConfig& config, const std::vector<FlowRecord>& flows) {
  validate_config(config);
  if (config.theta_grid.empty()) throw Error(ErrorCode::InvalidConfig, "theta grid is empty");

  std::vector<std::pair<MarketParams, CostModelSpec>> setups;
  for (double theta : config.theta_grid) {
    auto cost = config.cost;
    cost.theta = theta;
    setups.emplace_back(config.params, cost);
  }
  const auto markets = fit_all(flows, setups, config);

  std::vector<Job> jobs;
  for (std::size_t k = 0; k < markets.size(); ++k)
    for (auto s : config.strategies)
      for (int b : config.bundles) jobs.push_back({&markets[k], "theta", config.theta_grid[k], s, b});

  ResultTable table;
  table.rows = run_jobs(jobs, config);
  double top_profit = 0.0, top_surplus = 0.0;
  for (const auto& r : table.rows) {
    top_profit = std::max(top_profit, r.profit);
    top_surplus = std::max(top_surplus, r.consumer_surplus);
  }
  for (auto& r : table.rows) {
    r.profit_capture = top_profit > 0.0 ? r.profit / top_profit : 0.0;
    r.surplus_capture = top_surplus > 0.0 ? r.consumer_surplus / top_surplus : 0.0;
  }
  sort_rows(table.rows);
  for (std::size_t k = 0; k < markets.size(); ++k)
    table.baselines.push_back({"theta", config.theta_grid[k], markets[k].baseline()});
  table.metadata["capture_columns"] = "profit and surplus normalized by the sweep maximum";
  note_optimal_mode(table, config, markets.front());
  return table;
}

ResultTable run_sensitivity_sweep(const ExperimentConfig& config) {
  auto loaded = load_flows(config);
  auto table = run_sensitivity_sweep(config, loaded.flows);
  table.metadata.insert(loaded.notes.begin(), loaded.notes.end());
  return table;
}

ResultTable run_sensitivity_sweep(const ExperimentConfig& config,
                                  const std::vector<FlowRecord>& flows) {
  validate_config(config);
  if (config.alpha_grid.empty() && config.p0_grid.empty() && config.s0_grid.empty())
    throw Error(ErrorCode::InvalidConfig, "no sensitivity grid given");
  if (!config.s0_grid.empty() && config.params.model != DemandModel::Logit)
    throw Error(ErrorCode::InvalidConfig, "s0 sweeps apply to the logit model only");

  struct Point {
    std::string param;
    double value;
  };
  std::vector<Point> points;
  std::vector<std::pair<MarketParams, CostModelSpec>> setups;
  for (double a : config.alpha_grid) {
    auto p = config.params;
    p.alpha = a;
    points.push_back({"alpha", a});
    setups.emplace_back(p, config.cost);
  }
  for (double x : config.p0_grid) {
    auto p = config.params;
    p.p0 = x;
    points.push_back({"p0", x});
    setups.emplace_back(p, config.cost);
  }
  for (double s : config.s0_grid) {
    auto p = config.params;
    p.s0 = std::max(s, kMinSweepS0);
    points.push_back({"s0", p.s0});
    setups.emplace_back(p, config.cost);
  }
  for (const auto& [p, c] : setups) validate_params(p);
  const auto markets = fit_all(flows, setups, config);

  std::vector<Job> jobs;
  for (std::size_t k = 0; k < markets.size(); ++k)
    for (auto s : config.strategies)
      for (int b : config.bundles) jobs.push_back({&markets[k], points[k].param, points[k].value, s, b});

  ResultTable table;
  table.rows = run_jobs(jobs, config);

  // Extremum over each grid: minimum for alpha and p0, maximum for s0.
  std::map<std::tuple<std::string, StrategyKind, int>, ResultRow> extreme;
  for (const auto& r : table.rows) {
    const bool use_max = r.sweep_param == "s0";
    const auto key = std::make_tuple(r.sweep_param, r.strategy, r.num_bundles);
    auto it = extreme.find(key);
    if (it == extreme.end()) {
      extreme.emplace(key, r);
      continue;
    }
    const bool better = use_max ? r.profit_capture > it->second.profit_capture
                                : r.profit_capture < it->second.profit_capture;
    if (better) it->second = r;
  }
  for (auto& [key, r] : extreme) {
    r.sweep_param += r.sweep_param == "s0" ? ":max" : ":min";
    table.rows.push_back(r);
  }
  sort_rows(table.rows);
  for (std::size_t k = 0; k < markets.size(); ++k)
    table.baselines.push_back({points[k].param, points[k].value, markets[k].baseline()});
  if (!markets.empty()) note_optimal_mode(table, config, markets.front());
  return table;
}

void write_results_csv(std::ostream& out, const ResultTable& table) {
  out << kResultsHeader << '\n';
  for (const auto& r : table.rows) {
    out << (r.sweep_param.empty() ? "none" : r.sweep_param) << ','
        << (r.sweep_param.empty() ? "" : format_grid_value(r.sweep_value)) << ','
        << to_string(r.strategy) << ',' << r.num_bundles << ',' << r.effective_bundles << ','
        << format_double(r.profit) << ',' << format_double(r.profit_capture) << ','
        << format_double(r.consumer_surplus) << ',' << format_double(r.surplus_capture) << '\n';
  }
}

void write_prices_csv(std::ostream& out, const ResultTable& table) {
  out << "sweep_param,sweep_value,strategy,num_bundles,bundle,price\n";
  for (const auto& r : table.rows) {
    for (std::size_t b = 0; b < r.prices.size(); ++b) {
      if (std::isnan(r.prices[b])) continue;
      out << (r.sweep_param.empty() ? "none" : r.sweep_param) << ','
          << (r.sweep_param.empty() ? "" : format_grid_value(r.sweep_value)) << ','
          << to_string(r.strategy) << ',' << r.num_bundles << ',' << b << ','
          << format_double(r.prices[b]) << '\n';
    }
  }
}

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    writer(out);
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto " + path.string());
  }
}

}  // namespace tierprice
