// tierprice: fit demand and cost models to flow data and report tiered
// pricing outcomes.
//
//   tierprice synth       --synth-preset eu-isp --out flows.csv
//   tierprice fit         --input flows.csv --out fitted.csv
//   tierprice capture     --synth-preset eu-isp --strategy optimal,profit-weighted --out cap.csv
//   tierprice theta-sweep --input flows.csv --theta-grid 0,0.2,0.5,1 --out theta.csv
//   tierprice sensitivity --input flows.csv --alpha-grid 1.1,2,5,10 --out alpha.csv
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iostream>

#include "tierprice/error.hpp"
#include "tierprice/experiment.hpp"
#include "tierprice/ingestion.hpp"

namespace {

using namespace tierprice;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CliOptions {
  std::string input;
  std::string preset;
  std::size_t n_flows = 10000;
  std::uint64_t seed = 1;
  std::optional<double> wavg_distance, cv_distance, aggregate_gbps, cv_demand;
  std::string demand_model = "ced";
  std::string cost_model = "linear";
  double alpha = 1.1;
  double p0 = 20.0;
  double theta = 0.2;
  double s0 = 0.2;
  std::string bundles = "1..8";
  std::vector<std::string> strategies{"profit-weighted"};
  std::string optimal_mode = "auto";
  std::string surplus_form = "utility";
  bool split_dest_type = false;
  std::vector<double> theta_grid, alpha_grid, p0_grid, s0_grid;
  unsigned threads = 0;
  std::string out;
  std::string params_out;
  std::string prices_out;
  std::string meta_out;
};

std::vector<int> parse_bundles(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v < 1)
      throw Error(ErrorCode::InvalidConfig, "bad bundle count '" + std::string(s) + "'");
    return v;
  };
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      const int lo = to_int(item.substr(0, dots));
      const int hi = to_int(item.substr(dots + 2));
      if (hi < lo) throw Error(ErrorCode::InvalidConfig, "empty bundle range " + std::string(item));
      for (int b = lo; b <= hi; ++b) out.push_back(b);
    } else {
      out.push_back(to_int(item));
    }
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ExperimentConfig build_config(const CliOptions& o) {
  ExperimentConfig cfg;
  if (!o.input.empty()) cfg.input = o.input;
  if (!o.preset.empty()) {
    auto m = synth_preset(o.preset, o.n_flows, o.seed);
    if (!m) throw Error(ErrorCode::InvalidConfig, "unknown preset " + o.preset);
    cfg.synth = *m;
  }
  if (cfg.synth) {
    if (o.wavg_distance) cfg.synth->weighted_avg_distance_miles = *o.wavg_distance;
    if (o.cv_distance) cfg.synth->cv_distance = *o.cv_distance;
    if (o.aggregate_gbps) cfg.synth->aggregate_gbps = *o.aggregate_gbps;
    if (o.cv_demand) cfg.synth->cv_demand = *o.cv_demand;
  }

  const auto model = parse_demand_model(o.demand_model);
  if (!model) throw Error(ErrorCode::InvalidConfig, "unknown demand model " + o.demand_model);
  const auto kind = parse_cost_kind(o.cost_model);
  if (!kind) throw Error(ErrorCode::InvalidConfig, "unknown cost model " + o.cost_model);
  cfg.params.model = *model;
  cfg.params.alpha = o.alpha;
  cfg.params.p0 = o.p0;
  cfg.params.s0 = o.s0;
  cfg.cost.kind = *kind;
  cfg.cost.theta = o.theta;

  cfg.strategies.clear();
  for (const auto& s : o.strategies) {
    const auto k = parse_strategy(s);
    if (!k) throw Error(ErrorCode::InvalidConfig, "unknown strategy " + s);
    cfg.strategies.push_back(*k);
  }
  cfg.bundles = parse_bundles(o.bundles);
  const auto mode = parse_optimal_mode(o.optimal_mode);
  if (!mode) throw Error(ErrorCode::InvalidConfig, "unknown optimal mode " + o.optimal_mode);
  cfg.optimal_mode = *mode;
  if (o.surplus_form == "utility")
    cfg.market_options.surplus_form = ced::SurplusForm::UtilityMinusPayment;
  else if (o.surplus_form == "printed")
    cfg.market_options.surplus_form = ced::SurplusForm::AsPrinted;
  else
    throw Error(ErrorCode::InvalidConfig, "unknown surplus form " + o.surplus_form);
  cfg.market_options.split_dest_type = o.split_dest_type;
  cfg.theta_grid = o.theta_grid;
  cfg.alpha_grid = o.alpha_grid;
  cfg.p0_grid = o.p0_grid;
  cfg.s0_grid = o.s0_grid;
  cfg.threads = o.threads;
  return cfg;
}

void add_input_options(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--input", o.input, "Flow CSV (flow_id,demand_mbps,distance_miles,region,dest_type)");
  cmd->add_option("--synth-preset", o.preset, "Synthetic dataset moments")
      ->check(CLI::IsMember({"eu-isp", "cdn", "internet2"}));
  cmd->add_option("--n-flows", o.n_flows, "Synthetic flow count")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Synthetic generator seed")->capture_default_str();
  cmd->add_option("--wavg-distance", o.wavg_distance, "Override demand-weighted mean distance (miles)");
  cmd->add_option("--cv-distance", o.cv_distance, "Override distance CV");
  cmd->add_option("--aggregate-gbps", o.aggregate_gbps, "Override aggregate demand (Gbps)");
  cmd->add_option("--cv-demand", o.cv_demand, "Override demand CV");
}

void add_model_options(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--demand-model", o.demand_model)->check(CLI::IsMember({"ced", "logit"}))->capture_default_str();
  cmd->add_option("--cost-model", o.cost_model)
      ->check(CLI::IsMember({"linear", "concave", "regional", "dest-type"}))
      ->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "Price sensitivity")->capture_default_str();
  cmd->add_option("--p0", o.p0, "Blended rate ($/Mbps/month)")->capture_default_str();
  cmd->add_option("--theta", o.theta, "Cost model tuning parameter")->capture_default_str();
  cmd->add_option("--s0", o.s0, "Logit outside-option share")->capture_default_str();
  cmd->add_option("--surplus-form", o.surplus_form, "CED surplus: utility (minus p*q) or printed (minus p)")
      ->check(CLI::IsMember({"utility", "printed"}))
      ->capture_default_str();
  cmd->add_flag("--split-dest-type", o.split_dest_type,
                "Split unlabeled flows into customer/peer parts (dest-type cost model)");
}

void add_experiment_options(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--bundles", o.bundles, "Bundle counts, e.g. 1..8 or 1,2,4")->capture_default_str();
  cmd->add_option("--strategy", o.strategies, "Bundling strategies")
      ->delimiter(',')
      ->check(CLI::IsMember({"optimal", "demand-weighted", "cost-weighted", "profit-weighted",
                             "cost-division", "index-division", "class-constrained"}));
  cmd->add_option("--optimal-mode", o.optimal_mode)
      ->check(CLI::IsMember({"auto", "full-partition", "contiguous-by-cost"}))
      ->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (0: all cores)")->capture_default_str();
  cmd->add_option("--prices-out", o.prices_out, "Per-bundle price CSV");
  cmd->add_option("--meta-out", o.meta_out, "Run metadata JSON");
}

nlohmann::json metadata_json(const ResultTable& table, const std::string& command) {
  nlohmann::json meta;
  meta["command"] = command;
  for (const auto& [k, v] : table.metadata) meta[k] = v;
  auto& base = meta["baselines"] = nlohmann::json::array();
  for (const auto& b : table.baselines) {
    base.push_back({{"sweep_param", b.sweep_param},
                    {"sweep_value", b.sweep_value},
                    {"profit_orig", b.baseline.profit_orig},
                    {"profit_max", b.baseline.profit_max},
                    {"surplus_orig", b.baseline.surplus_orig},
                    {"surplus_max", b.baseline.surplus_max}});
  }
  return meta;
}

void write_table(const ResultTable& table, const CliOptions& o, const std::string& command) {
  if (o.out.empty()) {
    write_results_csv(std::cout, table);
  } else {
    write_atomically(o.out, [&](std::ostream& os) { write_results_csv(os, table); });
  }
  if (!o.prices_out.empty())
    write_atomically(o.prices_out, [&](std::ostream& os) { write_prices_csv(os, table); });
  if (!o.meta_out.empty())
    write_atomically(o.meta_out, [&](std::ostream& os) {
      os << metadata_json(table, command).dump(2) << '\n';
    });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tiered transit pricing: fit, bundle and evaluate"};
  app.set_config("--config", "", "INI/TOML config file; command-line flags take precedence");
  app.require_subcommand(1);
  CliOptions o;

  auto* synth = app.add_subcommand("synth", "Generate a moment-matched synthetic flow CSV");
  add_input_options(synth, o);
  synth->add_option("--out", o.out, "Output flow CSV");

  auto* fit = app.add_subcommand("fit", "Fit valuations and costs; write fitted flows and parameters");
  add_input_options(fit, o);
  add_model_options(fit, o);
  fit->add_option("--out", o.out, "Fitted flow CSV")->required();
  fit->add_option("--params-out", o.params_out, "Fitted parameter CSV (default: <out>.params.csv)");

  auto* capture = app.add_subcommand("capture", "Profit and surplus capture over bundle counts");
  auto* theta = app.add_subcommand("theta-sweep", "Cost-model theta sweep normalized to the sweep maximum");
  auto* sens = app.add_subcommand("sensitivity", "Worst/best capture over alpha, P0 or s0 grids");
  for (auto* cmd : {capture, theta, sens}) {
    add_input_options(cmd, o);
    add_model_options(cmd, o);
    add_experiment_options(cmd, o);
    cmd->add_option("--out", o.out, "Result CSV (stdout when omitted)");
  }
  theta->add_option("--theta-grid", o.theta_grid, "Theta values")->delimiter(',')->required();
  sens->add_option("--alpha-grid", o.alpha_grid, "Alpha values")->delimiter(',');
  sens->add_option("--p0-grid", o.p0_grid, "P0 values")->delimiter(',');
  sens->add_option("--s0-grid", o.s0_grid, "s0 values (clamped to >= 0.01)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (synth->parsed()) {
      if (o.preset.empty()) throw Error(ErrorCode::InvalidConfig, "synth needs --synth-preset");
      const auto cfg = build_config(o);
      const auto flows = synth_generate(*cfg.synth);
      if (o.out.empty())
        write_flows_csv(std::cout, flows);
      else
        write_atomically(o.out, [&](std::ostream& os) { write_flows_csv(os, flows); });
    } else if (fit->parsed()) {
      const auto cfg = build_config(o);
      const auto loaded = load_flows(cfg);
      const auto market = Market::fit(loaded.flows, cfg.params, cfg.cost, cfg.market_options);
      const auto params_path = o.params_out.empty() ? o.out + ".params.csv" : o.params_out;
      write_atomically(o.out, [&](std::ostream& os) { write_fitted_csv(os, market.flows()); });
      write_atomically(params_path, [&](std::ostream& os) {
        write_params_csv(os, ParamsRecord{market.params(), market.cost_spec()});
      });
    } else if (capture->parsed()) {
      write_table(run_capture_curve(build_config(o)), o, "capture");
    } else if (theta->parsed()) {
      write_table(run_theta_sweep(build_config(o)), o, "theta-sweep");
    } else if (sens->parsed()) {
      write_table(run_sensitivity_sweep(build_config(o)), o, "sensitivity");
    }
  } catch (const Error& e) {
    std::cerr << "tierprice: " << e.what() << '\n';
    return is_numerical(e.code()) ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "tierprice: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
