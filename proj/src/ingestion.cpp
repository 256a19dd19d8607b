#include "tierprice/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <unordered_map>

#include "tierprice/error.hpp"

namespace tierprice {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits one CSV line; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote on line " + std::to_string(line_no));
  fields.emplace_back(trim(cur));
  return fields;
}

double parse_double(std::string_view text, std::size_t line_no, std::string_view column) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad " +
                                           std::string(column) + " '" + std::string(text) + "'");
  return value;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

class CsvTable {
 public:
  CsvTable(std::istream& in, std::span<const std::string_view> required) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no_;
      if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw Error(ErrorCode::MissingColumn, "missing header row");
    const auto header = split_csv(line, line_no_);
    for (std::size_t i = 0; i < header.size(); ++i) columns_[header[i]] = i;
    for (auto name : required)
      if (!columns_.count(std::string(name)))
        throw Error(ErrorCode::MissingColumn, std::string(name));
    in_ = &in;
  }

  bool next() {
    std::string line;
    while (std::getline(*in_, line)) {
      ++line_no_;
      if (trim(line).empty()) continue;
      row_ = split_csv(line, line_no_);
      return true;
    }
    return false;
  }

  std::optional<std::string_view> get(const std::string& column) const {
    const auto it = columns_.find(column);
    if (it == columns_.end() || it->second >= row_.size()) return std::nullopt;
    return std::string_view(row_[it->second]);
  }

  std::string_view require(const std::string& column) const {
    const auto value = get(column);
    if (!value) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no_) + ": missing " + column);
    return *value;
  }

  double number(const std::string& column) const {
    return parse_double(require(column), line_no_, column);
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream* in_ = nullptr;
  std::map<std::string, std::size_t> columns_;
  std::vector<std::string> row_;
  std::size_t line_no_ = 0;
};

template <typename T, typename Parse>
std::optional<T> optional_label(const CsvTable& t, const std::string& column, Parse parse) {
  const auto raw = t.get(column);
  if (!raw || raw->empty()) return std::nullopt;
  auto parsed = parse(*raw);
  if (!parsed)
    throw Error(ErrorCode::ParseError, "line " + std::to_string(t.line_no()) + ": unknown " +
                                           column + " '" + std::string(*raw) + "'");
  return parsed;
}

double population_cv(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double mean = 0.0;
  for (double xi : x) mean += xi;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double xi : x) var += (xi - mean) * (xi - mean);
  var /= static_cast<double>(x.size());
  return std::sqrt(var) / mean;
}

// Values exp(sigma * z) rescaled by their maximum (CV is scale-free).
std::vector<double> lognormal_values(std::span<const double> z, double sigma) {
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = std::exp(sigma * (z[i] - top));
  return x;
}

// Solves for the lognormal shape whose sample CV equals the target.
std::vector<double> match_cv(std::span<const double> z, double target) {
  if (target <= 0.0) return std::vector<double>(z.size(), 1.0);
  double lo = 0.0, hi = std::sqrt(std::log1p(target * target));
  for (int i = 0; i < 60 && population_cv(lognormal_values(z, hi)) < target; ++i) hi *= 2.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double cv = population_cv(lognormal_values(z, mid));
    if (std::abs(cv - target) <= 1e-10 * target) return lognormal_values(z, mid);
    (cv < target ? lo : hi) = mid;
  }
  throw Error(ErrorCode::NoConvergence, "could not match a CV of " + format_double(target));
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

FlowReadResult read_flows_csv(std::istream& in) {
  static constexpr std::string_view kRequired[] = {"flow_id", "demand_mbps", "distance_miles"};
  CsvTable table(in, kRequired);
  FlowReadResult result;
  std::unordered_map<std::string, std::size_t> seen;
  while (table.next()) {
    FlowRecord rec;
    rec.flow_id = std::string(table.require("flow_id"));
    if (rec.flow_id.empty())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(table.line_no()) + ": empty flow_id");
    rec.demand_mbps = table.number("demand_mbps");
    rec.distance_miles = table.number("distance_miles");
    if (!(rec.demand_mbps >= 0.0) || !std::isfinite(rec.demand_mbps))
      throw Error(ErrorCode::ParseError, "line " + std::to_string(table.line_no()) + ": negative demand");
    if (!(rec.distance_miles >= 0.0) || !std::isfinite(rec.distance_miles))
      throw Error(ErrorCode::ParseError, "line " + std::to_string(table.line_no()) + ": negative distance");
    rec.region = optional_label<Region>(table, "region", parse_region);
    rec.dest_type = optional_label<DestType>(table, "dest_type", parse_dest_type);
    if (rec.demand_mbps == 0.0) {
      ++result.dropped_zero;
      continue;
    }
    if (auto it = seen.find(rec.flow_id); it != seen.end()) {
      result.flows[it->second].demand_mbps += rec.demand_mbps;
      ++result.merged_duplicates;
      continue;
    }
    seen.emplace(rec.flow_id, result.flows.size());
    result.flows.push_back(std::move(rec));
  }
  return result;
}

FlowReadResult read_flows_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_flows_csv(in);
}

void write_flows_csv(std::ostream& out, std::span<const FlowRecord> flows) {
  out << "flow_id,demand_mbps,distance_miles,region,dest_type\n";
  for (const auto& f : flows) {
    out << quote_if_needed(f.flow_id) << ',' << format_double(f.demand_mbps) << ','
        << format_double(f.distance_miles) << ',' << (f.region ? to_string(*f.region) : "") << ','
        << (f.dest_type ? to_string(*f.dest_type) : "") << '\n';
  }
}

std::vector<FittedFlow> read_fitted_csv(std::istream& in) {
  static constexpr std::string_view kRequired[] = {"flow_id", "q", "d", "v", "c"};
  CsvTable table(in, kRequired);
  std::vector<FittedFlow> flows;
  while (table.next()) {
    FittedFlow f;
    f.flow_id = std::string(table.require("flow_id"));
    f.q = table.number("q");
    f.d = table.number("d");
    f.v = table.number("v");
    f.c = table.number("c");
    f.class_label = optional_label<FlowClass>(table, "class_label", parse_flow_class);
    flows.push_back(std::move(f));
  }
  return flows;
}

void write_fitted_csv(std::ostream& out, std::span<const FittedFlow> flows) {
  out << "flow_id,q,d,v,c,class_label\n";
  for (const auto& f : flows) {
    out << quote_if_needed(f.flow_id) << ',' << format_double(f.q) << ',' << format_double(f.d)
        << ',' << format_double(f.v) << ',' << format_double(f.c) << ','
        << (f.class_label ? to_string(*f.class_label) : "") << '\n';
  }
}

ParamsRecord read_params_csv(std::istream& in) {
  static constexpr std::string_view kRequired[] = {
      "model", "alpha", "p0", "s0", "consumer_mass", "cost_model", "theta",
      "gamma", "beta", "concave_a", "concave_b", "concave_c"};
  CsvTable table(in, kRequired);
  if (!table.next()) throw Error(ErrorCode::ParseError, "params file has no value row");
  ParamsRecord p;
  const auto model = parse_demand_model(table.require("model"));
  const auto kind = parse_cost_kind(table.require("cost_model"));
  if (!model || !kind) throw Error(ErrorCode::ParseError, "unknown model name in params file");
  p.market.model = *model;
  p.market.alpha = table.number("alpha");
  p.market.p0 = table.number("p0");
  p.market.s0 = table.number("s0");
  p.market.consumer_mass = table.number("consumer_mass");
  p.cost.kind = *kind;
  p.cost.theta = table.number("theta");
  p.cost.gamma = table.number("gamma");
  p.cost.beta = table.number("beta");
  p.cost.concave_a = table.number("concave_a");
  p.cost.concave_b = table.number("concave_b");
  p.cost.concave_c = table.number("concave_c");
  return p;
}

void write_params_csv(std::ostream& out, const ParamsRecord& p) {
  out << "model,alpha,p0,s0,consumer_mass,cost_model,theta,gamma,beta,concave_a,concave_b,concave_c\n";
  out << to_string(p.market.model) << ',' << format_double(p.market.alpha) << ','
      << format_double(p.market.p0) << ',' << format_double(p.market.s0) << ','
      << format_double(p.market.consumer_mass) << ',' << to_string(p.cost.kind) << ','
      << format_double(p.cost.theta) << ',' << format_double(p.cost.gamma) << ','
      << format_double(p.cost.beta) << ',' << format_double(p.cost.concave_a) << ','
      << format_double(p.cost.concave_b) << ',' << format_double(p.cost.concave_c) << '\n';
}

std::optional<DatasetMoments> synth_preset(std::string_view name, std::size_t n_flows,
                                           std::uint64_t seed) {
  DatasetMoments m;
  m.n_flows = n_flows;
  m.seed = seed;
  if (name == "eu-isp") {
    m.weighted_avg_distance_miles = 54.0;
    m.cv_distance = 0.70;
    m.aggregate_gbps = 37.0;
    m.cv_demand = 1.71;
  } else if (name == "cdn") {
    m.weighted_avg_distance_miles = 1988.0;
    m.cv_distance = 0.59;
    m.aggregate_gbps = 96.0;
    m.cv_demand = 2.28;
  } else if (name == "internet2") {
    m.weighted_avg_distance_miles = 660.0;
    m.cv_distance = 0.54;
    m.aggregate_gbps = 4.0;
    m.cv_demand = 4.53;
  } else {
    return std::nullopt;
  }
  return m;
}

std::vector<FlowRecord> synth_generate(const DatasetMoments& m) {
  if (m.n_flows == 0 || !(m.weighted_avg_distance_miles > 0.0) || !(m.aggregate_gbps > 0.0) ||
      !(m.cv_distance >= 0.0) || !(m.cv_demand >= 0.0))
    throw Error(ErrorCode::InvalidConfig, "dataset moments must be positive");

  std::mt19937_64 rng(m.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> zq(m.n_flows), zd(m.n_flows);
  for (double& z : zq) z = normal(rng);
  for (double& z : zd) z = normal(rng);

  auto q = match_cv(zq, m.cv_demand);
  auto d = match_cv(zd, m.cv_distance);

  const double aggregate_mbps = m.aggregate_gbps * 1000.0;
  double total = 0.0;
  for (double x : q) total += x;
  for (double& x : q) x *= aggregate_mbps / total;

  // Rescale until the demand-weighted mean distance hits the target.
  bool matched = false;
  for (int iter = 0; iter < 100; ++iter) {
    double wsum = 0.0, qsum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      wsum += q[i] * d[i];
      qsum += q[i];
    }
    const double wavg = wsum / qsum;
    if (std::abs(wavg - m.weighted_avg_distance_miles) <= 1e-12 * m.weighted_avg_distance_miles) {
      matched = true;
      break;
    }
    for (double& x : d) x *= m.weighted_avg_distance_miles / wavg;
  }
  if (!matched) throw Error(ErrorCode::NoConvergence, "weighted distance scaling did not converge");

  const auto width = std::to_string(m.n_flows).size();
  std::vector<FlowRecord> flows(m.n_flows);
  for (std::size_t i = 0; i < m.n_flows; ++i) {
    auto id = std::to_string(i + 1);
    flows[i].flow_id = "f" + std::string(width - id.size(), '0') + id;
    flows[i].demand_mbps = q[i];
    flows[i].distance_miles = d[i];
  }
  return flows;
}

DatasetMoments measure_moments(std::span<const FlowRecord> flows) {
  DatasetMoments m;
  m.n_flows = flows.size();
  std::vector<double> q(flows.size()), d(flows.size());
  double qsum = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    q[i] = flows[i].demand_mbps;
    d[i] = flows[i].distance_miles;
    qsum += q[i];
    wsum += q[i] * d[i];
  }
  m.aggregate_gbps = qsum / 1000.0;
  m.weighted_avg_distance_miles = qsum > 0.0 ? wsum / qsum : 0.0;
  m.cv_demand = population_cv(q);
  m.cv_distance = population_cv(d);
  m.seed = 0;
  return m;
}

}  // namespace tierprice
