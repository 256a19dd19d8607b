#include "tierprice/bundling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "tierprice/error.hpp"

namespace tierprice {

std::string_view to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::Optimal: return "optimal";
    case StrategyKind::DemandWeighted: return "demand-weighted";
    case StrategyKind::CostWeighted: return "cost-weighted";
    case StrategyKind::ProfitWeighted: return "profit-weighted";
    case StrategyKind::CostDivision: return "cost-division";
    case StrategyKind::IndexDivision: return "index-division";
    case StrategyKind::ClassConstrainedProfitWeighted: return "class-constrained";
  }
  return "";
}

std::optional<StrategyKind> parse_strategy(std::string_view s) {
  for (auto k : {StrategyKind::Optimal, StrategyKind::DemandWeighted,
                 StrategyKind::CostWeighted, StrategyKind::ProfitWeighted,
                 StrategyKind::CostDivision, StrategyKind::IndexDivision,
                 StrategyKind::ClassConstrainedProfitWeighted})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::string_view to_string(OptimalMode m) {
  switch (m) {
    case OptimalMode::Auto: return "auto";
    case OptimalMode::FullPartition: return "full-partition";
    case OptimalMode::ContiguousByCost: return "contiguous-by-cost";
  }
  return "";
}

std::optional<OptimalMode> parse_optimal_mode(std::string_view s) {
  for (auto m : {OptimalMode::Auto, OptimalMode::FullPartition, OptimalMode::ContiguousByCost})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

namespace {

void require_bundles(int num_bundles) {
  if (num_bundles < 1) throw Error(ErrorCode::InvalidConfig, "bundle count must be at least 1");
}

// Profit of a priced bundle depends only on its weight W and weighted cost
// mass C. For CED the optimal bundle profit is proportional to
// W (C/W)^(1-alpha) with w = v^alpha; for logit the equilibrium profit is
// increasing in sum_b W_b exp(-alpha C_b/W_b) with w = exp(alpha v). Both
// objectives are therefore additive over bundles. Weights and costs are
// rescaled so every score lies in [0, W].
class GroupScorer {
 public:
  explicit GroupScorer(const Market& market)
      : model_(market.params().model), alpha_(market.params().alpha) {
    const auto v = market.v();
    const auto c = market.c();
    const std::size_t n = v.size();
    std::vector<double> lw(n);
    for (std::size_t i = 0; i < n; ++i)
      lw[i] = model_ == DemandModel::Ced ? alpha_ * std::log(v[i]) : alpha_ * v[i];
    const double top = *std::max_element(lw.begin(), lw.end());
    c_ref_ = *std::min_element(c.begin(), c.end());
    w_.resize(n);
    wc_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      w_[i] = std::exp(lw[i] - top);
      wc_[i] = w_[i] * c[i];
    }
  }

  double w(std::size_t i) const { return w_[i]; }
  double wc(std::size_t i) const { return wc_[i]; }

  // lo/hi bound the mean cost of the group (used to absorb prefix-sum
  // cancellation).
  double score(double weight, double cost_mass, double lo, double hi) const {
    if (!(weight > 0.0)) return 0.0;
    const double mean = std::clamp(cost_mass / weight, lo, hi);
    if (model_ == DemandModel::Ced) return weight * std::pow(mean / c_ref_, 1.0 - alpha_);
    return weight * std::exp(-alpha_ * (mean - c_ref_));
  }

 private:
  DemandModel model_;
  double alpha_;
  double c_ref_ = 1.0;
  std::vector<double> w_, wc_;
};

Bundling full_partition(const Market& market, int num_bundles) {
  const std::size_t n = market.size();
  if (n > kMaxFullPartitionFlows)
    throw Error(ErrorCode::TooManyFlows,
                "full partition search supports at most 12 flows, got " + std::to_string(n));
  const GroupScorer scorer(market);
  const auto c = market.c();
  const double lo = *std::min_element(c.begin(), c.end());
  const double hi = *std::max_element(c.begin(), c.end());
  const std::size_t max_blocks = std::min<std::size_t>(n, static_cast<std::size_t>(num_bundles));

  // Block sums per recursion depth, so backtracking never subtracts.
  std::vector<std::vector<double>> weight(n + 1, std::vector<double>(max_blocks, 0.0));
  std::vector<std::vector<double>> mass(n + 1, std::vector<double>(max_blocks, 0.0));
  std::vector<int> assign(n, 0), best_assign;
  double best = -std::numeric_limits<double>::infinity();

  // Restricted growth strings enumerate each set partition exactly once, in
  // lexicographic order; the first maximum found is kept.
  auto recurse = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == n) {
      double total = 0.0;
      for (std::size_t b = 0; b < used; ++b) total += scorer.score(weight[n][b], mass[n][b], lo, hi);
      if (best_assign.empty() || total > best + 1e-12 * std::abs(best)) {
        best = total;
        best_assign = assign;
      }
      return;
    }
    const std::size_t limit = std::min(used + 1, max_blocks);
    for (std::size_t b = 0; b < limit; ++b) {
      weight[i + 1] = weight[i];
      mass[i + 1] = mass[i];
      weight[i + 1][b] += scorer.w(i);
      mass[i + 1][b] += scorer.wc(i);
      assign[i] = static_cast<int>(b);
      self(self, i + 1, std::max(used, b + 1));
    }
  };
  recurse(recurse, 0, 0);
  return Bundling{best_assign, num_bundles};
}

Bundling contiguous_by_cost(const Market& market, int num_bundles) {
  const std::size_t n = market.size();
  const GroupScorer scorer(market);
  const auto c = market.c();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });

  std::vector<double> pw(n + 1, 0.0), pc(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    pw[k + 1] = pw[k] + scorer.w(order[k]);
    pc[k + 1] = pc[k] + scorer.wc(order[k]);
  }
  // Score of sorted positions [i, j).
  auto seg = [&](std::size_t i, std::size_t j) {
    return scorer.score(std::max(0.0, pw[j] - pw[i]), pc[j] - pc[i], c[order[i]],
                        c[order[j - 1]]);
  };

  const std::size_t max_k = std::min<std::size_t>(n, static_cast<std::size_t>(num_bundles));
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  // value[k][j]: best score of the first j flows cut into exactly k runs.
  std::vector<std::vector<double>> value(max_k + 1, std::vector<double>(n + 1, kNegInf));
  std::vector<std::vector<std::size_t>> cut(max_k + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t j = 1; j <= n; ++j) value[1][j] = seg(0, j);

  // The last cut position is monotone in j for 1-D clustering objectives
  // of this form, so each layer is filled by divide and conquer.
  for (std::size_t k = 2; k <= max_k; ++k) {
    const auto& prev = value[k - 1];
    auto& cur = value[k];
    auto& arg = cut[k];
    auto solve = [&](auto&& self, std::size_t lo, std::size_t hi, std::size_t opt_lo,
                     std::size_t opt_hi) -> void {
      if (lo > hi) return;
      const std::size_t mid = lo + (hi - lo) / 2;
      double best = kNegInf;
      std::size_t best_i = opt_lo;
      const std::size_t end = std::min(mid - 1, opt_hi);
      for (std::size_t i = std::max(opt_lo, k - 1); i <= end; ++i) {
        if (prev[i] == kNegInf) continue;
        const double val = prev[i] + seg(i, mid);
        if (val > best) {
          best = val;
          best_i = i;
        }
      }
      cur[mid] = best;
      arg[mid] = best_i;
      if (mid > lo) self(self, lo, mid - 1, opt_lo, best_i);
      self(self, mid + 1, hi, best_i, opt_hi);
    };
    solve(solve, k, n, k - 1, n - 1);
  }

  std::size_t best_k = 1;
  for (std::size_t k = 2; k <= max_k; ++k)
    if (value[k][n] > value[best_k][n] + 1e-12 * std::abs(value[best_k][n])) best_k = k;

  Bundling out{std::vector<int>(n, 0), num_bundles};
  std::size_t j = n;
  for (std::size_t k = best_k; k >= 1; --k) {
    const std::size_t i = k == 1 ? 0 : cut[k][j];
    for (std::size_t pos = i; pos < j; ++pos) out.assignment[order[pos]] = static_cast<int>(k - 1);
    j = i;
  }
  return out;
}

Bundling cost_division(std::span<const double> c, int num_bundles) {
  const double top = *std::max_element(c.begin(), c.end());
  Bundling out{std::vector<int>(c.size(), 0), num_bundles};
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto k = static_cast<int>(std::floor(c[i] * num_bundles / top));
    out.assignment[i] = std::clamp(k, 0, num_bundles - 1);
  }
  return out;
}

Bundling index_division(std::span<const double> c, int num_bundles) {
  const std::size_t n = c.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
  const std::size_t group = (n + static_cast<std::size_t>(num_bundles) - 1) /
                            static_cast<std::size_t>(num_bundles);
  Bundling out{std::vector<int>(n, 0), num_bundles};
  for (std::size_t rank = 0; rank < n; ++rank)
    out.assignment[order[rank]] = static_cast<int>(rank / group);
  return out;
}

Bundling class_constrained(const Market& market, int num_bundles) {
  const auto& flows = market.flows();
  const auto weights = market.potential_profits();
  std::map<FlowClass, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (!flows[i].class_label)
      throw Error(ErrorCode::MissingClassLabels, "flow " + flows[i].flow_id + " has no class");
    members[*flows[i].class_label].push_back(i);
  }

  struct ClassGroup {
    std::vector<std::size_t> members;
    double mass = 0.0;
    int bundles = 1;
  };
  std::vector<ClassGroup> groups;
  for (auto& [label, idx] : members) {
    ClassGroup g;
    g.members = idx;
    for (auto i : idx) g.mass += weights[i];
    groups.push_back(std::move(g));
  }

  const int k = static_cast<int>(groups.size());
  if (num_bundles < k) {
    // Not enough tiers to keep classes apart: the heaviest classes keep their
    // own tier and the remainder share the last one.
    std::vector<std::size_t> rank(groups.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return groups[a].mass > groups[b].mass; });
    std::vector<ClassGroup> merged;
    for (int r = 0; r < num_bundles - 1; ++r) merged.push_back(groups[rank[r]]);
    ClassGroup rest;
    for (std::size_t r = static_cast<std::size_t>(num_bundles - 1); r < rank.size(); ++r) {
      const auto& g = groups[rank[r]];
      rest.members.insert(rest.members.end(), g.members.begin(), g.members.end());
      rest.mass += g.mass;
    }
    std::sort(rest.members.begin(), rest.members.end());
    merged.push_back(std::move(rest));
    groups = std::move(merged);
  } else {
    // One tier per class, the rest split by largest remainder on mass.
    const int spare = num_bundles - k;
    double total = 0.0;
    for (const auto& g : groups) total += g.mass;
    std::vector<double> remainder(groups.size());
    int given = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const double quota = total > 0.0 ? spare * groups[g].mass / total : 0.0;
      const int whole = static_cast<int>(std::floor(quota));
      groups[g].bundles = 1 + whole;
      remainder[g] = quota - whole;
      given += whole;
    }
    std::vector<std::size_t> rank(groups.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (int r = 0; given < spare; ++r, ++given) groups[rank[static_cast<std::size_t>(r) % rank.size()]].bundles += 1;
  }

  Bundling out{std::vector<int>(flows.size(), 0), num_bundles};
  int offset = 0;
  for (const auto& g : groups) {
    std::vector<double> w(g.members.size());
    for (std::size_t m = 0; m < g.members.size(); ++m) w[m] = weights[g.members[m]];
    const auto inner = token_bucket_bundles(w, g.bundles);
    for (std::size_t m = 0; m < g.members.size(); ++m)
      out.assignment[g.members[m]] = offset + inner.assignment[m];
    offset += g.bundles;
  }
  return out;
}

double safe_capture(double value, double orig, double best) {
  try {
    return profit_capture(value, orig, best);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateBaseline) throw;
    // No tiering gain is available at all.
    return 0.0;
  }
}

}  // namespace

Bundling token_bucket_bundles(std::span<const double> weights, int num_bundles) {
  require_bundles(num_bundles);
  const std::size_t n = weights.size();
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::DomainError, "token-bucket weights must be positive");
    total += w;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });

  const auto bundles = static_cast<std::size_t>(num_bundles);
  std::vector<double> budget(bundles, total / num_bundles);
  std::vector<std::size_t> count(bundles, 0);
  // Budgets within rounding of zero count as spent.
  const double eps = 1e-12 * total;
  Bundling out{std::vector<int>(n, 0), num_bundles};
  for (std::size_t i : order) {
    std::size_t j = 0;
    while (j + 1 < bundles && count[j] != 0 && budget[j] <= eps) ++j;
    out.assignment[i] = static_cast<int>(j);
    ++count[j];
    budget[j] -= weights[i];
    if (budget[j] < 0.0 && j + 1 < bundles) {
      budget[j + 1] += budget[j];
      budget[j] = 0.0;
    }
  }
  return out;
}

OptimalMode resolve_optimal_mode(const Market& market, OptimalMode mode) {
  if (mode != OptimalMode::Auto) return mode;
  return market.size() <= kMaxFullPartitionFlows ? OptimalMode::FullPartition
                                                 : OptimalMode::ContiguousByCost;
}

Bundling optimal_bundles(const Market& market, int num_bundles, OptimalMode mode) {
  require_bundles(num_bundles);
  if (resolve_optimal_mode(market, mode) == OptimalMode::FullPartition)
    return full_partition(market, num_bundles);
  return contiguous_by_cost(market, num_bundles);
}

Bundling build_bundles(StrategyKind strategy, const Market& market, int num_bundles,
                       OptimalMode mode) {
  require_bundles(num_bundles);
  if (market.size() == 0) throw Error(ErrorCode::InvalidConfig, "no flows to bundle");
  switch (strategy) {
    case StrategyKind::Optimal:
      return optimal_bundles(market, num_bundles, mode);
    case StrategyKind::DemandWeighted:
      return token_bucket_bundles(market.q(), num_bundles);
    case StrategyKind::CostWeighted: {
      std::vector<double> w(market.size());
      std::transform(market.c().begin(), market.c().end(), w.begin(),
                     [](double ci) { return 1.0 / ci; });
      return token_bucket_bundles(w, num_bundles);
    }
    case StrategyKind::ProfitWeighted:
      return token_bucket_bundles(market.potential_profits(), num_bundles);
    case StrategyKind::CostDivision:
      return cost_division(market.c(), num_bundles);
    case StrategyKind::IndexDivision:
      return index_division(market.c(), num_bundles);
    case StrategyKind::ClassConstrainedProfitWeighted:
      return class_constrained(market, num_bundles);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown strategy");
}

TierOutcome evaluate_bundling(const Market& market, const Bundling& bundling) {
  validate_bundling(bundling, market.size());
  const auto& params = market.params();
  const auto v = market.v();
  const auto c = market.c();
  const auto groups = bundling.groups();

  TierOutcome out;
  out.bundling = bundling;
  out.prices.assign(groups.size(), std::numeric_limits<double>::quiet_NaN());

  if (params.model == DemandModel::Ced) {
    std::vector<double> flow_price(market.size());
    for (std::size_t b = 0; b < groups.size(); ++b) {
      if (groups[b].empty()) continue;
      std::vector<double> bv, bc;
      for (auto i : groups[b]) {
        bv.push_back(v[i]);
        bc.push_back(c[i]);
      }
      out.prices[b] = ced::bundle_price(bv, bc, params.alpha);
      for (auto i : groups[b]) flow_price[i] = out.prices[b];
    }
    out.profit = ced::profit(v, c, flow_price, params.alpha);
    out.consumer_surplus =
        ced::consumer_surplus(v, flow_price, params.alpha, market.options().surplus_form);
  } else {
    std::vector<double> bv, bc;
    std::vector<std::size_t> index;
    for (std::size_t b = 0; b < groups.size(); ++b) {
      if (groups[b].empty()) continue;
      std::vector<double> gv, gc;
      for (auto i : groups[b]) {
        gv.push_back(v[i]);
        gc.push_back(c[i]);
      }
      bv.push_back(logit::bundle_valuation(gv, params.alpha));
      bc.push_back(logit::bundle_cost(gc, gv, params.alpha));
      index.push_back(b);
    }
    auto solver = market.options().solver;
    solver.initial_price = params.p0;
    const auto solved = logit::solve_prices(bv, bc, params.alpha, params.consumer_mass, solver);
    for (std::size_t k = 0; k < index.size(); ++k) out.prices[index[k]] = solved.prices[k];
    out.profit = logit::profit(bv, solved.prices, bc, params.alpha, params.consumer_mass);
    out.consumer_surplus =
        logit::consumer_surplus(bv, solved.prices, params.alpha, params.consumer_mass);
  }

  const auto& base = market.baseline();
  out.profit_capture = safe_capture(out.profit, base.profit_orig, base.profit_max);
  out.surplus_capture = safe_capture(out.consumer_surplus, base.surplus_orig, base.surplus_max);
  return out;
}

double profit_capture(double pi_new, double pi_orig, double pi_max) {
  if (std::abs(pi_max - pi_orig) < 1e-12 * std::abs(pi_max) || pi_max == pi_orig)
    throw Error(ErrorCode::DegenerateBaseline, "maximum profit equals original profit");
  return (pi_new - pi_orig) / (pi_max - pi_orig);
}

}  // namespace tierprice
