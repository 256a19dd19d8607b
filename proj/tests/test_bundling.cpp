#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "tierprice/bundling.hpp"
#include "tierprice/demand_ced.hpp"
#include "tierprice/error.hpp"

using namespace tierprice;

namespace {

using Vec = std::vector<double>;

std::string id(std::size_t i) {
  std::string s = std::to_string(i);
  return "f" + std::string(4 - s.size(), '0') + s;
}

Market market_of(const Vec& v, const Vec& c, DemandModel model = DemandModel::Ced,
                 double alpha = 2.0) {
  std::vector<FittedFlow> flows;
  for (std::size_t i = 0; i < v.size(); ++i) {
    FittedFlow f;
    f.flow_id = id(i);
    f.q = 1.0;
    f.v = v[i];
    f.c = c[i];
    flows.push_back(f);
  }
  MarketParams p{model, alpha, 20.0, 0.2, model == DemandModel::Logit ? 100.0 : 0.0};
  return Market::from_fitted(flows, p, fixture::linear_cost());
}

const StrategyKind kHeuristics[] = {StrategyKind::DemandWeighted, StrategyKind::CostWeighted,
                                    StrategyKind::ProfitWeighted, StrategyKind::CostDivision,
                                    StrategyKind::IndexDivision};

// Canonical form of a partition: the set of its non-empty blocks.
std::set<std::set<std::size_t>> blocks(const Bundling& b) {
  std::set<std::set<std::size_t>> out;
  for (const auto& g : b.groups())
    if (!g.empty()) out.insert(std::set<std::size_t>(g.begin(), g.end()));
  return out;
}

}  // namespace

TEST_SUITE("bundling") {

TEST_CASE("token bucket") {
  CHECK(token_bucket_bundles(Vec{30, 10, 10, 10}, 2).assignment == std::vector<int>{0, 1, 1, 1});
  CHECK(token_bucket_bundles(Vec{3, 1, 4, 1, 5}, 1).assignment == std::vector<int>(5, 0));
  // each assignment exhausts a budget no larger than the biggest weight
  auto solo = token_bucket_bundles(Vec{2, 9, 4, 7, 1}, 5);
  CHECK(solo.assignment == std::vector<int>{3, 0, 2, 1, 4});
  auto more = token_bucket_bundles(Vec{2, 9, 4, 7, 1}, 8);
  CHECK(more.effective_bundles() == 5);
  // ties break by index
  CHECK(token_bucket_bundles(Vec{5, 5, 5, 5}, 2).assignment == std::vector<int>{0, 0, 1, 1});
  CHECK_THROWS_AS(token_bucket_bundles(Vec{1, 0}, 2), Error);
  CHECK_THROWS_AS(token_bucket_bundles(Vec{1, 2}, 0), Error);
}

TEST_CASE("property: token bucket yields at most B nonempty bundles in weight order") {
  std::mt19937_64 rng(5);
  std::lognormal_distribution<double> w(0.0, 1.5);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 40, B = 1 + trial % 9;
    Vec ws(n);
    for (double& x : ws) x = w(rng);
    auto b = token_bucket_bundles(ws, B);
    CHECK(b.effective_bundles() <= std::min(n, B));
    // heavier flows never land in a later bundle than lighter ones
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (ws[i] > ws[j]) CHECK(b.assignment[i] <= b.assignment[j]);
  }
}

TEST_CASE("cost division splits at equal-width cost ranges from zero") {
  auto m = market_of(Vec{5, 5, 5, 5, 5}, Vec{1, 4.99, 5, 7.5, 10});
  CHECK(build_bundles(StrategyKind::CostDivision, m, 2).assignment ==
        std::vector<int>{0, 0, 1, 1, 1});
  // costs clustered high leave the low range empty
  auto high = market_of(Vec{5, 5, 5}, Vec{8, 9, 10});
  auto b = build_bundles(StrategyKind::CostDivision, high, 4);
  CHECK(b.assignment == std::vector<int>{3, 3, 3});
  CHECK(b.effective_bundles() == 1);
}

TEST_CASE("index division splits cost ranks evenly") {
  Vec v(100, 5.0), c(100);
  for (int i = 0; i < 100; ++i) c[i] = 1.0 + ((i * 37) % 100);
  auto b = build_bundles(StrategyKind::IndexDivision, market_of(v, c), 4);
  for (int i = 0; i < 100; ++i) CHECK(b.assignment[i] == static_cast<int>(c[i] - 1) / 25);
  auto small = build_bundles(StrategyKind::IndexDivision, market_of(Vec(10, 5.0), Vec{10, 9, 8, 7, 6, 5, 4, 3, 2, 1}), 4);
  CHECK(small.assignment == std::vector<int>{3, 2, 2, 2, 1, 1, 1, 0, 0, 0});
}

TEST_CASE("cost weighted with equal costs") {
  auto m = market_of(Vec{1, 2, 3, 4, 5, 6, 7}, Vec(7, 2.0));
  for (int B : {1, 2, 3, 7, 9}) {
    auto b = build_bundles(StrategyKind::CostWeighted, m, B);
    CHECK(b.effective_bundles() <= B);
    auto g = b.groups();
    // equal budgets over equal weights: bundle sizes differ by at most one
    std::size_t lo = m.size(), hi = 0;
    for (const auto& grp : g)
      if (!grp.empty()) lo = std::min(lo, grp.size()), hi = std::max(hi, grp.size());
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("class-constrained bundles never mix classes") {
  auto flows = fixture::random_flows(60, 3, true);
  CostModelSpec regional;
  regional.kind = CostKind::Regional;
  regional.theta = 0.7;
  auto m = Market::fit(flows, fixture::ced_params(), regional);
  for (int B : {1, 2, 3, 4, 6, 9}) {
    auto b = build_bundles(StrategyKind::ClassConstrainedProfitWeighted, m, B);
    CHECK(b.effective_bundles() <= B);
    std::set<FlowClass> seen_per_bundle[16];
    for (std::size_t i = 0; i < m.size(); ++i)
      seen_per_bundle[b.assignment[i]].insert(*m.flows()[i].class_label);
    int mixed = 0;
    for (int k = 0; k < B; ++k) mixed += seen_per_bundle[k].size() > 1;
    CHECK(mixed == (B < 3 ? 1 : 0));
  }
  auto unlabeled =
      Market::fit(fixture::random_flows(60, 3), fixture::ced_params(), fixture::linear_cost());
  try {
    build_bundles(StrategyKind::ClassConstrainedProfitWeighted, unlabeled, 2);
    FAIL("expected MissingClassLabels");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingClassLabels);
  }
}

TEST_CASE("optimal bundling finds two planted classes") {
  for (auto model : {DemandModel::Ced, DemandModel::Logit}) {
    Vec v, c;
    for (int i = 0; i < 8; ++i) {
      v.push_back(i % 2 ? 6.0 : 3.0);
      c.push_back(i % 2 ? 4.0 : 1.0);
    }
    auto m = market_of(v, c, model, 1.5);
    auto b = optimal_bundles(m, 2, OptimalMode::FullPartition);
    std::set<std::set<std::size_t>> expected{{0, 2, 4, 6}, {1, 3, 5, 7}};
    CHECK(blocks(b) == expected);
    // the exhaustive evaluation agrees
    double best = -1;
    std::vector<int> arg;
    oracle::for_each_partition(8, 2, [&](const std::vector<int>& a) {
      const double p = evaluate_bundling(m, Bundling{a, 2}).profit;
      if (p > best + 1e-12 * best) best = p, arg = a;
    });
    CHECK(blocks(Bundling{arg, 2}) == expected);
  }
}

TEST_CASE("optimal endpoints") {
  for (auto params : {fixture::ced_params(), fixture::logit_params()}) {
    auto m = Market::fit(fixture::random_flows(9, 4), params, fixture::linear_cost());
    auto one = optimal_bundles(m, 1);
    CHECK(one.assignment == std::vector<int>(9, 0));
    auto all = optimal_bundles(m, 9);
    // under logit, splitting off flows priced far out of the market can gain
    // less than rounding, so only the profit is pinned there
    if (params.model == DemandModel::Ced) CHECK(all.effective_bundles() == 9);
    CHECK(evaluate_bundling(m, all).profit_capture == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(evaluate_bundling(m, one).profit_capture) < 1e-4);
  }
}

TEST_CASE("full partition rejects more than 12 flows") {
  auto m = Market::fit(fixture::random_flows(13, 1), fixture::ced_params(), fixture::linear_cost());
  CHECK_THROWS_AS(optimal_bundles(m, 3, OptimalMode::FullPartition), Error);
  CHECK(resolve_optimal_mode(m, OptimalMode::Auto) == OptimalMode::ContiguousByCost);
  CHECK_NOTHROW(optimal_bundles(m, 3));
}

TEST_CASE("property: full partition is exact against brute-force evaluation") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const std::size_t n = 3 + seed % 5;
    for (auto params : {fixture::ced_params(1.1 + 0.3 * seed), fixture::logit_params(1.2, 20, 0.3)}) {
      auto m = Market::fit(fixture::random_flows(n, seed), params, fixture::linear_cost(0.1));
      for (int B : {2, 3}) {
        double best = -std::numeric_limits<double>::infinity();
        oracle::for_each_partition(n, B, [&](const std::vector<int>& a) {
          best = std::max(best, evaluate_bundling(m, Bundling{a, B}).profit);
        });
        const double found =
            evaluate_bundling(m, optimal_bundles(m, B, OptimalMode::FullPartition)).profit;
        CHECK(found == doctest::Approx(best).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("property: contiguous-by-cost matches full partition") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> a(1.05, 6.0);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::size_t n = 4 + seed % 7;
    const double alpha = a(rng);
    for (auto params : {fixture::ced_params(alpha), fixture::logit_params(alpha, 20, 0.4)}) {
      auto m = Market::fit(fixture::random_flows(n, seed), params, fixture::linear_cost(0.2));
      for (int B = 1; B <= 5; ++B) {
        const double full =
            evaluate_bundling(m, optimal_bundles(m, B, OptimalMode::FullPartition)).profit;
        const double cont =
            evaluate_bundling(m, optimal_bundles(m, B, OptimalMode::ContiguousByCost)).profit;
        CHECK(cont == doctest::Approx(full).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("property: contiguous DP matches a brute cubic DP under CED") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const double alpha = 1.1 + 0.7 * seed;
    auto m = Market::fit(fixture::random_flows(150, seed), fixture::ced_params(alpha),
                         fixture::linear_cost(0.2));
    const auto v = m.v();
    const auto c = m.c();
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return c[x] < c[y]; });
    auto segment_profit = [&](std::size_t i, std::size_t j) {
      Vec sv, sc;
      for (std::size_t k = i; k < j; ++k) sv.push_back(v[order[k]]), sc.push_back(c[order[k]]);
      return ced::profit(sv, sc, Vec(sv.size(), ced::bundle_price(sv, sc, alpha)), alpha);
    };
    // cache segment profits
    const std::size_t n = m.size();
    std::vector<Vec> table(n + 1, Vec(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j <= n; ++j) table[i][j] = segment_profit(i, j);
    for (int B : {2, 3, 5, 8}) {
      const double brute =
          oracle::contiguous_dp(n, B, [&](std::size_t i, std::size_t j) { return table[i][j]; });
      const double fast =
          evaluate_bundling(m, optimal_bundles(m, B, OptimalMode::ContiguousByCost)).profit;
      CHECK(fast == doctest::Approx(brute).epsilon(1e-9));
    }
  }
}

TEST_CASE("property: contiguous DP matches enumerated cuts under logit") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const std::size_t n = 18;
    auto m = Market::fit(fixture::random_flows(n, 40 + seed), fixture::logit_params(1.5, 20, 0.3),
                         fixture::linear_cost(0.2));
    const auto c = m.c();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return c[x] < c[y]; });
    const int B = 3;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        std::vector<int> a(n);
        for (std::size_t r = 0; r < n; ++r) a[order[r]] = r < i ? 0 : (r < j ? 1 : 2);
        best = std::max(best, evaluate_bundling(m, Bundling{a, B}).profit);
      }
    const double fast =
        evaluate_bundling(m, optimal_bundles(m, B, OptimalMode::ContiguousByCost)).profit;
    CHECK(fast >= best * (1 - 1e-9));
    CHECK(fast == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("property: optimal dominates heuristics and grows with B") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const std::size_t n = 5 + seed % 6;
    for (auto params : {fixture::ced_params(1.1 + 0.2 * seed), fixture::logit_params(1.3, 20, 0.3)}) {
      auto m = Market::fit(fixture::random_flows(n, seed * 7), params, fixture::linear_cost(0.2));
      double previous = -std::numeric_limits<double>::infinity();
      for (int B = 1; B <= 6; ++B) {
        const double opt =
            evaluate_bundling(m, optimal_bundles(m, B, OptimalMode::FullPartition)).profit;
        CHECK(opt >= previous - 1e-9 * std::abs(previous));
        previous = opt;
        for (auto s : kHeuristics)
          CHECK(evaluate_bundling(m, build_bundles(s, m, B)).profit <= opt + 1e-9 * std::abs(opt));
      }
    }
  }
}

TEST_CASE("capture endpoints") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (auto params : {fixture::ced_params(), fixture::logit_params()}) {
      auto m = Market::fit(fixture::random_flows(50, seed), params, fixture::linear_cost());
      std::vector<int> singletons(m.size());
      std::iota(singletons.begin(), singletons.end(), 0);
      auto all = evaluate_bundling(m, Bundling{singletons, static_cast<int>(m.size())});
      CHECK(std::abs(all.profit_capture - 1.0) < 1e-9);
      auto one = evaluate_bundling(m, Bundling{std::vector<int>(m.size(), 0), 1});
      CHECK(std::abs(one.profit_capture) < 1e-4);
      CHECK(one.prices[0] == doctest::Approx(params.p0).epsilon(1e-6));
    }
  }
}

TEST_CASE("profit capture ratio") {
  CHECK(profit_capture(130, 100, 130) == 1.0);
  CHECK(profit_capture(100, 100, 130) == 0.0);
  CHECK(profit_capture(115, 100, 130) == doctest::Approx(0.5));
  CHECK(profit_capture(90, 100, 130) < 0.0);
  try {
    profit_capture(5, 100, 100);
    FAIL("expected DegenerateBaseline");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateBaseline);
  }
}

TEST_CASE("empty bundles are priced as NaN and skipped") {
  auto m = market_of(Vec{3, 4, 5}, Vec{1, 2, 3});
  auto out = evaluate_bundling(m, Bundling{{0, 0, 2}, 3});
  CHECK(std::isnan(out.prices[1]));
  CHECK(std::isfinite(out.prices[0]));
  CHECK(out.bundling.effective_bundles() == 2);
}

TEST_CASE("bundling is deterministic") {
  auto flows = fixture::random_flows(300, 8);
  auto m1 = Market::fit(flows, fixture::ced_params(), fixture::linear_cost());
  std::reverse(flows.begin(), flows.end());
  auto m2 = Market::fit(flows, fixture::ced_params(), fixture::linear_cost());
  for (auto s : kHeuristics)
    CHECK(build_bundles(s, m1, 4).assignment == build_bundles(s, m2, 4).assignment);
  CHECK(optimal_bundles(m1, 4).assignment == optimal_bundles(m2, 4).assignment);
}

}  // TEST_SUITE
