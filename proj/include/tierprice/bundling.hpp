#pragma once

// Tier construction strategies and their evaluation under the market's
// demand model.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tierprice/domain.hpp"
#include "tierprice/market.hpp"

namespace tierprice {

enum class StrategyKind {
  Optimal,
  DemandWeighted,
  CostWeighted,
  ProfitWeighted,
  CostDivision,
  IndexDivision,
  ClassConstrainedProfitWeighted,
};

enum class OptimalMode {
  Auto,              // FullPartition for n <= kMaxFullPartitionFlows, else ContiguousByCost
  FullPartition,     // every set partition into <= B blocks
  ContiguousByCost,  // cost-sorted flows cut into <= B contiguous runs
};

inline constexpr std::size_t kMaxFullPartitionFlows = 12;

std::string_view to_string(StrategyKind s);
std::optional<StrategyKind> parse_strategy(std::string_view s);
std::string_view to_string(OptimalMode m);
std::optional<OptimalMode> parse_optimal_mode(std::string_view s);

// Token-bucket partition. Flows are visited in descending weight order
// (ties by ascending index); each goes to the first bundle that is empty or
// still has budget, and overdrawn budget carries into the next bundle.
Bundling token_bucket_bundles(std::span<const double> weights, int num_bundles);

Bundling build_bundles(StrategyKind strategy, const Market& market, int num_bundles,
                       OptimalMode mode = OptimalMode::Auto);

// Profit-maximizing bundling under the market's demand model.
Bundling optimal_bundles(const Market& market, int num_bundles,
                         OptimalMode mode = OptimalMode::Auto);

// The mode Auto resolves to for a market of this size.
OptimalMode resolve_optimal_mode(const Market& market, OptimalMode mode);

TierOutcome evaluate_bundling(const Market& market, const Bundling& bundling);

// (new - orig) / (max - orig); throws DegenerateBaseline when max ~ orig.
double profit_capture(double pi_new, double pi_orig, double pi_max);

}  // namespace tierprice
