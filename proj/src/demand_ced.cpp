#include "tierprice/demand_ced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tierprice/error.hpp"

namespace tierprice::ced {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 1.0)) throw Error(ErrorCode::InvalidAlpha, "CED requires alpha > 1");
}

void require_aligned(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::DomainError, "input lengths differ");
}

// v_i^alpha / max_j v_j^alpha, computed in the log domain.
std::vector<double> relative_weights(std::span<const double> v, double alpha) {
  std::vector<double> lw(v.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) throw Error(ErrorCode::DomainError, "valuations must be positive");
    lw[i] = alpha * std::log(v[i]);
    top = std::max(top, lw[i]);
  }
  for (double& x : lw) x = std::exp(x - top);
  return lw;
}

}  // namespace

double demand(double v, double p, double alpha) {
  if (!(p > 0.0)) throw Error(ErrorCode::DomainError, "price must be positive");
  if (v < 0.0) throw Error(ErrorCode::DomainError, "valuation must be nonnegative");
  return std::pow(v / p, alpha);
}

double profit(std::span<const double> v, std::span<const double> c,
              std::span<const double> prices, double alpha) {
  require_aligned(v.size(), c.size());
  require_aligned(v.size(), prices.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    total += demand(v[i], prices[i], alpha) * (prices[i] - c[i]);
  return total;
}

double optimal_price(double c, double alpha) { return alpha * c / (alpha - 1.0); }

double bundle_price(std::span<const double> v, std::span<const double> c, double alpha) {
  require_aligned(v.size(), c.size());
  if (v.empty()) throw Error(ErrorCode::EmptyBundle, "cannot price an empty bundle");
  require_alpha(alpha);
  const auto w = relative_weights(v, alpha);
  double sw = 0.0, swc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sw += w[i];
    swc += w[i] * c[i];
  }
  return alpha * swc / ((alpha - 1.0) * sw);
}

double consumer_surplus(std::span<const double> v, std::span<const double> prices,
                        double alpha, SurplusForm form) {
  require_aligned(v.size(), prices.size());
  if (!(alpha > 1.0))
    throw Error(ErrorCode::DomainError, "CED surplus diverges for alpha <= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = prices[i];
    if (!(p > 0.0)) throw Error(ErrorCode::DomainError, "price must be positive");
    // v^a p^(1-a) = p * (v/p)^a
    const double spend = p * std::pow(v[i] / p, alpha);
    if (form == SurplusForm::UtilityMinusPayment)
      total += spend / (alpha - 1.0);
    else
      total += alpha * spend / (alpha - 1.0) - p;
  }
  return total;
}

std::vector<double> fit_valuations(std::span<const double> q, double p0, double alpha) {
  require_alpha(alpha);
  if (!(p0 > 0.0)) throw Error(ErrorCode::InvalidPrice, "P0 must be positive");
  std::vector<double> v(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!(q[i] > 0.0)) throw Error(ErrorCode::DomainError, "demand must be positive");
    v[i] = p0 * std::pow(q[i], 1.0 / alpha);
  }
  return v;
}

double fit_gamma(std::span<const double> v, std::span<const double> relative_cost,
                 double p0, double alpha) {
  require_aligned(v.size(), relative_cost.size());
  require_alpha(alpha);
  if (v.empty()) throw Error(ErrorCode::NonPositiveGamma, "no flows to fit");
  const auto w = relative_weights(v, alpha);
  double sw = 0.0, swf = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sw += w[i];
    swf += w[i] * relative_cost[i];
  }
  const double gamma = p0 * (alpha - 1.0) * sw / (alpha * swf);
  if (!std::isfinite(gamma) || !(gamma > 0.0))
    throw Error(ErrorCode::NonPositiveGamma, "CED cost scale is not positive");
  return gamma;
}

double potential_profit(double v, double c, double alpha) {
  const double p = optimal_price(c, alpha);
  return std::pow(v / p, alpha) * p / alpha;
}

}  // namespace tierprice::ced
