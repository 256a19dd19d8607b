#include "tierprice/demand_logit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tierprice/error.hpp"

namespace tierprice::logit {

namespace {

void require_aligned(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::DomainError, "input lengths differ");
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(top)) throw Error(ErrorCode::OverflowGuard, "non-finite exponent");
  double sum = 0.0;
  for (double xi : x) sum += std::exp(xi - top);
  return top + std::log(sum);
}

struct Evaluation {
  Shares shares;
  double residual = 0.0;
  double profit = 0.0;
};

Evaluation evaluate(std::span<const double> v, std::span<const double> c,
                    std::span<const double> p, double alpha, double mass) {
  Evaluation e;
  e.shares = shares(v, p, alpha);
  const double markup = std::exp(e.shares.log_inv_s0) / alpha;
  for (std::size_t i = 0; i < p.size(); ++i) {
    e.residual = std::max(e.residual, std::abs(p[i] - c[i] - markup));
    e.profit += e.shares.s[i] * (p[i] - c[i]);
  }
  e.profit *= mass;
  if (!std::isfinite(e.residual))
    throw Error(ErrorCode::OverflowGuard, "markup overflow in price solver");
  return e;
}

}  // namespace

Shares shares(std::span<const double> v, std::span<const double> prices, double alpha) {
  require_aligned(v.size(), prices.size());
  Shares out;
  out.s.resize(v.size());
  double top = 0.0;  // the outside option contributes exponent 0
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = alpha * (v[i] - prices[i]);
    if (!std::isfinite(x)) throw Error(ErrorCode::OverflowGuard, "non-finite exponent");
    out.s[i] = x;
    top = std::max(top, x);
  }
  double denom = std::exp(-top);
  for (double& x : out.s) {
    x = std::exp(x - top);
    denom += x;
  }
  for (double& x : out.s) x /= denom;
  out.s0 = std::exp(-top) / denom;
  out.log_inv_s0 = top + std::log(denom);
  return out;
}

double profit(std::span<const double> v, std::span<const double> prices,
              std::span<const double> c, double alpha, double consumer_mass) {
  require_aligned(v.size(), c.size());
  const auto sh = shares(v, prices, alpha);
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += sh.s[i] * (prices[i] - c[i]);
  return consumer_mass * total;
}

double fixed_point_residual(std::span<const double> v, std::span<const double> c,
                            std::span<const double> prices, double alpha) {
  require_aligned(v.size(), c.size());
  return evaluate(v, c, prices, alpha, 1.0).residual;
}

SolveResult solve_prices(std::span<const double> v, std::span<const double> c,
                         double alpha, double consumer_mass,
                         const SolverOptions& options) {
  require_aligned(v.size(), c.size());
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidAlpha, "logit requires alpha > 0");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "tolerance must be positive");
  const std::size_t n = v.size();
  SolveResult result;
  if (n == 0) return result;

  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i)
    p[i] = options.initial_price ? *options.initial_price : c[i] + 1.0 / alpha;

  Evaluation cur = evaluate(v, c, p, alpha, consumer_mass);
  std::vector<double> trial(n);
  long iter = 0;

  // Damped fixed-point phase.
  const double lambda = options.damping;
  while (iter < options.max_iter && cur.residual >= options.tol) {
    const double markup = std::exp(cur.shares.log_inv_s0) / alpha;
    for (std::size_t i = 0; i < n; ++i)
      trial[i] = (1.0 - lambda) * p[i] + lambda * (c[i] + markup);
    Evaluation next = evaluate(v, c, trial, alpha, consumer_mass);
    ++iter;
    if (!(next.residual < cur.residual)) {
      result.used_fallback = true;
      break;
    }
    p.swap(trial);
    cur = std::move(next);
  }

  // Preconditioned gradient ascent. The scaled direction is
  //   d_i = 1/alpha - m_i + sum_j s_j m_j,  m = p - c,
  // which is the profit gradient divided by alpha K s_i.
  std::vector<double> dir(n);
  while (iter < options.max_iter && cur.residual >= options.tol) {
    double mean_markup = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_markup += cur.shares.s[i] * (p[i] - c[i]);
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dir[i] = 1.0 / alpha - (p[i] - c[i]) + mean_markup;
      slope += alpha * consumer_mass * cur.shares.s[i] * dir[i] * dir[i];
    }

    double step = 1.0;
    bool accepted = false;
    while (step > 1e-20) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = p[i] + step * dir[i];
      Evaluation next;
      try {
        next = evaluate(v, c, trial, alpha, consumer_mass);
      } catch (const Error&) {
        step *= 0.5;
        continue;
      }
      const bool armijo = next.profit >= cur.profit + 1e-4 * step * slope;
      // Near the optimum profit is flat to rounding; accept residual progress.
      const bool flat = next.profit >= cur.profit - 1e-14 * std::abs(cur.profit) &&
                        next.residual < cur.residual;
      if (armijo || flat) {
        p.swap(trial);
        cur = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++iter;
    if (!accepted) break;
  }

  result.prices = std::move(p);
  result.iterations = iter;
  result.residual = cur.residual;
  if (cur.residual >= options.tol)
    throw NoConvergenceError("logit price solver stalled", iter, cur.residual);
  return result;
}

double consumer_surplus(std::span<const double> v, std::span<const double> prices,
                        double alpha, double consumer_mass) {
  const auto sh = shares(v, prices, alpha);
  return consumer_mass * (kEulerGamma + sh.log_inv_s0) / alpha;
}

std::vector<double> fit_valuations(std::span<const double> q, double p0, double alpha,
                                   double s0) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidAlpha, "logit requires alpha > 0");
  if (!(s0 > 0.0 && s0 < 1.0)) throw Error(ErrorCode::InvalidShare, "s0 must lie in (0, 1)");
  double total = 0.0;
  for (double qi : q) {
    if (!(qi > 0.0)) throw Error(ErrorCode::DomainError, "demand must be positive");
    total += qi;
  }
  std::vector<double> v(q.size());
  const double log_s0 = std::log(s0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double si = q[i] * (1.0 - s0) / total;
    v[i] = (std::log(si) - log_s0) / alpha + p0;
  }
  return v;
}

double fit_gamma(std::span<const double> v, std::span<const double> relative_cost,
                 double p0, double alpha) {
  require_aligned(v.size(), relative_cost.size());
  if (v.empty()) throw Error(ErrorCode::NonPositiveGamma, "no flows to fit");
  double se = 0.0, sfe = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double e = std::exp(alpha * (v[i] - p0));
    se += e;
    sfe += relative_cost[i] * e;
  }
  if (!std::isfinite(se) || !std::isfinite(sfe))
    throw Error(ErrorCode::OverflowGuard, "exponent overflow while fitting gamma");
  const double gamma = se * (alpha * p0 - 1.0 - se) / (alpha * sfe);
  if (!std::isfinite(gamma) || !(gamma > 0.0))
    throw Error(ErrorCode::NonPositiveGamma,
                "P0, alpha and s0 are inconsistent with profit-maximizing uniform pricing");
  return gamma;
}

double bundle_valuation(std::span<const double> v, double alpha) {
  if (v.empty()) throw Error(ErrorCode::EmptyBundle, "empty bundle");
  std::vector<double> x(v.size());
  std::transform(v.begin(), v.end(), x.begin(), [alpha](double vi) { return alpha * vi; });
  return log_sum_exp(x) / alpha;
}

double bundle_cost(std::span<const double> c, std::span<const double> v, double alpha) {
  require_aligned(c.size(), v.size());
  if (v.empty()) throw Error(ErrorCode::EmptyBundle, "empty bundle");
  const double top = alpha * *std::max_element(v.begin(), v.end());
  double sw = 0.0, swc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double w = std::exp(alpha * v[i] - top);
    sw += w;
    swc += w * c[i];
  }
  const double lo = *std::min_element(c.begin(), c.end());
  const double hi = *std::max_element(c.begin(), c.end());
  return std::clamp(swc / sw, lo, hi);
}

double potential_profit(double q, double alpha, double s0, double consumer_mass) {
  const double share = q / consumer_mass;
  return consumer_mass * share / (alpha * s0);
}

double consumer_mass(std::span<const double> q, double s0) {
  const double total = std::accumulate(q.begin(), q.end(), 0.0);
  return total / (1.0 - s0);
}

}  // namespace tierprice::logit
