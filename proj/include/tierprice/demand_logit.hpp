#pragma once

// Logit discrete-choice demand. Consumer j picks flow i with utility
// alpha (v_i - p_i) + Gumbel noise, or the outside option with utility
// Gumbel noise alone; demand for flow i is K s_i.

#include <optional>
#include <span>
#include <vector>

namespace tierprice::logit {

inline constexpr double kEulerGamma = 0.57721566490153286061;

struct Shares {
  std::vector<double> s;
  double s0 = 1.0;
  // ln(1 / s0) = ln(1 + sum_j exp(alpha (v_j - p_j))), kept separately so
  // callers can form 1 / s0 without underflow.
  double log_inv_s0 = 0.0;
};

// Market shares with a max-shift before exponentiation. Throws OverflowGuard
// when an exponent is not finite.
Shares shares(std::span<const double> v, std::span<const double> prices, double alpha);

// K sum_i s_i (p_i - c_i)
double profit(std::span<const double> v, std::span<const double> prices,
              std::span<const double> c, double alpha, double consumer_mass);

// max_i |p_i - c_i - 1 / (alpha s0(p))|
double fixed_point_residual(std::span<const double> v, std::span<const double> c,
                            std::span<const double> prices, double alpha);

struct SolverOptions {
  double tol = 1e-8;
  long max_iter = 100000;
  double damping = 0.5;
  // Uniform starting price. Defaults to c_i + 1/alpha per flow.
  std::optional<double> initial_price;
};

struct SolveResult {
  std::vector<double> prices;
  long iterations = 0;
  double residual = 0.0;
  bool used_fallback = false;
};

// Profit-maximizing prices p_i = c_i + 1 / (alpha s0(p)). Runs damped
// fixed-point iteration and, once an iterate fails to shrink the residual,
// switches to gradient ascent preconditioned by 1 / (alpha K s_i) with a
// backtracking line search. Throws NoConvergenceError after max_iter.
SolveResult solve_prices(std::span<const double> v, std::span<const double> c,
                         double alpha, double consumer_mass,
                         const SolverOptions& options = {});

// K (euler_gamma + ln(1 + sum_i exp(alpha (v_i - p_i)))) / alpha
double consumer_surplus(std::span<const double> v, std::span<const double> prices,
                        double alpha, double consumer_mass);

// v_i = (ln s_i - ln s0) / alpha + p0 with s_i = q_i (1 - s0) / sum_j q_j.
std::vector<double> fit_valuations(std::span<const double> q, double p0, double alpha,
                                   double s0);

// Cost scale that puts the first-order condition of a single shared price at p0.
double fit_gamma(std::span<const double> v, std::span<const double> relative_cost,
                 double p0, double alpha);

// ln(sum_i exp(alpha v_i)) / alpha
double bundle_valuation(std::span<const double> v, double alpha);

// sum_i c_i exp(alpha v_i) / sum_i exp(alpha v_i)
double bundle_cost(std::span<const double> c, std::span<const double> v, double alpha);

// K s_i / (alpha s0) with s_i = q / K; proportional to q.
double potential_profit(double q, double alpha, double s0, double consumer_mass);

double consumer_mass(std::span<const double> q, double s0);

}  // namespace tierprice::logit
