#pragma once

// Constant-elasticity demand Q(p) = (v / p)^alpha with separable flows.

#include <span>
#include <vector>

namespace tierprice::ced {

// How consumer surplus is reported. UtilityMinusPayment subtracts p*q from
// the integrated utility and reduces to v^a p^(1-a) / (a - 1). AsPrinted
// keeps the alternative reading that subtracts p alone:
// a v^a p^(1-a) / (a - 1) - p.
enum class SurplusForm { UtilityMinusPayment, AsPrinted };

double demand(double v, double p, double alpha);

// Sum over flows of (v_i / p_i)^alpha (p_i - c_i).
double profit(std::span<const double> v, std::span<const double> c,
              std::span<const double> prices, double alpha);

// alpha c / (alpha - 1)
double optimal_price(double c, double alpha);

// Profit-maximizing price shared by every flow of a bundle:
// alpha sum(c v^a) / ((alpha - 1) sum(v^a)).
double bundle_price(std::span<const double> v, std::span<const double> c, double alpha);

double consumer_surplus(std::span<const double> v, std::span<const double> prices,
                        double alpha,
                        SurplusForm form = SurplusForm::UtilityMinusPayment);

// v_i = p0 q_i^(1/alpha), so that demand(v_i, p0) == q_i.
std::vector<double> fit_valuations(std::span<const double> q, double p0, double alpha);

// Cost scale that makes p0 the profit-maximizing uniform price for costs
// gamma * f_i.
double fit_gamma(std::span<const double> v, std::span<const double> relative_cost,
                 double p0, double alpha);

// Profit of a flow priced alone at its optimum.
double potential_profit(double v, double c, double alpha);

}  // namespace tierprice::ced
