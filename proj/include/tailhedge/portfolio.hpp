#pragma once

#include <span>
#include <vector>

namespace tailhedge {

struct Holdings {
    std::vector<double> primary_units;
    std::vector<double> hedge_units;
};

struct CostSpec {
    double proportional_rate = 0.0;  // fraction of traded notional per trade
    double fixed_fee = 0.0;          // currency per rebalance event with any trade

    void validate() const;
};

// One-period split of portfolio value change, all in currency:
//   unrealized       = n_prev . ds   (positions held through the move)
//   realized_cashflow = dn . s_prev  (value injected/removed by the trade)
//   implicit_costs   = dn . ds       (slippage of the trade against the move)
// The three terms sum to total_return times the initial value exactly.
struct PnlDecomposition {
    double unrealized = 0.0;
    double realized_cashflow = 0.0;
    double implicit_costs = 0.0;
    double total_return = 0.0;  // dimensionless
};

[[nodiscard]] PnlDecomposition decompose_return(std::span<const double> n_prev,
                                                std::span<const double> dn,
                                                std::span<const double> s_prev,
                                                std::span<const double> ds);

// Six-way split of the hedged portfolio return, each component expressed as a
// fraction of the combined initial value.
struct HedgedReturnSplit {
    double primary_unrealized = 0.0;
    double primary_realized = 0.0;
    double primary_implicit = 0.0;
    double hedging_unrealized = 0.0;
    double hedging_realized = 0.0;
    double hedging_implicit = 0.0;
    double total_return = 0.0;
};

[[nodiscard]] HedgedReturnSplit hedged_return(const Holdings& holdings,
                                              std::span<const double> dn_c,
                                              std::span<const double> dn_h,
                                              std::span<const double> s_c,
                                              std::span<const double> s_h,
                                              std::span<const double> ds_c,
                                              std::span<const double> ds_h);

// Collapsed form when the hedge trades the primary asset itself: combined
// units against one price vector. Agrees with hedged_return's total.
[[nodiscard]] double hedged_return_same_asset(std::span<const double> n_hedged,
                                              std::span<const double> dn_hedged,
                                              std::span<const double> s,
                                              std::span<const double> ds);

// Portfolio return in weight space: omega . r_c + pi . r_h.
[[nodiscard]] double weights_return(std::span<const double> omega, std::span<const double> pi,
                                    std::span<const double> r_c, std::span<const double> r_h);

// proportional_rate * sum |dn_i| * s_i, plus fixed_fee if anything traded.
[[nodiscard]] double explicit_costs(const CostSpec& spec, std::span<const double> dn,
                                    std::span<const double> s);

// Loss over one period, positive = loss: -v_end + v_start + costs.
[[nodiscard]] double loss_variable(double v_start, double v_end, double costs);

}  // namespace tailhedge
