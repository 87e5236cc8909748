#include "tailhedge/portfolio.hpp"

#include <cmath>
#include <stdexcept>

#include "tailhedge/linalg.hpp"

namespace tailhedge {

void CostSpec::validate() const {
    if (!(proportional_rate >= 0.0) || !(fixed_fee >= 0.0))
        throw std::invalid_argument("CostSpec: rates must be >= 0");
}

namespace {

void check_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

PnlDecomposition decompose_return(std::span<const double> n_prev, std::span<const double> dn,
                                  std::span<const double> s_prev, std::span<const double> ds) {
    check_same_size(n_prev, dn, "decompose_return");
    check_same_size(n_prev, s_prev, "decompose_return");
    check_same_size(n_prev, ds, "decompose_return");
    const double v0 = dot(n_prev, s_prev);
    if (v0 == 0.0) throw std::invalid_argument("decompose_return: zero initial value");
    PnlDecomposition out;
    out.unrealized = dot(n_prev, ds);
    out.realized_cashflow = dot(dn, s_prev);
    out.implicit_costs = dot(dn, ds);
    out.total_return = (out.unrealized + out.realized_cashflow + out.implicit_costs) / v0;
    return out;
}

HedgedReturnSplit hedged_return(const Holdings& holdings, std::span<const double> dn_c,
                                std::span<const double> dn_h, std::span<const double> s_c,
                                std::span<const double> s_h, std::span<const double> ds_c,
                                std::span<const double> ds_h) {
    const std::span<const double> n_c = holdings.primary_units;
    const std::span<const double> n_h = holdings.hedge_units;
    check_same_size(n_c, dn_c, "hedged_return");
    check_same_size(n_c, s_c, "hedged_return");
    check_same_size(n_c, ds_c, "hedged_return");
    check_same_size(n_h, dn_h, "hedged_return");
    check_same_size(n_h, s_h, "hedged_return");
    check_same_size(n_h, ds_h, "hedged_return");
    const double v0 = dot(n_c, s_c) + dot(n_h, s_h);
    if (v0 == 0.0) throw std::invalid_argument("hedged_return: zero combined initial value");
    HedgedReturnSplit out;
    out.primary_unrealized = dot(n_c, ds_c) / v0;
    out.primary_realized = dot(dn_c, s_c) / v0;
    out.primary_implicit = dot(dn_c, ds_c) / v0;
    out.hedging_unrealized = dot(n_h, ds_h) / v0;
    out.hedging_realized = dot(dn_h, s_h) / v0;
    out.hedging_implicit = dot(dn_h, ds_h) / v0;
    out.total_return = out.primary_unrealized + out.primary_realized + out.primary_implicit +
                       out.hedging_unrealized + out.hedging_realized + out.hedging_implicit;
    return out;
}

double hedged_return_same_asset(std::span<const double> n_hedged,
                                std::span<const double> dn_hedged, std::span<const double> s,
                                std::span<const double> ds) {
    check_same_size(n_hedged, dn_hedged, "hedged_return_same_asset");
    check_same_size(n_hedged, s, "hedged_return_same_asset");
    check_same_size(n_hedged, ds, "hedged_return_same_asset");
    const double v0 = dot(n_hedged, s);
    if (v0 == 0.0) throw std::invalid_argument("hedged_return_same_asset: zero initial value");
    return (dot(n_hedged, ds) + dot(dn_hedged, s) + dot(dn_hedged, ds)) / v0;
}

double weights_return(std::span<const double> omega, std::span<const double> pi,
                      std::span<const double> r_c, std::span<const double> r_h) {
    check_same_size(omega, r_c, "weights_return");
    check_same_size(pi, r_h, "weights_return");
    return dot(omega, r_c) + dot(pi, r_h);
}

double explicit_costs(const CostSpec& spec, std::span<const double> dn,
                      std::span<const double> s) {
    spec.validate();
    check_same_size(dn, s, "explicit_costs");
    double notional = 0.0;
    bool traded = false;
    for (std::size_t i = 0; i < dn.size(); ++i) {
        notional += std::abs(dn[i]) * s[i];
        traded = traded || std::abs(dn[i]) > 0.0;
    }
    return spec.proportional_rate * notional + (traded ? spec.fixed_fee : 0.0);
}

double loss_variable(double v_start, double v_end, double costs) {
    return -v_end + v_start + costs;
}

}  // namespace tailhedge
