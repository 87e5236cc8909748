#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tailhedge/portfolio.hpp"

using namespace tailhedge;

namespace {
using V = std::vector<double>;
}

TEST_SUITE_BEGIN("portfolio");

TEST_CASE("single-period decomposition matches hand arithmetic") {
    const auto hold = decompose_return(V{1.0}, V{0.0}, V{100.0}, V{1.0});
    CHECK(hold.unrealized == 1.0);
    CHECK(hold.realized_cashflow == 0.0);
    CHECK(hold.implicit_costs == 0.0);
    CHECK(hold.total_return == doctest::Approx(0.01).epsilon(1e-14));

    const auto add = decompose_return(V{1.0}, V{1.0}, V{100.0}, V{1.0});
    CHECK(add.unrealized == 1.0);
    CHECK(add.realized_cashflow == 100.0);
    CHECK(add.implicit_costs == 1.0);
    CHECK(add.total_return == doctest::Approx(1.02).epsilon(1e-14));

    const auto close = decompose_return(V{1.0}, V{-1.0}, V{100.0}, V{1.0});
    CHECK(close.unrealized == 1.0);
    CHECK(close.realized_cashflow == -100.0);
    CHECK(close.implicit_costs == -1.0);
    CHECK(close.total_return == -1.0);

    CHECK_THROWS_AS((void)decompose_return(V{0.0}, V{1.0}, V{100.0}, V{1.0}),
                    std::invalid_argument);
}

TEST_CASE("decomposition components always sum to total pnl") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> units(-3.0, 3.0);
    std::uniform_real_distribution<double> price(10.0, 200.0);
    std::uniform_real_distribution<double> move(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 1 + trial % 4;
        V n(d), dn(d), s(d), ds(d);
        for (std::size_t i = 0; i < d; ++i) {
            n[i] = units(gen);
            dn[i] = units(gen);
            s[i] = price(gen);
            ds[i] = move(gen);
        }
        double v0 = 0.0;
        for (std::size_t i = 0; i < d; ++i) v0 += n[i] * s[i];
        if (std::abs(v0) < 1e-6) continue;
        const auto split = decompose_return(n, dn, s, ds);
        const double lhs = split.unrealized + split.realized_cashflow + split.implicit_costs;
        const double rhs = split.total_return * v0;
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("hedged return splits six ways and sums to total") {
    Holdings flat;
    flat.primary_units = {2.0};
    flat.hedge_units = {0.0};
    const auto r =
        hedged_return(flat, V{0.0}, V{0.0}, V{100.0}, V{50.0}, V{3.0}, V{1.5});
    CHECK(r.total_return == doctest::Approx(0.03).epsilon(1e-14));
    CHECK(r.primary_unrealized == doctest::Approx(0.03).epsilon(1e-14));
    CHECK(r.hedging_unrealized == 0.0);
    CHECK(r.primary_realized == 0.0);
    CHECK(r.hedging_realized == 0.0);

    Holdings offset;
    offset.primary_units = {1.0};
    offset.hedge_units = {-1.0};
    CHECK_THROWS_AS((void)hedged_return(offset, V{0.0}, V{0.0}, V{100.0}, V{100.0}, V{2.0},
                                        V{2.0}),
                    std::invalid_argument);

    Holdings half;
    half.primary_units = {1.0};
    half.hedge_units = {-0.5};
    const auto h =
        hedged_return(half, V{0.0}, V{0.0}, V{100.0}, V{100.0}, V{2.0}, V{2.0});
    CHECK(h.total_return == doctest::Approx(0.02).epsilon(1e-14));  // (2 - 1) / 50
}

TEST_CASE("combined-book shortcut agrees with the full split") {
    const double direct = hedged_return_same_asset(V{0.5}, V{0.0}, V{100.0}, V{2.0});
    CHECK(direct == doctest::Approx(0.02).epsilon(1e-14));

    const double trade = hedged_return_same_asset(V{1.0}, V{-0.5}, V{100.0}, V{2.0});
    CHECK(trade == doctest::Approx(-0.49).epsilon(1e-14));  // (2 - 0.5 * 102) / 100

    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> units(-2.0, 2.0);
    std::uniform_real_distribution<double> price(20.0, 150.0);
    std::uniform_real_distribution<double> move(-4.0, 4.0);
    int tested = 0;
    while (tested < 1000) {
        const std::size_t d = 1 + tested % 3;
        Holdings h;
        h.primary_units.resize(d);
        h.hedge_units.resize(d);
        V dn_c(d, 0.0), dn_h(d), s(d), ds(d), combined(d), dn_sum(d);
        double v0 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            h.primary_units[i] = units(gen);
            h.hedge_units[i] = units(gen);
            dn_h[i] = units(gen);
            s[i] = price(gen);
            ds[i] = move(gen);
            combined[i] = h.primary_units[i] + h.hedge_units[i];
            dn_sum[i] = dn_c[i] + dn_h[i];
            v0 += combined[i] * s[i];
        }
        if (std::abs(v0) < 1.0) continue;
        ++tested;
        const auto full = hedged_return(h, dn_c, dn_h, s, s, ds, ds);
        const double quick = hedged_return_same_asset(combined, dn_sum, s, ds);
        CHECK(std::abs(full.total_return - quick) <=
              1e-12 * std::max(1.0, std::abs(quick)));
    }
}

TEST_CASE("weight-space return is a plain inner product") {
    CHECK(weights_return(V{1.0}, V{0.0}, V{0.03}, V{0.0}) == 0.03);
    CHECK(weights_return(V{1.0}, V{-1.0}, V{0.05}, V{0.05}) == 0.0);
    const double mixed =
        weights_return(V{0.6, 0.4}, V{-0.2}, V{0.01, -0.02}, V{0.05});
    CHECK(mixed == doctest::Approx(-0.012).epsilon(1e-14));
    CHECK_THROWS_AS((void)weights_return(V{1.0, 2.0}, V{}, V{0.01}, V{}),
                    std::invalid_argument);
}

TEST_CASE("explicit costs charge notional and a fixed fee per event") {
    CostSpec spec;
    spec.proportional_rate = 0.001;
    CHECK(explicit_costs(spec, V{2.0}, V{100.0}) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(explicit_costs(spec, V{0.0}, V{100.0}) == 0.0);

    CostSpec with_fee = spec;
    with_fee.fixed_fee = 1.0;
    CHECK(explicit_costs(with_fee, V{0.0, 0.0}, V{100.0, 50.0}) == 0.0);  // no trade, no fee
    CHECK(explicit_costs(with_fee, V{1.0, -1.0}, V{100.0, 50.0}) ==
          doctest::Approx(1.15).epsilon(1e-14));

    // degree-one homogeneity in the trade when the fixed fee is off
    const double once = explicit_costs(spec, V{1.5, -0.5}, V{80.0, 40.0});
    const double thrice = explicit_costs(spec, V{4.5, -1.5}, V{80.0, 40.0});
    CHECK(thrice == doctest::Approx(3.0 * once).epsilon(1e-12));

    CostSpec bad;
    bad.proportional_rate = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("loss variable sign conventions") {
    CHECK(loss_variable(100.0, 100.0, 0.0) == 0.0);
    CHECK(loss_variable(100.0, 98.0, 0.5) == 2.5);
    CHECK(loss_variable(100.0, 105.0, 0.0) == -5.0);
    // antitone in the end value, additive in costs
    CHECK(loss_variable(100.0, 99.0, 0.0) > loss_variable(100.0, 101.0, 0.0));
    CHECK(loss_variable(100.0, 98.0, 1.5) == loss_variable(100.0, 98.0, 0.0) + 1.5);
}

TEST_SUITE_END();
