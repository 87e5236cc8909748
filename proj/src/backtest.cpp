#include "tailhedge/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tailhedge/errors.hpp"

namespace tailhedge {

void BacktestConfig::validate() const {
    if (!Date::valid(test_start.year, test_start.month, test_start.day) ||
        !Date::valid(test_end.year, test_end.month, test_end.day))
        throw std::invalid_argument("BacktestConfig: invalid test dates");
    if (!(test_start < test_end))
        throw std::invalid_argument("BacktestConfig: test_start must precede test_end");
    if (rebalance_every < 1)
        throw std::invalid_argument("BacktestConfig: rebalance_every must be >= 1");
    if (!std::isfinite(initial_units))
        throw std::invalid_argument("BacktestConfig: initial_units must be finite");
    if (initial_units == 0.0)
        throw std::invalid_argument("BacktestConfig: initial_units must be nonzero");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("BacktestConfig: alpha must be in (0, 1)");
    costs.validate();
}

std::vector<double> BacktestReport::hedge_ratio(std::size_t instrument) const {
    if (instrument >= hedge_units.cols())
        throw std::invalid_argument("hedge_ratio: no instrument " + std::to_string(instrument));
    std::vector<double> ratio(hedge_units.rows());
    for (std::size_t t = 0; t < ratio.size(); ++t)
        ratio[t] = hedge_units(t, instrument) / primary_units;
    return ratio;
}

BacktestReport run_backtest(const HedgePolicy& policy, const PriceSeries& primary,
                            std::span<const PriceSeries> hedges, const BacktestConfig& cfg) {
    policy.validate();
    cfg.validate();
    if (hedges.size() != policy.n_instruments)
        throw std::invalid_argument("run_backtest: " + std::to_string(hedges.size()) +
                                    " hedge series for a policy with " +
                                    std::to_string(policy.n_instruments) + " instruments");
    for (const auto& h : hedges)
        if (h.dates != primary.dates)
            throw DataError("run_backtest: hedge series '" + h.asset_id +
                            "' is not date-aligned with '" + primary.asset_id + "'");

    const auto& dates = primary.dates;
    const auto lo = std::lower_bound(dates.begin(), dates.end(), cfg.test_start);
    const auto hi = std::upper_bound(dates.begin(), dates.end(), cfg.test_end);
    if (lo == dates.end() || hi == dates.begin())
        throw DataError("run_backtest: test window selects no data");
    const std::size_t i0 = static_cast<std::size_t>(lo - dates.begin());
    const std::size_t i_end = static_cast<std::size_t>(hi - dates.begin()) - 1;
    if (i_end <= i0) throw DataError("run_backtest: test window has no steps");
    const std::size_t w = policy.feature_window;
    if (i0 < w)
        throw DataError("run_backtest: need " + std::to_string(w) +
                        " returns before the test window, have " + std::to_string(i0));

    const std::size_t n_steps = i_end - i0;
    const std::size_t d = policy.n_instruments;
    BacktestReport report;
    report.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(i0),
                        dates.begin() + static_cast<std::ptrdiff_t>(i_end) + 1);
    report.primary_units = cfg.initial_units;
    report.alpha = cfg.alpha;
    report.hedge_units = Matrix(n_steps, d);
    report.primal_pnl.resize(n_steps);
    report.hedged_pnl.resize(n_steps);
    report.primal_net_value.assign(n_steps + 1, 1.0);
    report.hedged_net_value.assign(n_steps + 1, 1.0);

    const double v0 = cfg.initial_units * primary.closes[i0];
    std::vector<double> features(w);
    std::vector<double> held(d, 0.0);
    std::vector<double> trade(d, 0.0);
    std::vector<double> trade_prices(d, 0.0);
    for (std::size_t t = 0; t < n_steps; ++t) {
        const std::size_t i = i0 + t;
        double cost = 0.0;
        if (t % cfg.rebalance_every == 0) {
            for (std::size_t f = 0; f < w; ++f) {
                const std::size_t j = i - w + 1 + f;
                features[f] = primary.closes[j] / primary.closes[j - 1] - 1.0;
            }
            const std::vector<double> target = policy.hedge_units(features);
            for (std::size_t q = 0; q < d; ++q) {
                trade[q] = target[q] - held[q];
                trade_prices[q] = hedges[q].closes[i];
            }
            cost = explicit_costs(cfg.costs, trade, trade_prices);
            held = target;
        }
        for (std::size_t q = 0; q < d; ++q) report.hedge_units(t, q) = held[q];

        const double primal_step = cfg.initial_units * (primary.closes[i + 1] - primary.closes[i]);
        double hedge_step = 0.0;
        for (std::size_t q = 0; q < d; ++q)
            hedge_step += held[q] * (hedges[q].closes[i + 1] - hedges[q].closes[i]);
        report.primal_pnl[t] = primal_step / v0;
        report.hedged_pnl[t] = (primal_step + hedge_step - cost) / v0;
        report.primal_net_value[t + 1] = report.primal_net_value[t] + report.primal_pnl[t];
        report.hedged_net_value[t + 1] = report.hedged_net_value[t] + report.hedged_pnl[t];
    }
    report.metrics = report_metrics(report);
    return report;
}

BacktestReport run_backtest(const HedgePolicy& policy, const PriceSeries& primary,
                            const BacktestConfig& cfg) {
    const PriceSeries self[] = {primary};
    return run_backtest(policy, primary, self, cfg);
}

BacktestMetrics report_metrics(const BacktestReport& report) {
    if (report.primal_pnl.empty() || report.hedged_pnl.size() != report.primal_pnl.size())
        throw std::invalid_argument("report_metrics: malformed pnl series");
    auto negate = [](std::span<const double> xs) {
        std::vector<double> losses(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) losses[i] = -xs[i];
        return losses;
    };
    BacktestMetrics m;
    m.primal = empirical_var_cvar(negate(report.primal_pnl), report.alpha);
    m.hedged = empirical_var_cvar(negate(report.hedged_pnl), report.alpha);
    return m;
}

Histogram pnl_histogram(std::span<const double> pnl, std::size_t n_bins) {
    if (pnl.empty()) throw DataError("pnl_histogram: empty series");
    const auto [lo_it, hi_it] = std::minmax_element(pnl.begin(), pnl.end());
    return pnl_histogram(pnl, n_bins, *lo_it, *hi_it);
}

Histogram pnl_histogram(std::span<const double> pnl, std::size_t n_bins, double lo, double hi) {
    if (pnl.empty()) throw DataError("pnl_histogram: empty series");
    if (n_bins < 1) throw std::invalid_argument("pnl_histogram: need at least one bin");
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
        throw std::invalid_argument("pnl_histogram: bad bounds");
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double span = hi - lo;
    Histogram h;
    h.edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b)
        h.edges[b] = lo + span * static_cast<double>(b) / static_cast<double>(n_bins);
    h.edges.front() = lo;
    h.edges.back() = hi;
    h.counts.assign(n_bins, 0);
    for (double x : pnl) {
        if (x < lo || x > hi)
            throw std::invalid_argument("pnl_histogram: value outside the given bounds");
        auto b = static_cast<std::size_t>((x - lo) / span * static_cast<double>(n_bins));
        if (b >= n_bins) b = n_bins - 1;  // right edge folds into the last bin
        ++h.counts[b];
    }
    return h;
}

Matrix expected_hedge_ratio(std::span<const BacktestReport> reports) {
    if (reports.empty()) throw std::invalid_argument("expected_hedge_ratio: no reports");
    const auto& first = reports.front();
    const std::size_t n_steps = first.hedge_units.rows();
    const std::size_t d = first.hedge_units.cols();
    for (const auto& r : reports) {
        if (r.dates != first.dates)
            throw std::invalid_argument("expected_hedge_ratio: reports disagree on dates");
        if (r.hedge_units.rows() != n_steps || r.hedge_units.cols() != d)
            throw std::invalid_argument("expected_hedge_ratio: reports disagree on shape");
    }
    Matrix mean(n_steps, d);
    for (std::size_t t = 0; t < n_steps; ++t)
        for (std::size_t q = 0; q < d; ++q) {
            double s = 0.0;
            for (const auto& r : reports) s += r.hedge_units(t, q) / r.primary_units;
            mean(t, q) = s / static_cast<double>(reports.size());
        }
    return mean;
}

}  // namespace tailhedge
