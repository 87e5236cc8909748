#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tailhedge/dates.hpp"
#include "tailhedge/linalg.hpp"
#include "tailhedge/marketdata.hpp"
#include "tailhedge/portfolio.hpp"
#include "tailhedge/risk.hpp"
#include "tailhedge/train.hpp"

namespace tailhedge {

struct BacktestConfig {
    Date test_start;
    Date test_end;
    std::size_t rebalance_every = 1;
    double initial_units = 1.0;  // primary holdings, fixed over the run
    CostSpec costs;
    double alpha = 0.99;

    void validate() const;
};

struct BacktestMetrics {
    RiskEstimate primal;
    RiskEstimate hedged;
};

// dates covers the T+1 valuation points; everything per-step has length T.
// Net values are normalized to 1 at dates.front(); pnl entries are net-value
// changes, so metrics and histograms read them directly. hedge_units(t, i) is
// the signed position held over step t (negative = short).
struct BacktestReport {
    std::vector<Date> dates;
    std::vector<double> primal_net_value;
    std::vector<double> hedged_net_value;
    Matrix hedge_units;
    std::vector<double> primal_pnl;
    std::vector<double> hedged_pnl;
    double primary_units = 1.0;
    double alpha = 0.99;
    BacktestMetrics metrics;

    // Signed hedge units per primary unit for one instrument.
    [[nodiscard]] std::vector<double> hedge_ratio(std::size_t instrument = 0) const;
};

// Walks the test window step by step: every rebalance_every steps the policy
// maps the trailing feature_window returns of the primary asset to hedge
// units, trades from the previous position (costs on the trade), and both
// books accrue the next price move. Features are strictly trailing; nothing
// at step t reads data after t.
[[nodiscard]] BacktestReport run_backtest(const HedgePolicy& policy, const PriceSeries& primary,
                                          std::span<const PriceSeries> hedges,
                                          const BacktestConfig& cfg);
// Reference setup: the hedge instrument is the primary asset itself.
[[nodiscard]] BacktestReport run_backtest(const HedgePolicy& policy, const PriceSeries& primary,
                                          const BacktestConfig& cfg);

// Tail metrics of the negated pnl series at report.alpha, primal and hedged.
[[nodiscard]] BacktestMetrics report_metrics(const BacktestReport& report);

struct Histogram {
    std::vector<double> edges;        // n_bins + 1
    std::vector<std::size_t> counts;  // n_bins, sums to the series length
};

// Equal-width bins spanning [min, max] (final bin right-inclusive); a
// degenerate range is widened by 0.5 each side.
[[nodiscard]] Histogram pnl_histogram(std::span<const double> pnl, std::size_t n_bins);
// Same with caller-fixed bounds, so several series can share the binning.
[[nodiscard]] Histogram pnl_histogram(std::span<const double> pnl, std::size_t n_bins, double lo,
                                      double hi);

// Pointwise mean of hedge ratios across runs that share dates; (t, i) indexes
// step and instrument.
[[nodiscard]] Matrix expected_hedge_ratio(std::span<const BacktestReport> reports);

}  // namespace tailhedge
