#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tailhedge/dates.hpp"

namespace tailhedge {

// Daily close series; dates strictly increasing, closes positive, length >= 2.
struct PriceSeries {
    std::vector<Date> dates;
    std::vector<double> closes;
    std::string asset_id;

    PriceSeries() = default;
    PriceSeries(std::vector<Date> dates, std::vector<double> closes, std::string asset_id);
    [[nodiscard]] std::size_t size() const { return closes.size(); }
};

// Simple returns; returns[i] belongs to the interval ending at dates[i].
struct ReturnSeries {
    std::vector<Date> dates;
    std::vector<double> returns;
    std::string asset_id;

    ReturnSeries() = default;
    ReturnSeries(std::vector<Date> dates, std::vector<double> returns, std::string asset_id);
    [[nodiscard]] std::size_t size() const { return returns.size(); }
};

enum class PathModel { gbm, heston };

[[nodiscard]] std::string_view to_string(PathModel m);

// Synthetic path generator settings. GBM steps exactly on the log-normal
// solution; Heston uses full-truncation Euler on the variance (max(v,0) in
// drift and diffusion) with a log-Euler price step, so closes stay positive.
struct SyntheticSpec {
    PathModel model = PathModel::gbm;
    double mu = 0.0;     // drift, per year
    double sigma = 0.2;  // gbm volatility, per year
    double kappa = 1.0;  // heston mean-reversion speed
    double theta = 0.04; // heston long-run variance
    double nu = 0.5;     // heston vol of variance
    double rho = -0.7;   // heston price/variance correlation
    double v0 = 0.04;    // heston initial variance
    double s0 = 100.0;
    std::size_t steps = 252;
    double dt = 1.0 / 252.0;  // years per step
    std::uint64_t seed = 0;
    Date start_date{2000, 1, 3};

    void validate() const;
    [[nodiscard]] static SyntheticSpec from_json_text(std::string_view text);
    [[nodiscard]] static SyntheticSpec from_json_file(const std::filesystem::path& path);
};

[[nodiscard]] PriceSeries load_csv(const std::filesystem::path& path);
void write_csv(const PriceSeries& prices, const std::filesystem::path& path);

[[nodiscard]] ReturnSeries to_returns(const PriceSeries& prices);

// Rows with dates in [start, end]; order preserved. Empty selection is an error.
[[nodiscard]] ReturnSeries window(const ReturnSeries& series, Date start, Date end);
[[nodiscard]] PriceSeries window_prices(const PriceSeries& series, Date start, Date end);

// n_paths independent paths dated on consecutive weekdays; path p draws from
// RNG stream (seed, p), so results do not depend on evaluation order.
[[nodiscard]] std::vector<PriceSeries> simulate_paths(const SyntheticSpec& spec,
                                                      std::size_t n_paths);

// Path plus the truncated variance actually used at each step (empty for GBM).
struct SimulatedPath {
    PriceSeries prices;
    std::vector<double> variance;
};
[[nodiscard]] std::vector<SimulatedPath> simulate_paths_detail(const SyntheticSpec& spec,
                                                               std::size_t n_paths);

}  // namespace tailhedge
