#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "tailhedge/bootstrap.hpp"

namespace tailhedge {

struct RiskSpec {
    double alpha = 0.99;         // confidence level in (0, 1)
    std::size_t tau_steps = 1;   // horizon in observation steps
    std::size_t base_steps = 1;  // sampling interval the losses were measured at

    void validate() const;
};

// Losses are positive; note carries diagnostics from formula cross-checks.
struct RiskEstimate {
    double var = 0.0;
    double cvar = 0.0;
    double alpha = 0.0;
    std::size_t tau_steps = 1;
    std::string method;
    std::size_t n_obs = 0;
    std::string note;
};

// Tail size k = ceil((1-alpha)*n), guarded against floating-point overshoot
// of the product, never below 1.
[[nodiscard]] std::size_t tail_count(double alpha, std::size_t n);

// VaR = k-th largest loss, CVaR = mean of the k largest (stable descending
// sort, ties kept by original position).
[[nodiscard]] RiskEstimate empirical_var_cvar(std::span<const double> losses, double alpha);

// VaR = mu + sigma z_alpha; CVaR = mu + sigma phi(z_alpha)/(1-alpha).
[[nodiscard]] RiskEstimate normal_var_cvar(double mean_loss, double sd_loss, double alpha);
// Same, with moments estimated from the sample (sd uses divisor n-1).
[[nodiscard]] RiskEstimate normal_var_cvar_from_sample(std::span<const double> losses,
                                                       double alpha);

struct GpdFit {
    double threshold = 0.0;  // u
    double scale = 0.0;      // beta > 0
    double shape = 0.0;      // xi, constrained to (-0.5, 1)
    std::size_t n_total = 0;
    std::size_t n_exceed = 0;
};

// Peaks-over-threshold fit: u is the empirical threshold_quantile of losses,
// exceedances are the strictly positive gaps above it, (beta, xi) by
// derivative-free likelihood maximization with three moment-seeded restarts.
[[nodiscard]] GpdFit fit_gpd(std::span<const double> losses, double threshold_quantile = 0.95);
[[nodiscard]] GpdFit fit_gpd_exceedances(std::span<const double> exceedances, double threshold,
                                         std::size_t n_total);
[[nodiscard]] RiskEstimate gpd_var_cvar(const GpdFit& fit, double alpha);
// Loss quantile of the fitted tail model at probability p >= 1 - n_exceed/n_total.
[[nodiscard]] double gpd_quantile(const GpdFit& fit, double p);

struct GevFit {
    double location = 0.0;  // mu
    double scale = 0.0;     // sigma > 0
    double shape = 0.0;     // xi, constrained to (-0.5, 1)
    std::size_t block_size = 0;
    std::size_t n_blocks = 0;
};

// Block-maxima fit over consecutive non-overlapping blocks (partial tail
// block dropped); same optimizer/restart scheme as the GPD fit.
[[nodiscard]] GevFit fit_gev(std::span<const double> losses, std::size_t block_size);
[[nodiscard]] GevFit fit_gev_maxima(std::span<const double> maxima, std::size_t block_size);
// VaR inverts the fitted CDF at alpha; CVaR integrates the quantile function
// over [alpha, 1).
[[nodiscard]] RiskEstimate gev_var_cvar(const GevFit& fit, double alpha);
[[nodiscard]] double gev_quantile(const GevFit& fit, double p);

// Square-root-of-time rescaling of var and cvar to target_steps.
[[nodiscard]] RiskEstimate scale_horizon(const RiskEstimate& est, std::size_t target_steps);

// Scenario losses = negated weighted compounded panel returns, then empirical.
[[nodiscard]] RiskEstimate monte_carlo_var_cvar(const ScenarioSet& panel,
                                                std::span<const double> weights, double alpha);

}  // namespace tailhedge
