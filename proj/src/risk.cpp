#include "tailhedge/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tailhedge/detail/nelder_mead.hpp"
#include "tailhedge/errors.hpp"

namespace tailhedge {

namespace {

constexpr double kShapeLo = -0.5;
constexpr double kShapeHi = 1.0;
constexpr double kShapeZeroTol = 1e-6;  // switch to the xi -> 0 limit below this
constexpr std::size_t kMinTailCount = 20;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must be in (0, 1), got " + std::to_string(alpha));
}

void check_finite(std::span<const double> losses, const char* what) {
    for (double x : losses)
        if (!std::isfinite(x)) throw DataError(std::string(what) + ": non-finite loss value");
}

std::string format_note(const char* fmt, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

// Penalized negative log-likelihood wrapper: keeps the shape inside
// (-0.5, 1) and the support condition satisfied.
double shape_penalty(double xi) {
    double violation = 0.0;
    if (xi <= kShapeLo) violation = kShapeLo - xi + 1e-6;
    if (xi >= kShapeHi) violation = xi - kShapeHi + 1e-6;
    return violation > 0.0 ? 1e30 * (1.0 + violation) : 0.0;
}

}  // namespace

void RiskSpec::validate() const {
    check_alpha(alpha);
    if (tau_steps < 1 || base_steps < 1)
        throw std::invalid_argument("RiskSpec: tau_steps and base_steps must be >= 1");
}

std::size_t tail_count(double alpha, std::size_t n) {
    check_alpha(alpha);
    if (n == 0) throw std::invalid_argument("tail_count: n must be >= 1");
    const double raw = (1.0 - alpha) * static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}

RiskEstimate empirical_var_cvar(std::span<const double> losses, double alpha) {
    check_alpha(alpha);
    if (losses.empty()) throw std::invalid_argument("empirical_var_cvar: empty input");
    check_finite(losses, "empirical_var_cvar");
    const std::size_t k = tail_count(alpha, losses.size());
    std::vector<double> sorted(losses.begin(), losses.end());
    std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += sorted[i];
    RiskEstimate est;
    est.var = sorted[k - 1];
    est.cvar = std::max(sum / static_cast<double>(k), est.var);
    est.alpha = alpha;
    est.tau_steps = 1;
    est.method = "empirical";
    est.n_obs = losses.size();
    return est;
}

RiskEstimate normal_var_cvar(double mean_loss, double sd_loss, double alpha) {
    check_alpha(alpha);
    if (!(sd_loss >= 0.0) || !std::isfinite(sd_loss) || !std::isfinite(mean_loss))
        throw std::invalid_argument("normal_var_cvar: need finite mean and sd >= 0");
    static const boost::math::normal_distribution<double> unit{};
    const double z = boost::math::quantile(unit, alpha);
    RiskEstimate est;
    est.var = mean_loss + sd_loss * z;
    est.cvar = std::max(mean_loss + sd_loss * boost::math::pdf(unit, z) / (1.0 - alpha), est.var);
    est.alpha = alpha;
    est.tau_steps = 1;
    est.method = "normal";
    est.n_obs = 0;
    return est;
}

RiskEstimate normal_var_cvar_from_sample(std::span<const double> losses, double alpha) {
    if (losses.size() < 2)
        throw std::invalid_argument("normal_var_cvar_from_sample: need at least 2 losses");
    check_finite(losses, "normal_var_cvar_from_sample");
    double mean = 0.0;
    for (double x : losses) mean += x;
    mean /= static_cast<double>(losses.size());
    double ss = 0.0;
    for (double x : losses) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(losses.size() - 1));
    RiskEstimate est = normal_var_cvar(mean, sd, alpha);
    est.n_obs = losses.size();
    return est;
}

// ---------------------------------------------------------------------------
// Generalized Pareto peaks-over-threshold
// ---------------------------------------------------------------------------

namespace {

double gpd_nll(double log_beta, double xi, std::span<const double> y) {
    const double penalty = shape_penalty(xi);
    if (penalty > 0.0) return penalty;
    const double beta = std::exp(log_beta);
    const auto n = static_cast<double>(y.size());
    if (std::abs(xi) < 1e-8) {
        double s = 0.0;
        for (double v : y) s += v;
        return n * log_beta + s / beta;
    }
    double log_sum = 0.0, min_t = std::numeric_limits<double>::infinity();
    for (double v : y) {
        const double t = 1.0 + xi * v / beta;
        min_t = std::min(min_t, t);
        if (t <= 0.0) break;
        log_sum += std::log(t);
    }
    if (min_t <= 0.0) return 1e30 * (1.0 - min_t);
    const double nll = n * log_beta + (1.0 + 1.0 / xi) * log_sum;
    return std::isfinite(nll) ? nll : 1e30;
}

struct MleRun {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    bool converged = false;
};

MleRun best_restart(const std::function<double(std::span<const double>)>& nll,
                    const std::vector<std::vector<double>>& starts,
                    const std::vector<double>& step) {
    MleRun best;
    for (const auto& x0 : starts) {
        const auto r = detail::nelder_mead(nll, x0, step);
        if (r.value < best.value) best = {r.x, r.value, r.converged || best.converged};
        else if (r.converged) best.converged = true;
    }
    return best;
}

}  // namespace

GpdFit fit_gpd_exceedances(std::span<const double> exceedances, double threshold,
                           std::size_t n_total) {
    if (exceedances.size() < kMinTailCount)
        throw DataError("fit_gpd: need at least " + std::to_string(kMinTailCount) +
                        " exceedances, got " + std::to_string(exceedances.size()));
    if (n_total < exceedances.size())
        throw std::invalid_argument("fit_gpd: n_total smaller than exceedance count");
    check_finite(exceedances, "fit_gpd");
    double mean = 0.0;
    for (double y : exceedances) {
        if (!(y > 0.0)) throw std::invalid_argument("fit_gpd: exceedances must be > 0");
        mean += y;
    }
    mean /= static_cast<double>(exceedances.size());
    double ss = 0.0;
    for (double y : exceedances) ss += (y - mean) * (y - mean);
    const double var = ss / static_cast<double>(exceedances.size() - 1);

    double xi_mom = 0.0, beta_mom = mean;
    if (var > 0.0) {
        const double ratio = mean * mean / var;
        xi_mom = std::clamp(0.5 * (1.0 - ratio), -0.45, 0.9);
        beta_mom = std::max(0.5 * mean * (1.0 + ratio), 1e-12);
    }
    const std::vector<std::vector<double>> starts{
        {std::log(beta_mom), xi_mom}, {std::log(mean), 0.0}, {std::log(0.7 * mean), 0.3}};
    const auto nll = [&](std::span<const double> x) { return gpd_nll(x[0], x[1], exceedances); };
    const auto run = best_restart(nll, starts, {0.5, 0.1});
    if (!run.converged)
        throw NumericalError("fit_gpd: likelihood optimizer hit the iteration cap (2000)");
    GpdFit fit;
    fit.threshold = threshold;
    fit.scale = std::exp(run.x[0]);
    fit.shape = run.x[1];
    fit.n_total = n_total;
    fit.n_exceed = exceedances.size();
    if (!std::isfinite(fit.scale) || !(fit.scale > 0.0) || fit.shape <= kShapeLo ||
        fit.shape >= kShapeHi)
        throw NumericalError("fit_gpd: optimizer returned an invalid parameter set");
    return fit;
}

GpdFit fit_gpd(std::span<const double> losses, double threshold_quantile) {
    check_alpha(threshold_quantile);
    if (losses.empty()) throw std::invalid_argument("fit_gpd: empty input");
    const double u = empirical_var_cvar(losses, threshold_quantile).var;
    std::vector<double> exceedances;
    for (double x : losses)
        if (x > u) exceedances.push_back(x - u);
    return fit_gpd_exceedances(exceedances, u, losses.size());
}

double gpd_quantile(const GpdFit& fit, double p) {
    if (!(fit.scale > 0.0) || fit.n_exceed == 0 || fit.n_exceed > fit.n_total)
        throw std::invalid_argument("gpd_quantile: invalid fit");
    const double tail_frac = static_cast<double>(fit.n_total) / static_cast<double>(fit.n_exceed);
    const double z = tail_frac * (1.0 - p);
    if (!(p < 1.0) || z > 1.0 + 1e-12)
        throw std::invalid_argument("gpd_quantile: p outside the modeled tail");
    if (std::abs(fit.shape) < kShapeZeroTol) return fit.threshold - fit.scale * std::log(z);
    return fit.threshold + fit.scale / fit.shape * (std::pow(z, -fit.shape) - 1.0);
}

RiskEstimate gpd_var_cvar(const GpdFit& fit, double alpha) {
    check_alpha(alpha);
    if (fit.shape >= 1.0)
        throw std::invalid_argument("gpd_var_cvar: shape >= 1 gives an infinite-mean tail");
    RiskEstimate est;
    est.var = gpd_quantile(fit, alpha);
    est.cvar = (est.var + fit.scale - fit.shape * fit.threshold) / (1.0 - fit.shape);
    const double alt = (est.var + fit.scale - fit.threshold) / (1.0 - fit.shape);
    if (std::abs(alt - est.cvar) > 1e-9 * std::max(1.0, std::abs(est.cvar)))
        est.note = format_note(
            "alt tail-mean form (beta - u)/(1 - xi) gives %.9g vs (beta - xi*u)/(1 - xi) %.9g",
            alt, est.cvar);
    est.cvar = std::max(est.cvar, est.var);
    est.alpha = alpha;
    est.tau_steps = 1;
    est.method = "gpd";
    est.n_obs = fit.n_total;
    return est;
}

// ---------------------------------------------------------------------------
// Generalized extreme value block maxima
// ---------------------------------------------------------------------------

namespace {

double gev_nll(double mu, double log_sigma, double xi, std::span<const double> maxima) {
    const double penalty = shape_penalty(xi);
    if (penalty > 0.0) return penalty;
    const double sigma = std::exp(log_sigma);
    const auto k = static_cast<double>(maxima.size());
    double nll = k * log_sigma;
    if (std::abs(xi) < 1e-8) {
        for (double x : maxima) {
            const double z = (x - mu) / sigma;
            nll += z + std::exp(-z);
        }
    } else {
        for (double x : maxima) {
            const double t = 1.0 + xi * (x - mu) / sigma;
            if (t <= 0.0) return 1e30 * (1.0 - t);
            const double log_t = std::log(t);
            nll += (1.0 + 1.0 / xi) * log_t + std::exp(-log_t / xi);
        }
    }
    return std::isfinite(nll) ? nll : 1e30;
}

}  // namespace

GevFit fit_gev_maxima(std::span<const double> maxima, std::size_t block_size) {
    if (maxima.size() < kMinTailCount)
        throw DataError("fit_gev: need at least " + std::to_string(kMinTailCount) +
                        " complete blocks, got " + std::to_string(maxima.size()));
    check_finite(maxima, "fit_gev");
    double mean = 0.0;
    for (double x : maxima) mean += x;
    mean /= static_cast<double>(maxima.size());
    double ss = 0.0;
    for (double x : maxima) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(maxima.size() - 1));
    if (!(sd > 0.0)) throw DataError("fit_gev: degenerate (constant) block maxima");

    // Gumbel method-of-moments start, then shape perturbations.
    constexpr double euler_gamma = 0.5772156649015329;
    const double sigma0 = sd * std::sqrt(6.0) / 3.141592653589793;
    const double mu0 = mean - euler_gamma * sigma0;
    const std::vector<std::vector<double>> starts{{mu0, std::log(sigma0), 0.0},
                                                  {mu0, std::log(sigma0), 0.2},
                                                  {mu0, std::log(sigma0), -0.2}};
    const auto nll = [&](std::span<const double> x) { return gev_nll(x[0], x[1], x[2], maxima); };
    const auto run = best_restart(nll, starts, {0.5 * sigma0, 0.3, 0.1});
    if (!run.converged)
        throw NumericalError("fit_gev: likelihood optimizer hit the iteration cap (2000)");
    GevFit fit;
    fit.location = run.x[0];
    fit.scale = std::exp(run.x[1]);
    fit.shape = run.x[2];
    fit.block_size = block_size;
    fit.n_blocks = maxima.size();
    if (!std::isfinite(fit.scale) || !(fit.scale > 0.0) || fit.shape <= kShapeLo ||
        fit.shape >= kShapeHi)
        throw NumericalError("fit_gev: optimizer returned an invalid parameter set");
    return fit;
}

GevFit fit_gev(std::span<const double> losses, std::size_t block_size) {
    if (block_size < 1) throw std::invalid_argument("fit_gev: block_size must be >= 1");
    const std::size_t n_blocks = losses.size() / block_size;
    if (n_blocks < kMinTailCount)
        throw DataError("fit_gev: need at least " + std::to_string(kMinTailCount) +
                        " complete blocks, got " + std::to_string(n_blocks));
    std::vector<double> maxima(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        double m = losses[b * block_size];
        for (std::size_t j = 1; j < block_size; ++j)
            m = std::max(m, losses[b * block_size + j]);
        maxima[b] = m;
    }
    return fit_gev_maxima(maxima, block_size);
}

double gev_quantile(const GevFit& fit, double p) {
    if (!(fit.scale > 0.0)) throw std::invalid_argument("gev_quantile: invalid fit");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gev_quantile: p must be in (0, 1)");
    const double w = -std::log(p);
    if (std::abs(fit.shape) < kShapeZeroTol) return fit.location - fit.scale * std::log(w);
    return fit.location + fit.scale / fit.shape * (std::pow(w, -fit.shape) - 1.0);
}

RiskEstimate gev_var_cvar(const GevFit& fit, double alpha) {
    check_alpha(alpha);
    if (fit.shape >= 1.0)
        throw std::invalid_argument("gev_var_cvar: shape >= 1 gives an infinite-mean tail");
    RiskEstimate est;
    est.var = gev_quantile(fit, alpha);
    // Integrate in the tail probability t = 1 - p: -log1p(-t) stays accurate
    // into the extreme tail, where -log(p) rounds to 0 once p collapses to 1
    // and heavy shapes would silently lose tail mass.
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double tail_integral = integrator.integrate(
        [&](double t) {
            const double w = -std::log1p(-t);
            if (std::abs(fit.shape) < kShapeZeroTol)
                return fit.location - fit.scale * std::log(w);
            return fit.location + fit.scale / fit.shape * (std::pow(w, -fit.shape) - 1.0);
        },
        0.0, 1.0 - alpha);
    est.cvar = std::max(tail_integral / (1.0 - alpha), est.var);
    // The survival-style convention inverts at 1 - alpha instead of alpha.
    const double w_alt = -std::log1p(-alpha);
    const double var_alt =
        std::abs(fit.shape) < kShapeZeroTol
            ? fit.location - fit.scale * std::log(w_alt)
            : fit.location + fit.scale / fit.shape * (std::pow(w_alt, -fit.shape) - 1.0);
    if (std::abs(var_alt - est.var) > 1e-9 * std::max(1.0, std::abs(est.var)))
        est.note = format_note("alt quantile convention -log(1-alpha) gives var %.9g vs %.9g",
                               var_alt, est.var);
    est.alpha = alpha;
    est.tau_steps = 1;
    est.method = "gev";
    est.n_obs = fit.n_blocks;
    return est;
}

RiskEstimate scale_horizon(const RiskEstimate& est, std::size_t target_steps) {
    if (target_steps < 1) throw std::invalid_argument("scale_horizon: target_steps must be >= 1");
    if (est.tau_steps < 1) throw std::invalid_argument("scale_horizon: estimate has tau_steps 0");
    const double factor =
        std::sqrt(static_cast<double>(target_steps) / static_cast<double>(est.tau_steps));
    RiskEstimate out = est;
    out.var *= factor;
    out.cvar *= factor;
    out.tau_steps = target_steps;
    return out;
}

RiskEstimate monte_carlo_var_cvar(const ScenarioSet& panel, std::span<const double> weights,
                                  double alpha) {
    panel.validate();
    if (weights.size() != panel.assets.size())
        throw std::invalid_argument("monte_carlo_var_cvar: weights length " +
                                    std::to_string(weights.size()) + " != asset count " +
                                    std::to_string(panel.assets.size()));
    std::vector<double> losses(panel.scenario_count, 0.0);
    for (std::size_t a = 0; a < weights.size(); ++a) {
        const auto terminal = panel.terminal_returns(a);
        for (std::size_t j = 0; j < losses.size(); ++j) losses[j] -= weights[a] * terminal[j];
    }
    RiskEstimate est = empirical_var_cvar(losses, alpha);
    est.method = "monte_carlo";
    est.tau_steps = panel.tau_steps;
    return est;
}

}  // namespace tailhedge
