#include "tailhedge/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tailhedge/errors.hpp"
#include "tailhedge/risk.hpp"
#include "tailhedge/threads.hpp"

namespace tailhedge {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

LossGrads evaluate_loss(const HedgePolicy& policy, std::span<const AnchorBatch> batches,
                        const CostSpec& costs, double alpha, std::span<const double> initial_hedge,
                        bool with_grads) {
    policy.validate();
    costs.validate();
    if (batches.empty()) throw DataError("cvar_loss: no anchor batches");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("cvar_loss: alpha must be in (0, 1)");
    const std::size_t d = policy.n_instruments;
    if (!initial_hedge.empty() && initial_hedge.size() != d)
        throw std::invalid_argument("cvar_loss: initial hedge width mismatch");
    for (const auto& b : batches) b.validate(policy.feature_window, d);

    const std::size_t n_anchors = batches.size();
    LossGrads out;
    out.hedge_units = Matrix(n_anchors, d);
    std::vector<double> cvars(n_anchors, 0.0);
    std::vector<MlpParams> slot_grads;
    if (with_grads) slot_grads.assign(kParallelSlots, MlpParams::zeros(policy.spec));

    parallel_for_slots(n_anchors, [&](std::size_t slot, std::size_t begin, std::size_t end) {
        ForwardCache cache;
        std::vector<double> x;
        std::vector<std::size_t> order;
        for (std::size_t t = begin; t < end; ++t) {
            const AnchorBatch& b = batches[t];
            const std::size_t m = b.primary_pnl.size();
            const std::size_t k = tail_count(alpha, m);
            std::vector<double> h =
                forward(policy.params, policy.spec, b.features, with_grads ? &cache : nullptr);
            std::vector<char> clipped(d, 0);
            if (policy.output_clip > 0.0)
                for (std::size_t i = 0; i < d; ++i)
                    if (std::abs(h[i]) > policy.output_clip) {
                        h[i] = std::copysign(policy.output_clip, h[i]);
                        clipped[i] = 1;
                    }
            for (std::size_t i = 0; i < d; ++i) out.hedge_units(t, i) = h[i];

            std::vector<double> dn(d);
            for (std::size_t i = 0; i < d; ++i)
                dn[i] = h[i] - (initial_hedge.empty() ? 0.0 : initial_hedge[i]);
            const double cost = explicit_costs(costs, dn, b.hedge_prices);

            x.assign(m, 0.0);
            for (std::size_t j = 0; j < m; ++j)
                x[j] = -(b.primary_pnl[j] + dot(h, b.hedge_moves.row(j))) + cost;
            order.resize(m);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t c) { return x[a] > x[c]; });
            double tail_sum = 0.0;
            for (std::size_t r = 0; r < k; ++r) tail_sum += x[order[r]];
            cvars[t] = tail_sum / static_cast<double>(k);

            if (with_grads) {
                std::vector<double> upstream(d, 0.0);
                for (std::size_t r = 0; r < k; ++r) {
                    const auto row = b.hedge_moves.row(order[r]);
                    for (std::size_t i = 0; i < d; ++i) upstream[i] -= row[i];
                }
                const double tail_w =
                    1.0 / (static_cast<double>(k) * static_cast<double>(n_anchors));
                const double cost_w =
                    costs.proportional_rate / static_cast<double>(n_anchors);
                for (std::size_t i = 0; i < d; ++i) {
                    upstream[i] *= tail_w;
                    upstream[i] += cost_w * b.hedge_prices[i] * sgn(dn[i]);
                    if (clipped[i]) upstream[i] = 0.0;
                }
                backward(policy.params, policy.spec, cache, upstream, slot_grads[slot]);
            }
        }
    });

    out.loss = pairwise_sum(cvars) / static_cast<double>(n_anchors);
    if (with_grads) {
        for (std::size_t gap = 1; gap < kParallelSlots; gap *= 2)
            for (std::size_t i = 0; i + gap < kParallelSlots; i += 2 * gap)
                add_params(slot_grads[i], slot_grads[i + gap]);
        out.grads = std::move(slot_grads.front());
    } else {
        out.grads = MlpParams::zeros(policy.spec);
    }
    return out;
}

}  // namespace

void HedgePolicy::validate() const {
    spec.validate();
    params.check_shapes(spec);
    if (feature_window < 1)
        throw std::invalid_argument("HedgePolicy: feature window must be >= 1");
    if (n_instruments < 1)
        throw std::invalid_argument("HedgePolicy: need at least one hedge instrument");
    if (spec.input_width() != feature_window)
        throw std::invalid_argument("HedgePolicy: input width " +
                                    std::to_string(spec.input_width()) +
                                    " != feature window " + std::to_string(feature_window));
    if (spec.output_width() != n_instruments)
        throw std::invalid_argument("HedgePolicy: output width != instrument count");
    if (!(output_clip >= 0.0))
        throw std::invalid_argument("HedgePolicy: output clip must be >= 0");
}

HedgePolicy HedgePolicy::create(std::size_t feature_window, std::span<const std::size_t> hidden,
                                std::size_t n_instruments, std::uint64_t seed) {
    HedgePolicy policy;
    policy.spec = MlpSpec::dense(feature_window, hidden, n_instruments);
    policy.params = init_params(policy.spec, seed);
    policy.feature_window = feature_window;
    policy.n_instruments = n_instruments;
    policy.seed = seed;
    policy.validate();
    return policy;
}

std::vector<double> HedgePolicy::hedge_units(std::span<const double> features) const {
    std::vector<double> h = forward(params, spec, features);
    if (output_clip > 0.0)
        for (double& v : h)
            if (std::abs(v) > output_clip) v = std::copysign(output_clip, v);
    return h;
}

void TrainConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("TrainConfig: iterations must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("TrainConfig: learning rate must be positive");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("TrainConfig: alpha must be in (0, 1)");
    if (scenarios < 100) throw std::invalid_argument("TrainConfig: need at least 100 scenarios");
    if (tau_steps < 1) throw std::invalid_argument("TrainConfig: tau_steps must be >= 1");
    if (!std::isfinite(primary_units))
        throw std::invalid_argument("TrainConfig: primary units must be finite");
    costs.validate();
}

void AnchorBatch::validate(std::size_t feature_width, std::size_t n_instruments) const {
    if (features.size() != feature_width)
        throw std::invalid_argument("AnchorBatch: feature width " +
                                    std::to_string(features.size()) + " != " +
                                    std::to_string(feature_width));
    if (primary_pnl.empty()) throw DataError("AnchorBatch: empty scenario panel");
    if (hedge_moves.rows() != primary_pnl.size() || hedge_moves.cols() != n_instruments)
        throw std::invalid_argument("AnchorBatch: hedge move panel shape mismatch");
    if (hedge_prices.size() != n_instruments)
        throw std::invalid_argument("AnchorBatch: hedge price count mismatch");
}

std::vector<std::size_t> default_anchors(std::size_t n_returns, std::size_t feature_window) {
    if (feature_window < 1)
        throw std::invalid_argument("default_anchors: feature window must be >= 1");
    if (n_returns < feature_window)
        throw DataError("default_anchors: " + std::to_string(n_returns) +
                        " returns cannot fill a feature window of " +
                        std::to_string(feature_window));
    std::vector<std::size_t> anchors(n_returns - feature_window + 1);
    std::iota(anchors.begin(), anchors.end(), feature_window);
    return anchors;
}

std::vector<AnchorBatch> build_anchor_batches(std::span<const double> returns,
                                              std::span<const std::size_t> anchors,
                                              const HedgePolicy& policy, const TrainConfig& cfg,
                                              const BootstrapConfig& bcfg) {
    policy.validate();
    cfg.validate();
    if (anchors.empty()) throw DataError("build_anchor_batches: no anchors");
    const std::size_t w = policy.feature_window;
    for (std::size_t a : anchors)
        if (a < w || a > returns.size())
            throw std::invalid_argument("build_anchor_batches: anchor " + std::to_string(a) +
                                        " outside [" + std::to_string(w) + ", " +
                                        std::to_string(returns.size()) + "]");
    BootstrapConfig panel_cfg = bcfg;
    panel_cfg.seed = cfg.seed;
    const auto panels = build_scenarios(returns, anchors, cfg.scenarios, cfg.tau_steps, panel_cfg);

    std::vector<AnchorBatch> batches(anchors.size());
    for (std::size_t t = 0; t < anchors.size(); ++t) {
        const ScenarioSet& panel = panels[t];
        const std::size_t n_assets = panel.assets.size();
        if (n_assets != policy.n_instruments)
            throw std::invalid_argument("build_anchor_batches: panel has " +
                                        std::to_string(n_assets) + " assets, policy hedges " +
                                        std::to_string(policy.n_instruments));
        AnchorBatch& b = batches[t];
        const std::size_t a = anchors[t];
        b.features.assign(returns.begin() + static_cast<std::ptrdiff_t>(a - w),
                          returns.begin() + static_cast<std::ptrdiff_t>(a));
        b.hedge_prices.assign(n_assets, 1.0);
        b.hedge_moves = Matrix(cfg.scenarios, n_assets);
        for (std::size_t i = 0; i < n_assets; ++i) {
            const auto terminal = panel.terminal_returns(i);
            for (std::size_t j = 0; j < cfg.scenarios; ++j) b.hedge_moves(j, i) = terminal[j];
        }
        b.primary_pnl.resize(cfg.scenarios);
        const auto primary_terminal = panel.terminal_returns(0);
        for (std::size_t j = 0; j < cfg.scenarios; ++j)
            b.primary_pnl[j] = cfg.primary_units * primary_terminal[j];
    }
    return batches;
}

double cvar_loss(const HedgePolicy& policy, std::span<const AnchorBatch> batches,
                 const CostSpec& costs, double alpha, std::span<const double> initial_hedge) {
    return evaluate_loss(policy, batches, costs, alpha, initial_hedge, false).loss;
}

LossGrads cvar_loss_with_grads(const HedgePolicy& policy, std::span<const AnchorBatch> batches,
                               const CostSpec& costs, double alpha,
                               std::span<const double> initial_hedge) {
    return evaluate_loss(policy, batches, costs, alpha, initial_hedge, true);
}

TrainResult train(const HedgePolicy& initial, std::span<const double> returns,
                  std::span<const std::size_t> anchors, const TrainConfig& cfg,
                  const BootstrapConfig& bcfg) {
    const auto batches = build_anchor_batches(returns, anchors, initial, cfg, bcfg);
    TrainResult result;
    result.policy = initial;
    result.loss_history.reserve(cfg.iterations);
    AdamState state = AdamState::init(initial.spec, cfg.learning_rate);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        LossGrads lg = cvar_loss_with_grads(result.policy, batches, cfg.costs, cfg.alpha);
        if (!std::isfinite(lg.loss))
            throw NumericalError("train: loss diverged at iteration " + std::to_string(it));
        result.loss_history.push_back(lg.loss);
        adam_step(result.policy.params, lg.grads, state);
    }
    return result;
}

}  // namespace tailhedge
