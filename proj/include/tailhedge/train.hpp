#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tailhedge/bootstrap.hpp"
#include "tailhedge/linalg.hpp"
#include "tailhedge/mlp.hpp"
#include "tailhedge/portfolio.hpp"

namespace tailhedge {

// Neural hedge policy: maps the trailing feature_window returns of the
// primary asset to hedge units per instrument. Negative units = short.
struct HedgePolicy {
    MlpSpec spec;
    MlpParams params;
    std::size_t feature_window = 32;
    std::size_t n_instruments = 1;
    std::uint64_t seed = 0;
    double output_clip = 0.0;  // symmetric bound on units; 0 disables

    void validate() const;
    [[nodiscard]] static HedgePolicy create(std::size_t feature_window,
                                            std::span<const std::size_t> hidden,
                                            std::size_t n_instruments, std::uint64_t seed);
    // Forward pass with the clip applied.
    [[nodiscard]] std::vector<double> hedge_units(std::span<const double> features) const;
};

struct TrainConfig {
    std::size_t iterations = 50;
    double learning_rate = 1e-3;
    double alpha = 0.99;
    std::size_t scenarios = 1000;  // panel width m
    std::size_t tau_steps = 1;
    std::uint64_t seed = 0;
    CostSpec costs;
    double primary_units = 1.0;

    void validate() const;
};

// Everything the loss needs at one decision point: the feature vector, the
// primary book's P&L per scenario, each hedge instrument's price move per
// scenario, and the prices the hedge trade executes at.
struct AnchorBatch {
    std::vector<double> features;
    std::vector<double> primary_pnl;   // length m
    Matrix hedge_moves;                // m x d
    std::vector<double> hedge_prices;  // length d

    void validate(std::size_t feature_width, std::size_t n_instruments) const;
};

// Anchors are return-count positions: anchor a sees returns [a - W, a).
// Default: every position with a full feature window, W..n inclusive.
[[nodiscard]] std::vector<std::size_t> default_anchors(std::size_t n_returns,
                                                       std::size_t feature_window);

// One batch per anchor. Scenario panels are block-resampled from the full
// return series (seeded by cfg.seed); prices are normalized to 1 at each
// anchor, so P&L entries are in return units per unit held.
[[nodiscard]] std::vector<AnchorBatch> build_anchor_batches(std::span<const double> returns,
                                                            std::span<const std::size_t> anchors,
                                                            const HedgePolicy& policy,
                                                            const TrainConfig& cfg,
                                                            const BootstrapConfig& bcfg);

// Mean over anchors of the alpha-tail average of per-scenario losses
//   X_j = -(primary_pnl_j + h . moves_j) + costs(h - initial_hedge),
// where h = policy(features). Each anchor trades against the same standing
// book (zeros when initial_hedge is empty), so the loss does not depend on
// anchor order.
[[nodiscard]] double cvar_loss(const HedgePolicy& policy, std::span<const AnchorBatch> batches,
                               const CostSpec& costs, double alpha,
                               std::span<const double> initial_hedge = {});

struct LossGrads {
    double loss = 0.0;
    MlpParams grads;
    Matrix hedge_units;  // anchors x d
};

// Same loss plus exact parameter gradients; the tail mean is differentiated
// through the selected scenarios only, the proportional cost through the
// sign of each trade.
[[nodiscard]] LossGrads cvar_loss_with_grads(const HedgePolicy& policy,
                                             std::span<const AnchorBatch> batches,
                                             const CostSpec& costs, double alpha,
                                             std::span<const double> initial_hedge = {});

struct TrainResult {
    HedgePolicy policy;
    std::vector<double> loss_history;  // loss at the start of each iteration
};

// Full-batch CVaR descent: panels are built once from cfg.seed and reused
// every iteration; each iteration records the loss, then applies one Adam
// step. Deterministic for fixed seeds and any thread count.
[[nodiscard]] TrainResult train(const HedgePolicy& initial, std::span<const double> returns,
                                std::span<const std::size_t> anchors, const TrainConfig& cfg,
                                const BootstrapConfig& bcfg);

}  // namespace tailhedge
