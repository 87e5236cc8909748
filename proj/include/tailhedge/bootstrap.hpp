#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tailhedge/linalg.hpp"
#include "tailhedge/rng.hpp"

namespace tailhedge {

enum class BootstrapMethod { naive, simple_block, moving_block, stationary };

[[nodiscard]] std::string_view to_string(BootstrapMethod m);
[[nodiscard]] BootstrapMethod bootstrap_method_from_string(std::string_view s);

// block_len == 0 selects the heuristic floor(n^(1/3)). For the stationary
// method block_len is the mean block length (restart probability 1/block_len).
struct BootstrapConfig {
    BootstrapMethod method = BootstrapMethod::moving_block;
    std::size_t block_len = 0;
    std::size_t out_len = 1;
    std::uint64_t seed = 0;

    void validate(std::size_t source_len) const;
    [[nodiscard]] std::size_t resolved_block_len(std::size_t source_len) const;
};

[[nodiscard]] std::size_t heuristic_block_length(std::size_t n);

// Index plan for one resample of length cfg.out_len from a source of length n.
// Block draws past out_len are truncated; the stationary scheme wraps
// circularly at the series end.
[[nodiscard]] std::vector<std::size_t> resample_indices(std::size_t n, const BootstrapConfig& cfg,
                                                        Rng& rng);

[[nodiscard]] std::vector<double> resample(std::span<const double> values,
                                           const BootstrapConfig& cfg);

// Counterfactual panel anchored at one position of the empirical series:
// per asset an m x tau matrix of simple returns.
struct ScenarioSet {
    std::size_t origin_index = 0;
    std::size_t scenario_count = 0;
    std::size_t tau_steps = 0;
    std::vector<Matrix> assets;

    void validate() const;
    // Compounded over-tau return per scenario for one asset.
    [[nodiscard]] std::vector<double> terminal_returns(std::size_t asset) const;
};

// One panel per anchor, all resampled from the same fixed source. Scenario
// row r at anchor a draws from RNG stream (cfg.seed, a, r), so panels do not
// depend on evaluation order or thread count.
[[nodiscard]] std::vector<ScenarioSet> build_scenarios(std::span<const double> source_returns,
                                                       std::span<const std::size_t> anchors,
                                                       std::size_t scenario_count,
                                                       std::size_t tau_steps,
                                                       const BootstrapConfig& cfg);

}  // namespace tailhedge
