#include "tailhedge/bootstrap.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tailhedge/errors.hpp"
#include "tailhedge/threads.hpp"

namespace tailhedge {

std::string_view to_string(BootstrapMethod m) {
    switch (m) {
        case BootstrapMethod::naive: return "naive";
        case BootstrapMethod::simple_block: return "simple_block";
        case BootstrapMethod::moving_block: return "moving_block";
        case BootstrapMethod::stationary: return "stationary";
    }
    return "?";
}

BootstrapMethod bootstrap_method_from_string(std::string_view s) {
    if (s == "naive") return BootstrapMethod::naive;
    if (s == "simple_block") return BootstrapMethod::simple_block;
    if (s == "moving_block") return BootstrapMethod::moving_block;
    if (s == "stationary") return BootstrapMethod::stationary;
    throw std::invalid_argument("unknown bootstrap method '" + std::string(s) + "'");
}

std::size_t heuristic_block_length(std::size_t n) {
    if (n < 1) throw std::invalid_argument("heuristic_block_length: n must be >= 1");
    auto r = static_cast<std::size_t>(std::cbrt(static_cast<double>(n)));
    while ((r + 1) * (r + 1) * (r + 1) <= n) ++r;
    while (r > 1 && r * r * r > n) --r;
    return std::max<std::size_t>(r, 1);
}

std::size_t BootstrapConfig::resolved_block_len(std::size_t source_len) const {
    return block_len == 0 ? heuristic_block_length(source_len) : block_len;
}

void BootstrapConfig::validate(std::size_t source_len) const {
    if (source_len == 0) throw DataError("bootstrap: empty source");
    if (out_len < 1) throw std::invalid_argument("bootstrap: out_len must be >= 1");
    const std::size_t l = resolved_block_len(source_len);
    if (l < 1 || l > source_len)
        throw std::invalid_argument("bootstrap: block length " + std::to_string(l) +
                                    " outside [1, " + std::to_string(source_len) + "]");
}

std::vector<std::size_t> resample_indices(std::size_t n, const BootstrapConfig& cfg, Rng& rng) {
    cfg.validate(n);
    const std::size_t want = cfg.out_len;
    const std::size_t l = cfg.resolved_block_len(n);
    std::vector<std::size_t> idx;
    idx.reserve(want);
    switch (cfg.method) {
        case BootstrapMethod::naive:
            for (std::size_t i = 0; i < want; ++i) idx.push_back(rng.uniform_index(n));
            break;
        case BootstrapMethod::simple_block: {
            const std::size_t n_blocks = n / l;
            while (idx.size() < want) {
                const std::size_t b = rng.uniform_index(n_blocks);
                for (std::size_t j = 0; j < l && idx.size() < want; ++j) idx.push_back(b * l + j);
            }
            break;
        }
        case BootstrapMethod::moving_block: {
            while (idx.size() < want) {
                const std::size_t s = rng.uniform_index(n - l + 1);
                for (std::size_t j = 0; j < l && idx.size() < want; ++j) idx.push_back(s + j);
            }
            break;
        }
        case BootstrapMethod::stationary: {
            const double p = 1.0 / static_cast<double>(l);
            std::size_t cur = rng.uniform_index(n);
            idx.push_back(cur);
            while (idx.size() < want) {
                if (rng.uniform01() < p)
                    cur = rng.uniform_index(n);
                else
                    cur = (cur + 1) % n;
                idx.push_back(cur);
            }
            break;
        }
    }
    return idx;
}

std::vector<double> resample(std::span<const double> values, const BootstrapConfig& cfg) {
    Rng rng(cfg.seed);
    const auto idx = resample_indices(values.size(), cfg, rng);
    std::vector<double> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(values[i]);
    return out;
}

void ScenarioSet::validate() const {
    if (assets.empty()) throw std::invalid_argument("ScenarioSet: no assets");
    if (scenario_count == 0 || tau_steps == 0)
        throw std::invalid_argument("ScenarioSet: empty panel dimensions");
    for (const auto& panel : assets) {
        if (panel.rows() != scenario_count || panel.cols() != tau_steps)
            throw std::invalid_argument("ScenarioSet: panel shape mismatch");
        for (double r : panel.values())
            if (!(r > -1.0)) throw std::invalid_argument("ScenarioSet: return not greater than -1");
    }
}

std::vector<double> ScenarioSet::terminal_returns(std::size_t asset) const {
    const auto& panel = assets.at(asset);
    std::vector<double> out(panel.rows());
    for (std::size_t j = 0; j < panel.rows(); ++j) {
        double growth = 1.0;
        for (std::size_t t = 0; t < panel.cols(); ++t) growth *= 1.0 + panel(j, t);
        out[j] = growth - 1.0;
    }
    return out;
}

std::vector<ScenarioSet> build_scenarios(std::span<const double> source_returns,
                                         std::span<const std::size_t> anchors,
                                         std::size_t scenario_count, std::size_t tau_steps,
                                         const BootstrapConfig& cfg) {
    if (tau_steps < 1) throw std::invalid_argument("build_scenarios: tau_steps must be >= 1");
    if (scenario_count < 1)
        throw std::invalid_argument("build_scenarios: scenario_count must be >= 1");
    BootstrapConfig row_cfg = cfg;
    row_cfg.out_len = tau_steps;
    row_cfg.validate(source_returns.size());
    std::vector<ScenarioSet> out(anchors.size());
    parallel_for_slots(anchors.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t a = begin; a < end; ++a) {
            auto& set = out[a];
            set.origin_index = anchors[a];
            set.scenario_count = scenario_count;
            set.tau_steps = tau_steps;
            set.assets.assign(1, Matrix(scenario_count, tau_steps));
            auto& panel = set.assets.front();
            for (std::size_t r = 0; r < scenario_count; ++r) {
                Rng rng = stream_rng(row_cfg.seed, anchors[a], r);
                const auto idx = resample_indices(source_returns.size(), row_cfg, rng);
                for (std::size_t t = 0; t < tau_steps; ++t) panel(r, t) = source_returns[idx[t]];
            }
        }
    });
    return out;
}

}  // namespace tailhedge
