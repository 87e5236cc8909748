#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tailhedge/linalg.hpp"

namespace tailhedge {

enum class Activation { relu, identity };

[[nodiscard]] std::string_view to_string(Activation a);
[[nodiscard]] Activation activation_from_string(std::string_view s);

// layer_widths = (input, hidden..., output); one activation per non-input
// layer, the last of which must be identity.
struct MlpSpec {
    std::vector<std::size_t> layer_widths;
    std::vector<Activation> activations;

    void validate() const;
    [[nodiscard]] static MlpSpec dense(std::size_t input, std::span<const std::size_t> hidden,
                                       std::size_t output);
    [[nodiscard]] std::size_t input_width() const { return layer_widths.front(); }
    [[nodiscard]] std::size_t output_width() const { return layer_widths.back(); }
    [[nodiscard]] std::size_t layer_count() const { return activations.size(); }
};

// Weight matrices are (out x in); the same shape doubles as a gradient or a
// moment accumulator.
struct MlpParams {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    [[nodiscard]] static MlpParams zeros(const MlpSpec& spec);
    void check_shapes(const MlpSpec& spec) const;
};

// Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero; deterministic
// per seed.
[[nodiscard]] MlpParams init_params(const MlpSpec& spec, std::uint64_t seed);

struct ForwardCache {
    std::vector<std::vector<double>> layer_inputs;     // y^(k-1) per layer
    std::vector<std::vector<double>> pre_activations;  // z^(k) per layer
};

[[nodiscard]] std::vector<double> forward(const MlpParams& params, const MlpSpec& spec,
                                          std::span<const double> x,
                                          ForwardCache* cache = nullptr);

// Accumulates exact gradients into grads given dloss/doutput; the ReLU
// subgradient at 0 is taken as 0.
void backward(const MlpParams& params, const MlpSpec& spec, const ForwardCache& cache,
              std::span<const double> upstream, MlpParams& grads);

void add_params(MlpParams& into, const MlpParams& other);

struct AdamState {
    MlpParams m, v;
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 1e-3;

    [[nodiscard]] static AdamState init(const MlpSpec& spec, double learning_rate);
};

// Standard Adam with bias correction.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state);

}  // namespace tailhedge
