#include "tailhedge/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tailhedge/rng.hpp"

namespace tailhedge {

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation activation_from_string(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

void MlpSpec::validate() const {
    if (layer_widths.size() < 2)
        throw std::invalid_argument("MlpSpec: need at least input and output widths");
    for (std::size_t w : layer_widths)
        if (w < 1) throw std::invalid_argument("MlpSpec: zero layer width");
    if (activations.size() != layer_widths.size() - 1)
        throw std::invalid_argument("MlpSpec: need one activation per non-input layer");
    if (activations.back() != Activation::identity)
        throw std::invalid_argument("MlpSpec: output activation must be identity");
}

MlpSpec MlpSpec::dense(std::size_t input, std::span<const std::size_t> hidden,
                       std::size_t output) {
    MlpSpec spec;
    spec.layer_widths.push_back(input);
    for (std::size_t h : hidden) spec.layer_widths.push_back(h);
    spec.layer_widths.push_back(output);
    spec.activations.assign(hidden.size(), Activation::relu);
    spec.activations.push_back(Activation::identity);
    spec.validate();
    return spec;
}

MlpParams MlpParams::zeros(const MlpSpec& spec) {
    spec.validate();
    MlpParams p;
    for (std::size_t k = 0; k < spec.layer_count(); ++k) {
        p.weights.emplace_back(spec.layer_widths[k + 1], spec.layer_widths[k]);
        p.biases.emplace_back(spec.layer_widths[k + 1], 0.0);
    }
    return p;
}

void MlpParams::check_shapes(const MlpSpec& spec) const {
    if (weights.size() != spec.layer_count() || biases.size() != spec.layer_count())
        throw std::invalid_argument("MlpParams: layer count mismatch");
    for (std::size_t k = 0; k < weights.size(); ++k)
        if (weights[k].rows() != spec.layer_widths[k + 1] ||
            weights[k].cols() != spec.layer_widths[k] ||
            biases[k].size() != spec.layer_widths[k + 1])
            throw std::invalid_argument("MlpParams: shape mismatch at layer " + std::to_string(k));
}

MlpParams init_params(const MlpSpec& spec, std::uint64_t seed) {
    MlpParams p = MlpParams::zeros(spec);
    Rng rng = stream_rng(seed, 0x6d6c70 /* "mlp" */);
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        const double fan_in = static_cast<double>(spec.layer_widths[k]);
        const double fan_out = static_cast<double>(spec.layer_widths[k + 1]);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : p.weights[k].values()) w = limit * (2.0 * rng.uniform01() - 1.0);
    }
    return p;
}

std::vector<double> forward(const MlpParams& params, const MlpSpec& spec,
                            std::span<const double> x, ForwardCache* cache) {
    params.check_shapes(spec);
    if (x.size() != spec.input_width())
        throw std::invalid_argument("forward: input width " + std::to_string(x.size()) +
                                    " != " + std::to_string(spec.input_width()));
    if (cache) {
        cache->layer_inputs.assign(spec.layer_count(), {});
        cache->pre_activations.assign(spec.layer_count(), {});
    }
    std::vector<double> y(x.begin(), x.end());
    for (std::size_t k = 0; k < spec.layer_count(); ++k) {
        const Matrix& w = params.weights[k];
        std::vector<double> z(w.rows());
        for (std::size_t i = 0; i < w.rows(); ++i) z[i] = dot(w.row(i), y) + params.biases[k][i];
        if (cache) {
            cache->layer_inputs[k] = std::move(y);
            cache->pre_activations[k] = z;
        }
        if (spec.activations[k] == Activation::relu)
            for (double& v : z) v = v > 0.0 ? v : 0.0;
        y = std::move(z);
    }
    return y;
}

void backward(const MlpParams& params, const MlpSpec& spec, const ForwardCache& cache,
              std::span<const double> upstream, MlpParams& grads) {
    params.check_shapes(spec);
    grads.check_shapes(spec);
    if (cache.layer_inputs.size() != spec.layer_count() ||
        cache.pre_activations.size() != spec.layer_count())
        throw std::invalid_argument("backward: cache does not match the spec");
    if (upstream.size() != spec.output_width())
        throw std::invalid_argument("backward: upstream width mismatch");
    std::vector<double> delta(upstream.begin(), upstream.end());
    for (std::size_t k = spec.layer_count(); k-- > 0;) {
        const auto& z = cache.pre_activations[k];
        const auto& input = cache.layer_inputs[k];
        if (z.size() != delta.size() || input.size() != spec.layer_widths[k])
            throw std::invalid_argument("backward: stale cache shapes at layer " +
                                        std::to_string(k));
        if (spec.activations[k] == Activation::relu)
            for (std::size_t i = 0; i < delta.size(); ++i)
                if (!(z[i] > 0.0)) delta[i] = 0.0;
        Matrix& gw = grads.weights[k];
        for (std::size_t i = 0; i < gw.rows(); ++i) {
            if (delta[i] == 0.0) continue;
            auto row = gw.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) row[j] += delta[i] * input[j];
            grads.biases[k][i] += delta[i];
        }
        if (k > 0) {
            const Matrix& w = params.weights[k];
            std::vector<double> prev(w.cols(), 0.0);
            for (std::size_t i = 0; i < w.rows(); ++i) {
                if (delta[i] == 0.0) continue;
                const auto row = w.row(i);
                for (std::size_t j = 0; j < row.size(); ++j) prev[j] += delta[i] * row[j];
            }
            delta = std::move(prev);
        }
    }
}

void add_params(MlpParams& into, const MlpParams& other) {
    if (into.weights.size() != other.weights.size())
        throw std::invalid_argument("add_params: layer count mismatch");
    for (std::size_t k = 0; k < into.weights.size(); ++k) {
        auto& a = into.weights[k].values();
        const auto& b = other.weights[k].values();
        if (a.size() != b.size()) throw std::invalid_argument("add_params: shape mismatch");
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        for (std::size_t i = 0; i < into.biases[k].size(); ++i)
            into.biases[k][i] += other.biases[k][i];
    }
}

AdamState AdamState::init(const MlpSpec& spec, double learning_rate) {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("AdamState: learning rate must be > 0");
    AdamState s;
    s.m = MlpParams::zeros(spec);
    s.v = MlpParams::zeros(spec);
    s.learning_rate = learning_rate;
    return s;
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
    state.step += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double m_corr = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double v_corr = 1.0 - std::pow(b2, static_cast<double>(state.step));
    auto update = [&](double& p, const double g, double& m, double& v) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        const double m_hat = m / m_corr;
        const double v_hat = v / v_corr;
        p -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    };
    for (std::size_t k = 0; k < params.weights.size(); ++k) {
        auto& pw = params.weights[k].values();
        const auto& gw = grads.weights[k].values();
        auto& mw = state.m.weights[k].values();
        auto& vw = state.v.weights[k].values();
        if (pw.size() != gw.size()) throw std::invalid_argument("adam_step: shape mismatch");
        for (std::size_t i = 0; i < pw.size(); ++i) update(pw[i], gw[i], mw[i], vw[i]);
        auto& pb = params.biases[k];
        const auto& gb = grads.biases[k];
        auto& mb = state.m.biases[k];
        auto& vb = state.v.biases[k];
        for (std::size_t i = 0; i < pb.size(); ++i) update(pb[i], gb[i], mb[i], vb[i]);
    }
}

}  // namespace tailhedge
