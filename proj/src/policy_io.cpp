#include "tailhedge/policy_io.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "tailhedge/errors.hpp"

namespace tailhedge {

std::string policy_to_json(const HedgePolicy& policy) {
    policy.validate();
    nlohmann::json j;
    j["spec"]["widths"] = policy.spec.layer_widths;
    auto& acts = j["spec"]["activations"] = nlohmann::json::array();
    for (Activation a : policy.spec.activations) acts.push_back(std::string(to_string(a)));
    auto& layers = j["params"]["layers"] = nlohmann::json::array();
    for (std::size_t k = 0; k < policy.params.weights.size(); ++k) {
        nlohmann::json layer;
        layer["w"] = policy.params.weights[k].values();
        layer["b"] = policy.params.biases[k];
        layers.push_back(std::move(layer));
    }
    j["feature_window"] = policy.feature_window;
    j["n_instruments"] = policy.n_instruments;
    j["seed"] = policy.seed;
    if (policy.output_clip > 0.0) j["output_clip"] = policy.output_clip;
    return j.dump(2);
}

HedgePolicy policy_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("policy: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("policy: expected a JSON object");
    static const std::vector<std::string> known{"spec", "params", "feature_window",
                                               "n_instruments", "seed", "output_clip"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw DataError("policy: unknown key '" + key + "'");
    HedgePolicy policy;
    try {
        const auto& spec = j.at("spec");
        policy.spec.layer_widths = spec.at("widths").get<std::vector<std::size_t>>();
        for (const auto& name : spec.at("activations"))
            policy.spec.activations.push_back(activation_from_string(name.get<std::string>()));
        policy.spec.validate();

        policy.params = MlpParams::zeros(policy.spec);
        const auto& layers = j.at("params").at("layers");
        if (layers.size() != policy.spec.layer_count())
            throw DataError("policy: layer count does not match the widths");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            auto w = layers[k].at("w").get<std::vector<double>>();
            auto b = layers[k].at("b").get<std::vector<double>>();
            if (w.size() != policy.params.weights[k].size() ||
                b.size() != policy.params.biases[k].size())
                throw DataError("policy: layer " + std::to_string(k) + " has the wrong shape");
            policy.params.weights[k].values() = std::move(w);
            policy.params.biases[k] = std::move(b);
        }
        policy.feature_window = j.at("feature_window").get<std::size_t>();
        policy.n_instruments = j.at("n_instruments").get<std::size_t>();
        policy.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output_clip")) policy.output_clip = j.at("output_clip").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("policy: bad field: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("policy: ") + e.what());
    }
    try {
        policy.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("policy: ") + e.what());
    }
    return policy;
}

void save_policy(const HedgePolicy& policy, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << policy_to_json(policy) << '\n';
    if (!out) throw DataError("failed writing " + path.string());
}

HedgePolicy load_policy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return policy_from_json(text);
}

}  // namespace tailhedge
