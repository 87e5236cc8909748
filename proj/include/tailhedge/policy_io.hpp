#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tailhedge/train.hpp"

namespace tailhedge {

// Round-trippable policy serialization:
//   {spec: {widths, activations}, params: {layers: [{w: row-major, b}]},
//    feature_window, n_instruments, seed}
// with output_clip included only when active. Doubles survive exactly.
[[nodiscard]] std::string policy_to_json(const HedgePolicy& policy);
[[nodiscard]] HedgePolicy policy_from_json(std::string_view text);

void save_policy(const HedgePolicy& policy, const std::filesystem::path& path);
[[nodiscard]] HedgePolicy load_policy(const std::filesystem::path& path);

}  // namespace tailhedge
