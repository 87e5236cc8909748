#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tailhedge::detail {

struct NmResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

// Derivative-free simplex minimizer (standard Nelder-Mead coefficients);
// fully deterministic for a given start and step.
[[nodiscard]] NmResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                                   std::span<const double> x0, std::span<const double> step,
                                   double tol = 1e-10, std::size_t max_iter = 2000);

}  // namespace tailhedge::detail
