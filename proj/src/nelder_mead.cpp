#include "tailhedge/detail/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tailhedge::detail {

NmResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> x0, std::span<const double> step, double tol,
                     std::size_t max_iter) {
    const std::size_t dim = x0.size();
    if (dim == 0 || step.size() != dim)
        throw std::invalid_argument("nelder_mead: bad start/step dimensions");

    std::vector<std::vector<double>> pts(dim + 1, std::vector<double>(x0.begin(), x0.end()));
    for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += step[i];
    std::vector<double> vals(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) vals[i] = f(pts[i]);

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim);
    NmResult result;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back();
        const std::size_t second_worst = order[dim - 1];

        double spread = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            double w = 0.0;
            for (std::size_t k = 0; k <= dim; ++k)
                w = std::max(w, std::abs(pts[k][i] - pts[best][i]));
            spread = std::max(spread, w);
            scale = std::max(scale, std::abs(pts[best][i]));
        }
        if (std::abs(vals[worst] - vals[best]) <= tol * (1.0 + std::abs(vals[best])) &&
            spread <= 1e-8 * (1.0 + scale)) {
            result.converged = true;
            result.iterations = iter;
            break;
        }

        for (std::size_t i = 0; i < dim; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k <= dim; ++k)
                if (k != worst) s += pts[k][i];
            centroid[i] = s / static_cast<double>(dim);
        }

        auto blend = [&](double coeff) {
            for (std::size_t i = 0; i < dim; ++i)
                trial[i] = centroid[i] + coeff * (pts[worst][i] - centroid[i]);
            return f(trial);
        };

        const double reflected = blend(-1.0);
        if (reflected < vals[order[0]]) {
            const std::vector<double> refl_pt = trial;
            const double expanded = blend(-2.0);
            if (expanded < reflected) {
                pts[worst] = trial;
                vals[worst] = expanded;
            } else {
                pts[worst] = refl_pt;
                vals[worst] = reflected;
            }
        } else if (reflected < vals[second_worst]) {
            pts[worst] = trial;
            vals[worst] = reflected;
        } else {
            const double contracted = reflected < vals[worst] ? blend(-0.5) : blend(0.5);
            if (contracted < std::min(reflected, vals[worst])) {
                pts[worst] = trial;
                vals[worst] = contracted;
            } else {
                for (std::size_t k = 0; k <= dim; ++k) {
                    if (k == best) continue;
                    for (std::size_t i = 0; i < dim; ++i)
                        pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
                    vals[k] = f(pts[k]);
                }
            }
        }
        result.iterations = iter + 1;
    }

    const std::size_t best =
        static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    result.x = pts[best];
    result.value = vals[best];
    return result;
}

}  // namespace tailhedge::detail
