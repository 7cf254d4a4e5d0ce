// SPDX-License-Identifier: MIT

#include "resr/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace resr {

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
    std::vector<double> step, std::size_t max_evaluations, double f_tolerance, double x_tolerance)
{
    const std::size_t n = x0.size();
    if (step.size() != n) throw std::invalid_argument("nelder_mead: step and x0 differ in size");
    SimplexResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    if (n == 0 || max_evaluations == 0) {
        result.x = std::move(x0);
        result.value = max_evaluations == 0 ? std::numeric_limits<double>::quiet_NaN() : eval(result.x);
        return result;
    }

    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step[i];
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n && result.evaluations < max_evaluations; ++i) vals[i] = eval(pts[i]);
    for (std::size_t i = result.evaluations; i <= n; ++i) vals[i] = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto along = [&](double coef, std::vector<double>& out, const std::vector<double>& worst) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (worst[j] - centroid[j]);
    };

    while (result.evaluations < max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        if (std::isfinite(vals[worst]) && vals[worst] - vals[best] <= f_tolerance) {
            bool tight = true;
            for (std::size_t j = 0; j < n && tight; ++j) {
                double lo = pts[0][j], hi = pts[0][j];
                for (const auto& p : pts) {
                    lo = std::min(lo, p[j]);
                    hi = std::max(hi, p[j]);
                }
                tight = hi - lo <= x_tolerance * std::max(1.0, std::fabs(pts[best][j]));
            }
            if (tight) break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        along(-1.0, trial, pts[worst]);
        const double fr = eval(trial);
        if (fr < vals[best]) {
            if (result.evaluations < max_evaluations) {
                along(-2.0, trial2, pts[worst]);
                const double fe = eval(trial2);
                if (fe < fr) {
                    pts[worst] = trial2;
                    vals[worst] = fe;
                    continue;
                }
            }
            pts[worst] = trial;
            vals[worst] = fr;
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = trial;
            vals[worst] = fr;
            continue;
        }
        if (result.evaluations >= max_evaluations) break;
        // contraction: outside if the reflection beat the worst point, inside otherwise
        const bool outside = fr < vals[worst];
        along(outside ? -0.5 : 0.5, trial2, pts[worst]);
        const double fc = eval(trial2);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = trial2;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n && result.evaluations < max_evaluations; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
            vals[i] = eval(pts[i]);
        }
    }

    const auto it = std::min_element(vals.begin(), vals.end());
    result.x = pts[static_cast<std::size_t>(it - vals.begin())];
    result.value = *it;
    result.extent.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double lo = pts[0][j], hi = pts[0][j];
        for (const auto& p : pts) {
            lo = std::min(lo, p[j]);
            hi = std::max(hi, p[j]);
        }
        result.extent[j] = hi - lo;
    }
    return result;
}

} // namespace resr
