// SPDX-License-Identifier: MIT

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace resr {

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    std::vector<double> extent; // final simplex width along each axis
};

// Nelder-Mead with the usual coefficients (reflect 1, expand 2, contract 0.5,
// shrink 0.5). The initial simplex is x0 plus step[i] along each axis. Stops
// after `max_evaluations` objective calls or when the simplex values agree to
// `f_tolerance` (absolute) and its extent along every axis is below
// `x_tolerance` relative to the coordinate magnitude. Non-finite objective
// values are treated as +inf.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
    std::vector<double> step, std::size_t max_evaluations, double f_tolerance = 0.0, double x_tolerance = 1e-12);

} // namespace resr
