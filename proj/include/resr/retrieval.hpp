// SPDX-License-Identifier: MIT

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resr/bank.hpp"

namespace resr {

// Affine map onto [target_min, target_max]. A constant series maps to the
// midpoint; a degenerate target maps everything to target_min.
std::vector<double> rescale_to_range(std::span<const double> series, double target_min, double target_max);

// Classic DTW, local cost |a_i - b_j|, steps (1,0), (0,1), (1,1), aligned end
// to end. `band` is a Sakoe-Chiba half-width in samples, widened to at least
// the length difference so a path always exists.
double dtw_distance(std::span<const double> a, std::span<const double> b, std::optional<std::size_t> band = std::nullopt);

// Shape distance between an observed series and one bank trajectory: the
// observed series is rescaled into the reference's value range and the DTW
// cost is divided by that range width. A constant reference is compared in
// the unit range against the constant 0.5. Non-finite references give +inf.
double normalized_dtw(std::span<const double> observed, std::span<const double> reference,
    std::optional<std::size_t> band = std::nullopt);

struct RetrievalQuery {
    std::vector<double> t;      // grid on which bank entries are materialized
    std::vector<double> values; // observed axis values on that grid
    std::size_t k = 10;
    std::optional<std::size_t> band;

    void validate() const; // throws std::invalid_argument
};

struct RetrievalHit {
    std::string id;
    std::size_t entry_index = 0;
    double distance = 0.0;
    double range_min = 0.0; // value range of the materialized entry
    double range_max = 0.0;
};

struct RetrievalResult {
    std::vector<RetrievalHit> ranked; // ascending distance, ties by id
};

// Parallel over entries; the ranking does not depend on `workers`.
RetrievalResult retrieve_top_k(const RetrievalQuery& query, const EquationBank& bank, std::size_t workers = 1);

} // namespace resr
