// SPDX-License-Identifier: MIT

#include "resr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "resr/parallel.hpp"

namespace resr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<double, double> value_range(std::span<const double> v)
{
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {*lo, *hi};
}

bool all_finite(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Mathematically equal distances (e.g. every linear entry against the same
// query) differ in the last bits depending on the query's offset and scale;
// snapping to a 1e-9 grid lets the id tie-break see them as equal.
double quantize(double d)
{
    if (!std::isfinite(d)) return d;
    return std::round(d * 1e9) / 1e9;
}

} // namespace

std::vector<double> rescale_to_range(std::span<const double> series, double target_min, double target_max)
{
    if (series.empty()) throw std::invalid_argument("rescale_to_range: empty series");
    std::vector<double> out(series.size());
    if (target_max == target_min) {
        std::fill(out.begin(), out.end(), target_min);
        return out;
    }
    const auto [lo, hi] = value_range(series);
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.5 * (target_min + target_max));
        return out;
    }
    const double scale = (target_max - target_min) / (hi - lo);
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = scale * (series[i] - lo) + target_min;
    return out;
}

double dtw_distance(std::span<const double> a, std::span<const double> b, std::optional<std::size_t> band)
{
    if (a.empty() || b.empty()) throw std::invalid_argument("dtw_distance: empty sequence");
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const std::size_t gap = n > m ? n - m : m - n;
    const std::size_t w = band ? std::max(*band, gap) : std::max(n, m);

    // prev[j] / cur[j] hold D(i-1, j) / D(i, j) with a sentinel column 0.
    std::vector<double> prev(m + 1, kInf);
    std::vector<double> cur(m + 1, kInf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(cur.begin(), cur.end(), kInf);
        const std::size_t j_lo = i > w ? i - w : 1;
        const std::size_t j_hi = std::min(m, i + w);
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            const double best = std::min({prev[j], cur[j - 1], prev[j - 1]});
            cur[j] = std::fabs(a[i - 1] - b[j - 1]) + best;
        }
        std::swap(prev, cur);
        prev[0] = kInf;
    }
    return prev[m];
}

double normalized_dtw(std::span<const double> observed, std::span<const double> reference, std::optional<std::size_t> band)
{
    if (!all_finite(reference)) return kInf;
    const auto [lo, hi] = value_range(reference);
    if (hi == lo) {
        const auto unit = rescale_to_range(observed, 0.0, 1.0);
        const std::vector<double> flat(reference.size(), 0.5);
        return dtw_distance(unit, flat, band);
    }
    const auto scaled = rescale_to_range(observed, lo, hi);
    return dtw_distance(scaled, reference, band) / (hi - lo);
}

void RetrievalQuery::validate() const
{
    if (t.size() < 2) throw std::invalid_argument("retrieval query needs at least 2 samples");
    if (values.size() != t.size()) throw std::invalid_argument("retrieval query: t and values differ in length");
    if (k == 0) throw std::invalid_argument("retrieval query: k must be >= 1");
    if (!all_finite(values)) throw std::invalid_argument("retrieval query: observed values must be finite");
}

RetrievalResult retrieve_top_k(const RetrievalQuery& query, const EquationBank& bank, std::size_t workers)
{
    query.validate();
    if (bank.entries.empty()) throw BankError("retrieve_top_k: empty bank");
    std::vector<RetrievalHit> hits(bank.entries.size());
    parallel_for(bank.entries.size(), workers, [&](std::size_t i) {
        const auto& entry = bank.entries[i];
        const auto ref = materialize(entry, query.t);
        RetrievalHit& h = hits[i];
        h.id = entry.id;
        h.entry_index = i;
        h.distance = quantize(normalized_dtw(query.values, ref, query.band));
        if (all_finite(ref)) {
            std::tie(h.range_min, h.range_max) = value_range(ref);
        } else {
            h.range_min = h.range_max = std::numeric_limits<double>::quiet_NaN();
        }
    });
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.id < b.id;
    });
    hits.resize(std::min(query.k, hits.size()));
    return RetrievalResult{std::move(hits)};
}

} // namespace resr
