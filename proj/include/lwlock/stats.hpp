#ifndef LWLOCK_STATS_HPP_
#define LWLOCK_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace lwlock {

/// Nearest rank: the smallest k in [1, n] with k / n >= q.
inline std::size_t nearest_rank(double q, std::size_t n) {
    auto covers = [&](std::size_t k) {
        return static_cast<double>(k) / static_cast<double>(n) >= q;
    };
    auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);
    // ceil(q * n) can be off by one after rounding; settle on the exact
    // definition.
    while (k > 1 && covers(k - 1)) {
        --k;
    }
    while (k < n && !covers(k)) {
        ++k;
    }
    return k;
}

/// Nearest-rank quantiles of `samples`, one per entry of `qs`.
/// Throws std::invalid_argument on empty samples or q outside (0, 1].
template <typename T>
std::vector<T> compute_quantiles(std::span<const T> samples, std::span<const double> qs) {
    if (samples.empty()) {
        throw std::invalid_argument("quantiles of an empty sample set");
    }
    for (double q : qs) {
        if (!(q > 0.0 && q <= 1.0)) {
            throw std::invalid_argument("quantile fraction outside (0, 1]");
        }
    }
    std::vector<T> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<T> out;
    out.reserve(qs.size());
    for (double q : qs) {
        out.push_back(sorted[nearest_rank(q, sorted.size()) - 1]);
    }
    return out;
}

template <typename T>
std::vector<T> compute_quantiles(const std::vector<T>& samples, std::initializer_list<double> qs) {
    return compute_quantiles(std::span<const T>(samples),
                             std::span<const double>(qs.begin(), qs.size()));
}

/// Median as the q = 0.5 nearest-rank quantile (lower middle for even n).
template <typename T>
T median(std::span<const T> samples) {
    const double half = 0.5;
    return compute_quantiles(samples, std::span<const double>(&half, 1)).front();
}

}  // namespace lwlock

#endif  // LWLOCK_STATS_HPP_
