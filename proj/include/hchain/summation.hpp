#pragma once

#include <cstddef>
#include <span>

namespace hchain {

/// Pairwise (tree) summation with a fixed traversal: blocks of up to 8
/// are summed left to right, larger ranges split at the midpoint.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t mid = xs.size() / 2;
    return pairwise_sum(xs.first(mid)) + pairwise_sum(xs.subspan(mid));
}

}  // namespace hchain
