#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "beamg2/rng.hpp"

namespace testutil {

inline std::vector<double> poisson_stream(double rate, double duration, beamg2::Rng& rng) {
    std::vector<double> out;
    double t = rng.exponential(rate);
    while (t < duration) {
        out.push_back(t);
        t += rng.exponential(rate);
    }
    return out;
}

// O(N^2) reference pair counter. Must use the same floor expression as
// beamg2::pair_histogram so that equality is exact, not approximate.
inline std::vector<std::uint64_t> brute_force_pairs(std::span<const double> a,
                                                    std::span<const double> b,
                                                    double bin_width, std::size_t nbins) {
    std::vector<std::uint64_t> counts(nbins, 0);
    const double window = bin_width * static_cast<double>(nbins);
    for (const double ta : a)
        for (const double tb : b) {
            if (tb < ta || tb - ta >= window) continue;
            const auto k = static_cast<std::size_t>((tb - ta) / bin_width);
            if (k < nbins) ++counts[k];
        }
    return counts;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Pearson chi-square of observed counts against expected counts.
inline double reduced_chi_square(std::span<const std::uint64_t> observed,
                                 std::span<const double> expected) {
    double chi2 = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double d = static_cast<double>(observed[i]) - expected[i];
        chi2 += d * d / expected[i];
    }
    return chi2 / static_cast<double>(observed.size());
}

} // namespace testutil
