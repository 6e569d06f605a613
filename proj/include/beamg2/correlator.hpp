#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "curve.hpp"
#include "errors.hpp"

namespace beamg2 {

struct HistogramSpec {
    double bin_width;
    double max_lag;

    std::size_t bins() const {
        return static_cast<std::size_t>(max_lag / bin_width + 1e-9);
    }

    void validate(double duration) const {
        if (!(bin_width > 0.0)) throw config_error("corr.bin_width must be > 0");
        if (!(max_lag >= bin_width))
            throw config_error("corr.max_lag must be >= corr.bin_width");
        if (!(max_lag < duration))
            throw config_error("corr.max_lag must be smaller than the stream duration");
    }
};

/// Raw pair counts: bin k holds the number of ordered pairs (a_i, b_j) with
/// b_j - a_i in [k*bin_width, (k+1)*bin_width). Two-pointer sliding window,
/// linear in the number of events plus the number of counted pairs.
inline std::vector<std::uint64_t> pair_histogram(std::span<const double> a,
                                                 std::span<const double> b, double bin_width,
                                                 std::size_t nbins) {
    std::vector<std::uint64_t> counts(nbins, 0);
    const double window = bin_width * static_cast<double>(nbins);
    std::size_t lo = 0, hi = 0;
    for (const double ta : a) {
        while (lo < b.size() && b[lo] < ta) ++lo;
        if (hi < lo) hi = lo;
        while (hi < b.size() && b[hi] - ta < window) ++hi;
        for (std::size_t j = lo; j < hi; ++j) {
            const auto k = static_cast<std::size_t>((b[j] - ta) / bin_width);
            if (k < nbins) ++counts[k];
        }
    }
    return counts;
}

/// Normalized cross-correlation estimate between two detector streams:
///   g2_k = C_k / (r_a * r_b * bin_width * (duration - tau_k)),
/// with tau_k the bin center and r = count/duration. sigma is the Poisson
/// error sqrt(C_k) scaled by the same denominator (correlated-bin effects are
/// not modeled).
inline CorrelationCurve cross_correlation(std::span<const double> a, std::span<const double> b,
                                          const HistogramSpec& spec, double duration) {
    if (a.empty() || b.empty())
        throw numeric_error("cross_correlation: empty event stream");
    spec.validate(duration);

    const std::size_t nbins = spec.bins();
    const auto counts = pair_histogram(a, b, spec.bin_width, nbins);
    const double ra = static_cast<double>(a.size()) / duration;
    const double rb = static_cast<double>(b.size()) / duration;

    CorrelationCurve out;
    out.tau.reserve(nbins);
    out.g2.reserve(nbins);
    out.sigma.reserve(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        const double tau_k = (static_cast<double>(k) + 0.5) * spec.bin_width;
        const double denom = ra * rb * spec.bin_width * (duration - tau_k);
        out.tau.push_back(tau_k);
        out.g2.push_back(static_cast<double>(counts[k]) / denom);
        out.sigma.push_back(std::sqrt(static_cast<double>(counts[k])) / denom);
    }
    return out;
}

/// Photon-counting statistics over disjoint windows. sigma_q is the
/// asymptotic standard error sqrt(2/m) * (1 + q) for m windows.
struct CountingStats {
    double window;
    double mean;
    double variance;
    double q;
    double sigma_q;
    std::size_t windows;
};

inline CountingStats counting_stats(std::span<const double> times, double window,
                                    double duration) {
    if (times.empty()) throw numeric_error("counting_stats: empty event stream");
    if (!(window > 0.0)) throw config_error("stats.window must be > 0");
    if (!(duration >= 100.0 * window))
        throw config_error("counting_stats: duration must be >= 100 * window");

    const std::size_t m = static_cast<std::size_t>(duration / window);
    std::vector<std::uint32_t> counts(m, 0);
    for (const double t : times) {
        const auto i = static_cast<std::size_t>(t / window);
        if (i < m) ++counts[i];
    }
    double sum = 0.0, sum_sq = 0.0;
    for (const auto c : counts) {
        sum += c;
        sum_sq += static_cast<double>(c) * c;
    }
    const double md = static_cast<double>(m);
    const double mean = sum / md;
    if (!(mean > 0.0)) throw numeric_error("counting_stats: no events inside any window");
    const double variance = (sum_sq - md * mean * mean) / (md - 1.0);
    const double q = (variance - mean) / mean;
    return {window, mean, variance, q, std::sqrt(2.0 / md) * (1.0 + q), m};
}

inline double rate(std::span<const double> times, double duration) {
    if (!(duration > 0.0)) throw config_error("rate: duration must be > 0");
    return static_cast<double>(times.size()) / duration;
}

} // namespace beamg2
