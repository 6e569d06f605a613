#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace beamg2 {

enum class ArrivalModel { Poisson, DeadTime };
enum class EnvelopeShape { TopHat, Gaussian };

/// Atomic-beam statistics: nbar is the mean atom number in the interaction
/// volume, t0 the transit time, so the effective arrival rate is nbar/t0 for
/// either arrival model. DeadTime inserts a refractory interval after each
/// arrival, which makes the atom number sub-Poissonian.
struct BeamParams {
    double nbar;
    double t0;
    ArrivalModel arrival_model = ArrivalModel::Poisson;
    double dead_time = 0.0;
    EnvelopeShape envelope = EnvelopeShape::TopHat;

    double rate() const { return nbar / t0; }

    void validate() const {
        if (!(nbar > 0.0) || !std::isfinite(nbar))
            throw config_error("beam.nbar must be finite and > 0");
        if (!(t0 > 0.0) || !std::isfinite(t0))
            throw config_error("beam.t0 must be finite and > 0");
        if (!(dead_time >= 0.0) || !std::isfinite(dead_time))
            throw config_error("beam.dead_time must be finite and >= 0");
        if (arrival_model == ArrivalModel::DeadTime && rate() * dead_time >= 1.0)
            throw config_error(
                "beam.dead_time infeasible: requires nbar/t0 < 1/dead_time");
    }
};

/// Base exponential rate rho of the dead-time renewal process, solving
/// R = rho / (1 + rho * dead_time) so the effective rate stays nbar/t0.
inline double deadtime_base_rate(const BeamParams& p) {
    p.validate();
    if (p.arrival_model != ArrivalModel::DeadTime)
        throw config_error("deadtime_base_rate: beam.arrival_model is not deadtime");
    const double r = p.rate();
    return r / (1.0 - r * p.dead_time);
}

/// Arrival times on [0, duration), ascending. Poisson: homogeneous process of
/// rate nbar/t0. DeadTime: renewal process with a refractory gap dead_time
/// followed by an exponential gap of rate deadtime_base_rate().
inline std::vector<double> sample_arrivals(const BeamParams& p, double duration, Rng& rng) {
    p.validate();
    if (!(duration > 0.0)) throw config_error("sample_arrivals: duration must be > 0");

    std::vector<double> arrivals;
    arrivals.reserve(static_cast<std::size_t>(p.rate() * duration * 1.1) + 16);
    if (p.arrival_model == ArrivalModel::Poisson) {
        const double r = p.rate();
        double t = rng.exponential(r);
        while (t < duration) {
            arrivals.push_back(t);
            t += rng.exponential(r);
        }
    } else {
        const double rho = deadtime_base_rate(p);
        double t = rng.exponential(rho);
        while (t < duration) {
            arrivals.push_back(t);
            t += p.dead_time + rng.exponential(rho);
        }
    }
    return arrivals;
}

/// Atom-number counting statistics. q_a = (variance - mean)/mean is the
/// Mandel Q of the atom number; q_a < 0 means a sub-Poissonian beam.
struct NumberStats {
    double mean;
    double variance;
    double q_a;
    std::size_t windows;
};

/// Counts the atoms present (t_k <= s < t_k + t0) at the midpoint s of each of
/// floor(duration/window) disjoint windows, then returns mean, unbiased
/// variance and q_a of those counts. Midpoint presence sampling keeps the mean
/// equal to rate * t0 = nbar for a Poisson beam.
inline NumberStats atom_number_stats(std::span<const double> arrivals, double t0,
                                     double window, double duration) {
    if (arrivals.empty()) throw numeric_error("atom_number_stats: no arrivals");
    if (!(t0 > 0.0)) throw config_error("atom_number_stats: t0 must be > 0");
    if (!(window > 0.0)) throw config_error("atom_number_stats: window must be > 0");
    if (!(duration >= 100.0 * window))
        throw config_error("atom_number_stats: duration must be >= 100 * window");

    const std::size_t m = static_cast<std::size_t>(duration / window);
    double sum = 0.0, sum_sq = 0.0;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double s = (static_cast<double>(i) + 0.5) * window;
        while (lo < arrivals.size() && arrivals[lo] + t0 <= s) ++lo;
        std::size_t j = lo, n = 0;
        while (j < arrivals.size() && arrivals[j] <= s) {
            ++n;
            ++j;
        }
        const double x = static_cast<double>(n);
        sum += x;
        sum_sq += x * x;
    }
    const double md = static_cast<double>(m);
    const double mean = sum / md;
    if (!(mean > 0.0))
        throw numeric_error("atom_number_stats: no atom present at any sample point");
    const double variance = (sum_sq - md * mean * mean) / (md - 1.0);
    return {mean, variance, (variance - mean) / mean, m};
}

namespace detail {

// Adaptive Simpson quadrature with interval-local error control.
template <class F>
double simpson_recurse(const F& f, double a, double m, double b, double fa, double fm, double fb,
                       double whole, double eps, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
        return left + right + delta / 15.0;
    return simpson_recurse(f, a, lm, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           simpson_recurse(f, m, rm, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double eps) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_recurse(f, a, m, b, fa, fm, fb, whole, eps, 48);
}

} // namespace detail

/// Transit-overlap factor F(tau) = t0 * Int h(s) h(s+tau) ds / (Int h ds)^2
/// for the single-transit intensity envelope h. TopHat gives the triangle
/// max(0, 1 - |tau|/t0) in closed form; the Gaussian envelope
/// h(t) = exp(-8 t^2 / t0^2) is integrated by adaptive quadrature.
inline double envelope_overlap_at(const BeamParams& p, double tau) {
    const double at = std::abs(tau);
    if (p.envelope == EnvelopeShape::TopHat)
        return std::max(0.0, 1.0 - at / p.t0);

    const double t0 = p.t0;
    auto h = [t0](double s) { return std::exp(-8.0 * s * s / (t0 * t0)); };
    auto product = [&](double s) { return h(s) * h(s + at); };
    // h falls below 1e-14 beyond |s| ~ 2 t0; truncate there. A rough pass
    // sets the scale so the refined tolerance is relative, which keeps the
    // far tail of F accurate too.
    const double wing = 2.0 * t0;
    const double rough = detail::adaptive_simpson(product, -wing - at, wing, 1e-6 * t0);
    const double eps_num = std::max(1e-9 * std::abs(rough), 1e-300);
    const double num = detail::adaptive_simpson(product, -wing - at, wing, eps_num);
    const double den = detail::adaptive_simpson(h, -wing, wing, 1e-10 * t0);
    return t0 * num / (den * den);
}

struct EnvelopeOverlap {
    std::vector<double> tau;
    std::vector<double> f; // symmetric in tau, nonnegative, nonincreasing in |tau|
};

inline EnvelopeOverlap envelope_overlap(const BeamParams& p, std::span<const double> tau_grid) {
    p.validate();
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (!(tau_grid[i] > tau_grid[i - 1]))
            throw config_error("envelope_overlap: tau grid must be strictly ascending");
    EnvelopeOverlap out;
    out.tau.assign(tau_grid.begin(), tau_grid.end());
    out.f.reserve(tau_grid.size());
    for (double tau : tau_grid) out.f.push_back(envelope_overlap_at(p, tau));
    return out;
}

} // namespace beamg2
