#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace beamg2 {

/// Standing-wave Gaussian mode: cavity axis along x with period lambda,
/// Gaussian transverse profile of waist w0. g0 only normalizes the coupling.
struct ModeGeometry {
    double lambda;
    double w0;
    double g0 = 1.0;

    void validate() const {
        if (!(lambda > 0.0)) throw config_error("geometry.lambda must be > 0");
        if (!(w0 > 0.0)) throw config_error("geometry.w0 must be > 0");
    }
};

/// Atomic velocities: v_z is the passage speed through the waist, sigma_vx
/// the rms transverse velocity along the cavity axis.
struct KinematicParams {
    double v_z;
    double sigma_vx;

    void validate() const {
        if (!(v_z > 0.0)) throw config_error("geometry.vz must be > 0");
        if (!(sigma_vx >= 0.0)) throw config_error("geometry.sigma_vx must be >= 0");
    }
};

struct Trajectory {
    std::array<double, 3> r0; // (x, y, z)
    std::array<double, 3> v;  // (v_x, v_y, v_z)
};

/// Normalized coupling g(r)/g0 = cos(2 pi x / lambda) * exp(-(y^2+z^2)/w0^2).
/// Crossing a node of the standing wave flips the sign.
inline double coupling(const std::array<double, 3>& pos, const ModeGeometry& geom) {
    const double axial = std::cos(2.0 * std::numbers::pi * pos[0] / geom.lambda);
    const double transverse =
        std::exp(-(pos[1] * pos[1] + pos[2] * pos[2]) / (geom.w0 * geom.w0));
    return axial * transverse;
}

/// Transit time t0 = 2 w0 / v_z.
inline double transit_time(const ModeGeometry& geom, const KinematicParams& kin) {
    if (!(kin.v_z > 0.0)) throw config_error("transit_time: v_z must be > 0");
    return 2.0 * geom.w0 / kin.v_z;
}

struct PhaseExcursion {
    double delta_phi;    // (2 pi / lambda) * v_x * window
    std::size_t sign_flips; // standing-wave nodes crossed during the window
};

/// Axial optical phase accumulated while the emission lasts, plus the number
/// of coupling sign flips (zeros of cos(2 pi x / lambda) strictly inside the
/// swept interval; touching a node at an endpoint does not count).
inline PhaseExcursion phase_excursion(const Trajectory& traj, double window,
                                      const ModeGeometry& geom) {
    geom.validate();
    if (!(window > 0.0)) throw config_error("phase.window must be > 0");
    const double vx = traj.v[0];
    const double delta_phi = 2.0 * std::numbers::pi / geom.lambda * vx * window;

    const double x0 = traj.r0[0];
    const double x1 = x0 + vx * window;
    const double lo = std::min(x0, x1), hi = std::max(x0, x1);
    // Nodes sit at x = lambda (1/4 + k/2); count integers k strictly inside
    // (lo, hi) in node coordinates.
    const double a = 2.0 * lo / geom.lambda - 0.5;
    const double b = 2.0 * hi / geom.lambda - 0.5;
    const double k_min = std::floor(a) + 1.0; // smallest integer > a
    const double k_max = std::ceil(b) - 1.0;  // largest integer < b
    const double n = k_max - k_min + 1.0;
    return {delta_phi, n > 0.0 ? static_cast<std::size_t>(n) : 0};
}

struct ExcursionStats {
    double mean;
    double std_dev;
    double fraction_ge_half_pi; // fraction of samples with |delta_phi| >= pi/2
    double se_mean;
    double se_std;
    double se_fraction;
    std::size_t samples;
};

/// Draws v_x ~ N(0, sigma_vx) and an initial axial position uniform over one
/// wavelength (unlocalized atoms) for each sampled emission window.
inline std::vector<PhaseExcursion> sample_excursions(const ModeGeometry& geom,
                                                     const KinematicParams& kin, double window,
                                                     std::size_t n_samples, Rng& rng) {
    geom.validate();
    kin.validate();
    if (!(window > 0.0)) throw config_error("phase.window must be > 0");
    if (n_samples < 1000) throw config_error("phase.samples must be >= 1000");

    std::vector<PhaseExcursion> out;
    out.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double vx = rng.normal(0.0, kin.sigma_vx);
        const double x0 = rng.uniform_co() * geom.lambda;
        Trajectory traj{{x0, 0.0, 0.0}, {vx, 0.0, kin.v_z}};
        out.push_back(phase_excursion(traj, window, geom));
    }
    return out;
}

inline ExcursionStats summarize_excursions(std::span<const PhaseExcursion> samples) {
    double sum = 0.0, sum_sq = 0.0;
    std::size_t beyond = 0;
    const double half_pi = 0.5 * std::numbers::pi;
    for (const auto& s : samples) {
        sum += s.delta_phi;
        sum_sq += s.delta_phi * s.delta_phi;
        if (std::abs(s.delta_phi) >= half_pi) ++beyond;
    }
    const double n = static_cast<double>(samples.size());
    const double mean = sum / n;
    const double var = n > 1 ? (sum_sq - n * mean * mean) / (n - 1.0) : 0.0;
    const double sd = std::sqrt(std::max(0.0, var));
    const double frac = static_cast<double>(beyond) / n;
    return {mean,
            sd,
            frac,
            sd / std::sqrt(n),
            sd / std::sqrt(2.0 * (n - 1.0)),
            std::sqrt(frac * (1.0 - frac) / n),
            samples.size()};
}

/// Phase-excursion statistics of the emitted field. For std(delta_phi) around
/// pi/2 the fraction beyond pi/2 approaches the Gaussian tail value
/// 2(1 - Phi(1)) ~ 0.317, which is what makes the emitted phase effectively
/// random.
inline ExcursionStats excursion_stats(const ModeGeometry& geom, const KinematicParams& kin,
                                      double window, std::size_t n_samples, Rng& rng) {
    const auto samples = sample_excursions(geom, kin, window, n_samples, rng);
    return summarize_excursions(samples);
}

} // namespace beamg2
