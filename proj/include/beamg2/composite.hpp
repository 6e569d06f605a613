#pragma once

#include <cmath>
#include <span>
#include <utility>

#include "atom.hpp"
#include "beam.hpp"
#include "curve.hpp"
#include "errors.hpp"

namespace beamg2 {

/// Background-to-signal rate ratio b = B/S.
struct BackgroundModel {
    double ratio = 0.0;

    void validate() const {
        if (!(ratio >= 0.0) || !std::isfinite(ratio))
            throw config_error("background.ratio must be finite and >= 0");
    }
};

/// Beam-averaged intensity correlation
///   g2(tau) = 1 + [q_a + g_A^2(tau)] * F(tau) / nbar,
/// with g_A^2 the single-atom correlation and F the transit-overlap factor.
/// At tau = 0 this reduces to 1 + q_a * F(0) / nbar: the fluctuating atom
/// number alone decides whether zero-lag coincidences are suppressed, and a
/// Poisson beam (q_a = 0) pins g2(0) to exactly 1 however perfect the
/// single-atom antibunching is.
inline CorrelationCurve g2_beam(const AtomParams& atom, const BeamParams& beam, double q_a,
                                std::span<const double> tau_grid) {
    beam.validate();
    if (beam.arrival_model == ArrivalModel::Poisson && q_a != 0.0)
        throw std::invalid_argument("g2_beam: q_a must be 0 for a Poisson beam");

    const AtomCorrelation atom_corr = g2_atom(atom, tau_grid);
    CorrelationCurve out;
    out.tau.assign(tau_grid.begin(), tau_grid.end());
    out.g2.reserve(tau_grid.size());
    out.sigma.assign(tau_grid.size(), 0.0);
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        const double f = envelope_overlap_at(beam, tau_grid[i]);
        out.g2.push_back(1.0 + (q_a + atom_corr.g2[i]) * f / beam.nbar);
    }
    return out;
}

/// Uncorrelated background of relative rate b dilutes the correlation:
///   g2_obs(tau) = 1 + (g2_src(tau) - 1) / (1 + b)^2.
/// A shape-preserving contraction toward 1 -- background cannot create or
/// destroy the structure of the curve, only flatten it.
inline CorrelationCurve g2_with_background(const CorrelationCurve& src,
                                           const BackgroundModel& bg) {
    bg.validate();
    if (bg.ratio == 0.0) return src;
    const double scale = 1.0 / ((1.0 + bg.ratio) * (1.0 + bg.ratio));
    CorrelationCurve out = src;
    for (std::size_t i = 0; i < out.g2.size(); ++i)
        out.g2[i] = 1.0 + (src.g2[i] - 1.0) * scale;
    for (double& s : out.sigma) s *= scale;
    return out;
}

/// Mandel Q for counting windows of length window,
///   Q(T) = (2 rate / T) * Int_0^T (T - tau) (g2(tau) - 1) dtau,
/// by trapezoidal quadrature on the curve's grid.
inline double mandel_q_from_g2(const CorrelationCurve& curve, double rate, double window) {
    if (!(window > 0.0)) throw config_error("mandel_q_from_g2: window must be > 0");
    if (curve.tau.empty() || curve.tau.front() > 0.0 || curve.tau.back() < window)
        throw config_error("mandel_q_from_g2: curve grid must cover [0, window]");

    double integral = 0.0;
    for (std::size_t i = 1; i < curve.tau.size() && curve.tau[i - 1] < window; ++i) {
        const double t_lo = curve.tau[i - 1];
        const double t_hi = std::min(curve.tau[i], window);
        const double f_lo = (window - t_lo) * (curve.g2[i - 1] - 1.0);
        // The integrand vanishes at tau = window, so a panel clipped there
        // ends at zero.
        const double f_hi =
            curve.tau[i] <= window ? (window - curve.tau[i]) * (curve.g2[i] - 1.0) : 0.0;
        integral += 0.5 * (f_lo + f_hi) * (t_hi - t_lo);
    }
    return 2.0 * rate / window * integral;
}

enum class PhotonStatistics { Sub, Poissonian, Super };

/// Sub if q < -3 sigma, Super if q > +3 sigma, Poissonian otherwise.
inline PhotonStatistics classify(double q, double sigma) {
    if (!(sigma >= 0.0)) throw config_error("classify: sigma must be >= 0");
    if (q < -3.0 * sigma) return PhotonStatistics::Sub;
    if (q > 3.0 * sigma) return PhotonStatistics::Super;
    return PhotonStatistics::Poissonian;
}

inline const char* to_string(PhotonStatistics s) {
    switch (s) {
        case PhotonStatistics::Sub: return "sub-poissonian";
        case PhotonStatistics::Super: return "super-poissonian";
        default: return "poissonian";
    }
}

/// The model curves of the figure-1 scenario: a Poisson beam with nbar = 0.1,
/// generalized Rabi frequency 25/t0, transverse decay 0.1/t0 on resonance,
/// top-hat transits. Returns (no-background trace, trace diluted by a
/// background-to-signal ratio of 0.5).
inline std::pair<CorrelationCurve, CorrelationCurve>
figure1_curves(std::span<const double> tau_grid) {
    const AtomParams atom{0.1, 25.0, 0.0};
    const BeamParams beam{0.1, 1.0, ArrivalModel::Poisson, 0.0, EnvelopeShape::TopHat};
    if (!tau_grid.empty() && tau_grid.back() > 4.0 * beam.t0)
        throw config_error("figure1_curves: tau grid must stay within [0, 4 t0]");
    CorrelationCurve clean = g2_beam(atom, beam, 0.0, tau_grid);
    CorrelationCurve diluted = g2_with_background(clean, BackgroundModel{0.5});
    return {std::move(clean), std::move(diluted)};
}

} // namespace beamg2
