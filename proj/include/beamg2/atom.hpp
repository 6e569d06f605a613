#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "errors.hpp"
#include "ode.hpp"
#include "rng.hpp"

namespace beamg2 {

/// Drive and decay parameters of a two-level atom. beta is the transverse
/// (dipole) decay rate; the population decay rate is fixed at gamma = 2*beta
/// (pure radiative broadening). omega is the resonant Rabi frequency, delta
/// the laser detuning.
struct AtomParams {
    double beta;
    double omega;
    double delta;

    void validate() const {
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw config_error("atom.beta must be finite and > 0");
        if (!(omega >= 0.0) || !std::isfinite(omega))
            throw config_error("atom.omega must be finite and >= 0");
        if (!std::isfinite(delta))
            throw config_error("atom.delta must be finite");
    }

    /// Generalized Rabi frequency sqrt(omega^2 + delta^2).
    double generalized_rabi() const { return std::hypot(omega, delta); }
};

/// Bloch vector components: u = rho_eg + rho_ge, v = i(rho_ge - rho_eg),
/// w = rho_ee - rho_gg.
struct BlochState {
    double u;
    double v;
    double w;
};

inline double excited_population(const BlochState& s) { return 0.5 * (1.0 + s.w); }

/// Optical Bloch equations in the rotating frame:
///   du/dt = -beta*u + delta*v
///   dv/dt = -delta*u - beta*v - omega*w
///   dw/dt =  omega*v - 2*beta*(w + 1)
inline BlochState bloch_derivative(const BlochState& s, const AtomParams& p) {
    return {-p.beta * s.u + p.delta * s.v,
            -p.delta * s.u - p.beta * s.v - p.omega * s.w,
            p.omega * s.v - 2.0 * p.beta * (s.w + 1.0)};
}

/// Closed-form fixed point of the Bloch equations. For omega = 0 this is the
/// ground state, which is a valid (dark) steady state.
inline BlochState steady_state(const AtomParams& p) {
    const double bd2 = p.beta * p.beta + p.delta * p.delta;
    const double denom = p.omega * p.omega + 2.0 * bd2;
    return {2.0 * p.omega * p.delta / denom, 2.0 * p.omega * p.beta / denom, -2.0 * bd2 / denom};
}

/// Single-atom intensity correlation on a lag grid.
struct AtomCorrelation {
    std::vector<double> tau; // ascending, starts at 0
    std::vector<double> g2;  // >= 0; g2[0] = 0; -> 1 for large lags
};

namespace detail {

struct BlochOde {
    AtomParams p;
    void operator()(double, const std::array<double, 3>& y, std::array<double, 3>& dy) const {
        dy[0] = -p.beta * y[0] + p.delta * y[1];
        dy[1] = -p.delta * y[0] - p.beta * y[1] - p.omega * y[2];
        dy[2] = p.omega * y[1] - 2.0 * p.beta * (y[2] + 1.0);
    }
};

} // namespace detail

/// g_A^2(tau) = rho_ee(tau) / rho_ee(ss) with the atom prepared in the ground
/// state at tau = 0 (quantum regression for a radiative two-level atom).
/// Requires omega > 0; otherwise the correlation is undefined.
inline AtomCorrelation g2_atom(const AtomParams& p, std::span<const double> tau_grid) {
    p.validate();
    if (tau_grid.empty() || tau_grid.front() != 0.0)
        throw config_error("g2_atom: tau grid must be ascending and start at 0");
    for (std::size_t i = 1; i < tau_grid.size(); ++i)
        if (!(tau_grid[i] > tau_grid[i - 1]))
            throw config_error("g2_atom: tau grid must be strictly ascending");

    const double pss = excited_population(steady_state(p));
    if (!(pss > 0.0))
        throw numeric_error("g2_atom: correlation undefined for omega = 0");

    AtomCorrelation out;
    out.tau.assign(tau_grid.begin(), tau_grid.end());
    out.g2.reserve(tau_grid.size());

    auto solver = make_dopri5<3>(detail::BlochOde{p}, StepControl{1e-9, 1e-12});
    solver.reset(0.0, {0.0, 0.0, -1.0});
    for (double tau : tau_grid) {
        solver.advance_to(tau);
        out.g2.push_back(0.5 * (1.0 + solver.y()[2]) / pss);
    }
    return out;
}

/// Resonant strong-driving closed form
///   g2(tau) = 1 - exp(-(3 beta/2) tau) [cos(mu tau) + (3 beta / 2 mu) sin(mu tau)],
///   mu = sqrt(omega^2 - beta^2/4).
/// Valid for delta = 0 and omega > beta/2; serves as the oracle for g2_atom.
inline double g2_atom_closed_form(const AtomParams& p, double tau) {
    if (p.delta != 0.0)
        throw std::domain_error("g2_atom_closed_form: resonant (delta = 0) form only");
    if (!(p.omega > 0.5 * p.beta))
        throw std::domain_error("g2_atom_closed_form: requires omega > beta/2");
    const double mu = std::sqrt(p.omega * p.omega - 0.25 * p.beta * p.beta);
    const double a = 1.5 * p.beta;
    return 1.0 - std::exp(-a * tau) * (std::cos(mu * tau) + (a / mu) * std::sin(mu * tau));
}

namespace detail {

// Non-Hermitian amplitude evolution for the quantum-jump unraveling:
//   dc_g/dt = i (omega(t)/2) c_e
//   dc_e/dt = i (omega(t)/2) c_g + (i delta - beta) c_e
// packed as (Re c_g, Im c_g, Re c_e, Im c_e).
template <class Env>
struct JumpOde {
    AtomParams p;
    Env* env;
    void operator()(double t, const std::array<double, 4>& y, std::array<double, 4>& dy) const {
        const double hw = 0.5 * p.omega * (*env)(t);
        dy[0] = -hw * y[3];
        dy[1] = hw * y[2];
        dy[2] = -hw * y[1] - p.delta * y[3] - p.beta * y[2];
        dy[3] = hw * y[0] + p.delta * y[2] - p.beta * y[3];
    }
};

inline double norm_sq(const std::array<double, 4>& y) {
    return y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
}

inline double excited_sq(const std::array<double, 4>& y) {
    return y[2] * y[2] + y[3] * y[3];
}

} // namespace detail

struct SurvivalSample {
    double t;
    double survival; // |c_g|^2 + |c_e|^2, monotone nonincreasing
    double excited;  // |c_e|^2; dP/dt = -2 beta |c_e|^2
};

/// No-jump survival trajectory from the ground state on a time grid.
/// Exposed for verification of the jump engine's bookkeeping.
template <std::invocable<double> Env>
std::vector<SurvivalSample> survival_curve(const AtomParams& p, Env env,
                                           std::span<const double> t_grid) {
    p.validate();
    detail::JumpOde<Env> ode{p, &env};
    auto solver = make_dopri5<4>(ode, StepControl{1e-9, 1e-12});
    solver.reset(t_grid.empty() ? 0.0 : t_grid.front(), {1.0, 0.0, 0.0, 0.0});
    std::vector<SurvivalSample> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        solver.advance_to(t);
        out.push_back({t, detail::norm_sq(solver.y()), detail::excited_sq(solver.y())});
    }
    return out;
}

/// Quantum-jump (waiting-time) sampling of emission times over [0, duration).
///
/// The amplitudes start in the ground state and evolve under the
/// non-Hermitian Hamiltonian with omega(t) = omega * env(t); a jump is
/// recorded when the survival probability first crosses a fresh uniform draw,
/// localized by bisection to 1e-12 * duration, after which the state resets
/// to the ground state. The emission probability density is 2 beta |c_e|^2.
template <std::invocable<double> Env>
std::vector<double> sample_emission_times(const AtomParams& p, Env env, double duration,
                                          Rng& rng) {
    p.validate();
    if (!(duration > 0.0)) throw config_error("sample_emission_times: duration must be > 0");

    std::vector<double> events;
    if (p.omega == 0.0) return events; // never excited, zero intensity

    const StepControl ctl{1e-9, 1e-12};
    detail::JumpOde<Env> ode{p, &env};
    auto solver = make_dopri5<4>(ode, ctl);
    const std::array<double, 4> ground{1.0, 0.0, 0.0, 0.0};
    const double time_tol = 1e-12 * duration;
    // Survival decays monotonically up to integrator error.
    const double mono_slack = 10.0 * (ctl.rel_tol + ctl.abs_tol);

    solver.reset(0.0, ground);
    double survival_prev = 1.0;
    double threshold = rng.uniform();

    while (solver.t() < duration) {
        const double t_prev = solver.t();
        const std::array<double, 4> y_prev = solver.y();
        solver.step(duration);
        const double survival = detail::norm_sq(solver.y());
        if (survival > survival_prev + mono_slack)
            throw numeric_error("sample_emission_times: survival not monotone (step failure)");
        if (survival > threshold) {
            survival_prev = survival;
            continue;
        }
        // Jump inside (t_prev, t]: bisect on P(t) - threshold.
        double lo = t_prev, hi = solver.t();
        auto probe = make_dopri5<4>(ode, ctl);
        while (hi - lo > time_tol) {
            const double mid = 0.5 * (lo + hi);
            probe.reset(t_prev, y_prev);
            probe.advance_to(mid);
            if (detail::norm_sq(probe.y()) <= threshold)
                hi = mid;
            else
                lo = mid;
        }
        events.push_back(hi);
        solver.reset(hi, ground);
        survival_prev = 1.0;
        threshold = rng.uniform();
    }
    return events;
}

} // namespace beamg2
