#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "errors.hpp"

namespace beamg2 {

struct StepControl {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double initial_step = 0.0; // 0 = pick automatically
};

/// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.
///
/// Deriv must be callable as f(t, y, dydt) with y, dydt of type
/// std::array<double, N>. The embedded 4th-order error estimate drives the
/// step size; FSAL reuse makes an accepted step cost six derivative
/// evaluations. Steps clipped to an observation point do not shrink the
/// controller's natural step, so integrating across a dense grid stays cheap.
template <std::size_t N, class Deriv>
class Dopri5 {
  public:
    using State = std::array<double, N>;

    Dopri5(Deriv f, StepControl ctl = {}) : f_(std::move(f)), ctl_(ctl) {}

    void reset(double t, const State& y) {
        t_ = t;
        y_ = y;
        f_(t_, y_, k1_);
        h_nat_ = ctl_.initial_step;
    }

    double t() const { return t_; }
    const State& y() const { return y_; }

    /// Advance by exactly one accepted step, clipped so that t never exceeds
    /// t_limit. Returns the step size actually taken (0 if already there).
    double step(double t_limit) {
        const double span = t_limit - t_;
        if (!(span > 0.0)) return 0.0;
        if (h_nat_ <= 0.0) h_nat_ = initial_step_guess(span);

        const double floor_h = 1e-14 * std::max(std::abs(t_limit), std::abs(t_)) +
                               std::numeric_limits<double>::denorm_min();
        for (int attempt = 0; attempt < 200; ++attempt) {
            const bool clipped = h_nat_ > span;
            const double h = clipped ? span : h_nat_;
            if (h < floor_h)
                throw numeric_error("ode: step size underflow (stiff or discontinuous system?)");
            const double err = try_step(h);
            if (err <= 1.0) {
                t_ += h;
                y_ = y_new_;
                k1_ = k7_; // FSAL
                if (!clipped)
                    h_nat_ = h * std::clamp(0.9 * std::pow(std::max(err, 1e-12), -0.2), 0.5, 5.0);
                if (t_limit - t_ < floor_h) t_ = t_limit;
                return h;
            }
            h_nat_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
        throw numeric_error("ode: repeated step rejection");
    }

    /// Integrate until t_end (t_end >= current t).
    void advance_to(double t_end) {
        while (t_ < t_end) step(t_end);
    }

  private:
    double initial_step_guess(double span) const {
        double fmag = 0.0, ymag = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            fmag = std::max(fmag, std::abs(k1_[i]));
            ymag = std::max(ymag, std::abs(y_[i]));
        }
        const double scale = std::max(ymag, 1.0);
        const double h = fmag > 0.0 ? 1e-3 * scale / fmag : span;
        return std::min(h, span);
    }

    // One trial step of size h; fills y_new_, k7_ and returns the scaled
    // error norm (<= 1 means accept).
    double try_step(double h) {
        State k2, k3, k4, k5, k6, ytmp;

        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y_[i] + h * (a21 * k1_[i]);
        f_(t_ + c2 * h, ytmp, k2);

        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
        f_(t_ + c3 * h, ytmp, k3);

        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
        f_(t_ + c4 * h, ytmp, k4);

        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f_(t_ + c5 * h, ytmp, k5);

        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                   a65 * k5[i]);
        f_(t_ + h, ytmp, k6);

        for (std::size_t i = 0; i < N; ++i)
            y_new_[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                     a76 * k6[i]);
        f_(t_ + h, y_new_, k7_);

        double err_sq = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7_[i]);
            const double sc = ctl_.abs_tol +
                              ctl_.rel_tol * std::max(std::abs(y_[i]), std::abs(y_new_[i]));
            err_sq += (e / sc) * (e / sc);
        }
        return std::sqrt(err_sq / static_cast<double>(N));
    }

    // Dormand-Prince tableau.
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                            a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                            a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
    // 5th-minus-4th order coefficients for the error estimate.
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                            e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    Deriv f_;
    StepControl ctl_;
    double t_ = 0.0;
    double h_nat_ = 0.0;
    State y_{}, y_new_{}, k1_{}, k7_{};
};

template <std::size_t N, class Deriv>
Dopri5<N, Deriv> make_dopri5(Deriv f, StepControl ctl = {}) {
    return Dopri5<N, Deriv>(std::move(f), ctl);
}

} // namespace beamg2
