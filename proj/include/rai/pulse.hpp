#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "rai/constants.hpp"
#include "rai/phase.hpp"

namespace rai {

// Basis order is (ground, excited) everywhere: index 0 = |g>, index 1 = |e>.
//
// Rotating-frame Hamiltonian of one square pulse,
//   H/hbar = 1/2 [ -delta sigma_z + Omega (cos(phi) sigma_x + sin(phi) sigma_y) ],
// with sigma_z = diag(+1, -1) in the (g, e) basis. The g->e transfer amplitude
// carries e^{+i phi}, e->g carries e^{-i phi}; during free evolution the
// coherence rho_ge acquires e^{+i delta t}. These conventions are fixed
// globally so amplified-phase signs are reproducible.

/// One square laser pulse acting on the two-level atom.
struct PulseParams {
    double rabi = 0.0;                        // rad/s, >= 0
    double detuning = 0.0;                    // rad/s
    double phase = 0.0;                       // rad, stored in [0, 2pi)
    double duration = 0.0;                    // s, >= 0
    double decay_rate = default_decay_rate;   // 1/s, >= 0

    PulseParams() = default;
    PulseParams(double rabi_, double detuning_, double phase_, double duration_,
                double decay_rate_ = default_decay_rate)
        : rabi(rabi_), detuning(detuning_), phase(wrap_two_pi(phase_)),
          duration(duration_), decay_rate(decay_rate_) {
        if (duration < 0.0) throw std::invalid_argument("PulseParams: negative duration");
        if (rabi < 0.0) throw std::invalid_argument("PulseParams: negative Rabi frequency");
        if (decay_rate < 0.0) throw std::invalid_argument("PulseParams: negative decay rate");
    }
};

using TwoLevelUnitary = Eigen::Matrix2cd;

/// Coherent propagator exp(-i H tau / hbar) of one square pulse in closed form
/// via the generalized Rabi frequency sqrt(Omega^2 + delta^2). Decay is
/// ignored here. Ground-state transfer probability is
/// (Omega^2 / Omega_gen^2) sin^2(Omega_gen tau / 2).
inline TwoLevelUnitary unitary_pulse(const PulseParams& p) {
    if (p.duration < 0.0) throw std::invalid_argument("unitary_pulse: negative duration");
    TwoLevelUnitary u = TwoLevelUnitary::Identity();
    const double wgen = std::hypot(p.rabi, p.detuning);
    if (wgen == 0.0 || p.duration == 0.0) return u;
    const double half = 0.5 * wgen * p.duration;
    const double c = std::cos(half);
    const double s = std::sin(half);
    const std::complex<double> eip(std::cos(p.phase), std::sin(p.phase));
    const double on = p.rabi / wgen;   // transverse axis component
    const double dn = p.detuning / wgen;
    u(0, 0) = std::complex<double>(c, dn * s);
    u(1, 1) = std::complex<double>(c, -dn * s);
    u(1, 0) = std::complex<double>(0.0, -on * s) * eip;
    u(0, 1) = std::complex<double>(0.0, -on * s) * std::conj(eip);
    return u;
}

/// Non-Hermitian propagator exp(-i H_eff tau / hbar) with
/// H_eff = H - i hbar Gamma |e><e| / 2, used by the quantum-jump unraveling.
/// Closed form through the complex axis-angle formula: the squared norm of
/// the evolved state is the no-jump probability.
inline Eigen::Matrix2cd effective_pulse_propagator(const PulseParams& p) {
    if (p.duration < 0.0) throw std::invalid_argument("effective_pulse_propagator: negative duration");
    using cd = std::complex<double>;
    // H_eff/hbar = 1/2 [ a_z sigma_z + Omega sigma_phi ] - i Gamma/4 I,
    // a_z = -delta + i Gamma/2.
    const cd az(-p.detuning, 0.5 * p.decay_rate);
    const cd lam2 = cd(p.rabi * p.rabi, 0.0) + az * az;
    const cd lam = std::sqrt(lam2);
    const cd theta = 0.5 * lam * p.duration; // complex half-angle
    cd cth = std::cos(theta);
    cd sinc; // sin(theta)/lam * duration-free axis scaling handled below
    if (std::abs(theta) < 1e-8) {
        // series for sin(theta)/theta to keep the lam -> 0 limit exact
        const cd t2 = theta * theta;
        sinc = (1.0 - t2 / 6.0 + t2 * t2 / 120.0) * (0.5 * p.duration);
    } else {
        sinc = std::sin(theta) / lam;
    }
    const cd eip(std::cos(p.phase), std::sin(p.phase));
    const double damp = std::exp(-0.25 * p.decay_rate * p.duration);
    Eigen::Matrix2cd m;
    m(0, 0) = cth - cd(0, 1) * sinc * az;
    m(1, 1) = cth + cd(0, 1) * sinc * az;
    m(1, 0) = cd(0, -1) * sinc * p.rabi * eip;
    m(0, 1) = cd(0, -1) * sinc * p.rabi * std::conj(eip);
    return damp * m;
}

/// Max-norm deviation of U from unitarity, ||U^dag U - I||_max.
inline double unitarity_defect(const TwoLevelUnitary& u) {
    Eigen::Matrix2cd d = u.adjoint() * u - Eigen::Matrix2cd::Identity();
    return d.cwiseAbs().maxCoeff();
}

} // namespace rai
