#pragma once

// Test-side oracles, written directly from the model definitions and kept
// independent of the library's propagation code paths.

#include <complex>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rai/sequence.hpp"

namespace oracle {

using cd = std::complex<double>;

/// Rotating-frame pulse Hamiltonian (over hbar), basis (g, e):
/// H = 1/2 [-delta sigma_z + Omega (cos phi sigma_x + sin phi sigma_y)].
inline Eigen::Matrix2cd pulse_hamiltonian(double rabi, double detuning, double phase) {
    Eigen::Matrix2cd h;
    h(0, 0) = -0.5 * detuning;
    h(1, 1) = 0.5 * detuning;
    h(1, 0) = 0.5 * rabi * cd(std::cos(phase), std::sin(phase));
    h(0, 1) = std::conj(h(1, 0));
    return h;
}

/// Fixed-step RK4 integration of the Schroedinger equation.
inline Eigen::Vector2cd rk4_schrodinger(Eigen::Vector2cd psi, double rabi, double detuning,
                                        double phase, double duration, int steps) {
    const Eigen::Matrix2cd h = pulse_hamiltonian(rabi, detuning, phase);
    const double dt = duration / steps;
    const auto deriv = [&](const Eigen::Vector2cd& p) { return (cd(0, -1) * (h * p)).eval(); };
    for (int i = 0; i < steps; ++i) {
        const Eigen::Vector2cd k1 = deriv(psi);
        const Eigen::Vector2cd k2 = deriv(psi + 0.5 * dt * k1);
        const Eigen::Vector2cd k3 = deriv(psi + 0.5 * dt * k2);
        const Eigen::Vector2cd k4 = deriv(psi + dt * k3);
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return psi;
}

/// Fixed-step RK4 integration of the Lindblad equation with decay |e> -> |g>.
inline Eigen::Matrix2cd rk4_lindblad(Eigen::Matrix2cd rho, double rabi, double detuning,
                                     double phase, double decay_rate, double duration, int steps) {
    const Eigen::Matrix2cd h = pulse_hamiltonian(rabi, detuning, phase);
    Eigen::Matrix2cd sm = Eigen::Matrix2cd::Zero();
    sm(0, 1) = 1.0; // sigma- = |g><e|
    const Eigen::Matrix2cd sp = sm.adjoint();
    const Eigen::Matrix2cd ee = sp * sm;
    const double dt = duration / steps;
    const auto deriv = [&](const Eigen::Matrix2cd& r) {
        Eigen::Matrix2cd d = cd(0, -1) * (h * r - r * h);
        d += decay_rate * (sm * r * sp - 0.5 * (ee * r + r * ee));
        return d.eval();
    };
    for (int i = 0; i < steps; ++i) {
        const Eigen::Matrix2cd k1 = deriv(rho);
        const Eigen::Matrix2cd k2 = deriv(rho + 0.5 * dt * k1);
        const Eigen::Matrix2cd k3 = deriv(rho + 0.5 * dt * k2);
        const Eigen::Matrix2cd k4 = deriv(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho;
}

/// UR-N phase formula evaluated verbatim:
/// phi_k = (k-1)(k-2)/2 * Phi + (k-1) phi2, Phi(4m) = pi/m,
/// Phi(4m+2) = 2m pi/(2m+1).
inline std::vector<double> ur_formula(int n, double phi2, double offset) {
    double big_phi;
    if (n % 4 == 0)
        big_phi = std::numbers::pi / (n / 4);
    else
        big_phi = 2.0 * ((n - 2) / 4) * std::numbers::pi / (2 * ((n - 2) / 4) + 1);
    std::vector<double> out;
    for (int k = 1; k <= n; ++k) {
        const double tri = 0.5 * (k - 1) * (k - 2);
        out.push_back(rai::wrap_two_pi(tri * big_phi + (k - 1) * phi2 + offset));
    }
    return out;
}

/// Brute-force multipath reference: explicit 2^L enumeration without merging,
/// grouped per snapshot by (internal, site). Amplitude formulas written out
/// from the model definition.
struct EnumeratedSnapshots {
    // one map per mirror pulse: (internal, site) -> summed amplitude
    std::vector<std::map<std::pair<int, int>, cd>> snapshots;
};

inline EnumeratedSnapshots enumerate_paths(const rai::SequenceSpec& seq, double area_error,
                                           double detuning_ratio, double recoil_phase) {
    struct Raw {
        int internal;
        int pos;
        cd amp;
    };
    const double area = std::numbers::pi * (1.0 + area_error);
    const double delta = detuning_ratio * std::numbers::pi;
    const double wgen = std::hypot(area, delta);
    const double half = 0.5 * wgen;
    const cd stay_g(std::cos(half), delta / wgen * std::sin(half));
    const cd stay_e = std::conj(stay_g);
    const double tmag = area / wgen * std::sin(half);

    std::vector<Raw> paths;
    const double inv = 1.0 / std::numbers::sqrt2;
    paths.push_back({0, 0, cd(inv, 0.0)});
    paths.push_back({1, 0, cd(0.0, -inv) * cd(std::cos(seq.first_bs_phase), std::sin(seq.first_bs_phase))});

    EnumeratedSnapshots out;
    const auto phases = rai::expanded_phases(seq);
    for (int i = 0; i < seq.loops; ++i) {
        for (auto& p : paths)
            if (p.internal == 1) ++p.pos;
        std::vector<Raw> next;
        next.reserve(2 * paths.size());
        for (const auto& p : paths) {
            const double chi = phases[static_cast<std::size_t>(i)] - recoil_phase * p.pos;
            const cd up(std::cos(chi), std::sin(chi));
            if (p.internal == 0) {
                next.push_back({0, p.pos, p.amp * stay_g});
                next.push_back({1, p.pos, p.amp * cd(0.0, -tmag) * up});
            } else {
                next.push_back({1, p.pos, p.amp * stay_e});
                next.push_back({0, p.pos, p.amp * cd(0.0, -tmag) * std::conj(up)});
            }
        }
        paths = std::move(next);
        std::map<std::pair<int, int>, cd> grouped;
        for (const auto& p : paths) grouped[{p.internal, p.pos}] += p.amp;
        out.snapshots.push_back(std::move(grouped));
    }
    return out;
}

} // namespace oracle
