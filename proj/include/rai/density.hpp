#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace rai {

// 2x2 density matrices share the (ground, excited) basis order of pulse.hpp.
using DensityMatrix = Eigen::Matrix2cd;

inline DensityMatrix ground_density() {
    DensityMatrix r = DensityMatrix::Zero();
    r(0, 0) = 1.0;
    return r;
}

inline DensityMatrix excited_density() {
    DensityMatrix r = DensityMatrix::Zero();
    r(1, 1) = 1.0;
    return r;
}

inline DensityMatrix density_from_state(const Eigen::Vector2cd& psi) {
    return psi * psi.adjoint();
}

inline double excited_population(const DensityMatrix& rho) { return rho(1, 1).real(); }

/// Bloch components (u, v, w) = (2 Re rho_ge, 2 Im rho_ge, rho_ee - rho_gg).
inline std::array<double, 3> bloch_vector(const DensityMatrix& rho) {
    return {2.0 * rho(0, 1).real(), 2.0 * rho(0, 1).imag(),
            rho(1, 1).real() - rho(0, 0).real()};
}

inline double hermiticity_defect(const DensityMatrix& rho) {
    return (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff();
}

inline double trace_defect(const DensityMatrix& rho) {
    return std::abs((rho(0, 0) + rho(1, 1)).real() - 1.0) + std::abs((rho(0, 0) + rho(1, 1)).imag());
}

/// Smallest eigenvalue of the Hermitian part (negative values signal a
/// positivity violation beyond rounding).
inline double min_eigenvalue(const DensityMatrix& rho) {
    const double a = rho(0, 0).real();
    const double d = rho(1, 1).real();
    const std::complex<double> b = 0.5 * (rho(0, 1) + std::conj(rho(1, 0)));
    const double m = 0.5 * (a + d);
    const double r = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
    return m - r;
}

/// Exact decay + detuning map over a laser-free interval: rho_ee decays at
/// Gamma, the coherence at Gamma/2 with phase e^{+i delta t}, and the lost
/// population lands in the ground state.
inline DensityMatrix free_evolution(const DensityMatrix& rho, double t, double decay_rate,
                                    double detuning = 0.0) {
    if (t < 0.0) throw std::invalid_argument("free_evolution: negative duration");
    const double k = std::exp(-decay_rate * t);
    const std::complex<double> rot(std::cos(detuning * t), std::sin(detuning * t));
    DensityMatrix out;
    out(0, 0) = rho(0, 0) + rho(1, 1) * (1.0 - k);
    out(1, 1) = rho(1, 1) * k;
    out(0, 1) = rho(0, 1) * std::sqrt(k) * rot;
    out(1, 0) = std::conj(out(0, 1));
    return out;
}

} // namespace rai
