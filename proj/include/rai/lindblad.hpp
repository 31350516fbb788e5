#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "rai/density.hpp"
#include "rai/ensemble.hpp"
#include "rai/program.hpp"
#include "rai/pulse.hpp"

namespace rai {

// The master equation
//   drho/dt = -i[H, rho] + Gamma (sigma- rho sigma+ - 1/2 {sigma+ sigma-, rho})
// is propagated in the real coordinates v = (rho_gg, Re rho_ge, Im rho_ge,
// rho_ee). Pulses are square, so each segment map is the exact matrix
// exponential of the constant generator; no ODE stepping enters the error
// budget. Laser phase only rotates the coherence quadratures, so one
// zero-phase pulse map per atom serves every mirror pulse via
//   E_phi = Rot(-phi) o E_0 o Rot(+phi)
// acting on (Re rho_ge, Im rho_ge).

using LindbladState = Eigen::Vector4d;

inline LindbladState to_lindblad_state(const DensityMatrix& rho) {
    return LindbladState(rho(0, 0).real(), rho(0, 1).real(), rho(0, 1).imag(), rho(1, 1).real());
}

inline DensityMatrix from_lindblad_state(const LindbladState& v) {
    DensityMatrix rho;
    rho(0, 0) = v[0];
    rho(0, 1) = std::complex<double>(v[1], v[2]);
    rho(1, 0) = std::complex<double>(v[1], -v[2]);
    rho(1, 1) = v[3];
    return rho;
}

/// Lindblad generator in the real coordinates for a pulse of given phase.
inline Eigen::Matrix4d lindblad_generator(double rabi, double detuning, double decay_rate,
                                          double phase) {
    const double c = 0.5 * rabi * std::cos(phase);
    const double s = 0.5 * rabi * std::sin(phase);
    const double g = decay_rate;
    Eigen::Matrix4d a;
    // d gg  = -2 s x - 2 c y + g ee
    // d x   = +s gg - g/2 x - delta y - s ee
    // d y   = +c gg + delta x - g/2 y - c ee
    // d ee  = +2 s x + 2 c y - g ee
    a << 0.0, -2.0 * s, -2.0 * c, g,
         s, -0.5 * g, -detuning, -s,
         c, detuning, -0.5 * g, -c,
         0.0, 2.0 * s, 2.0 * c, -g;
    return a;
}

namespace detail {
inline void rotate_coherence(LindbladState& v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const double x = v[1], y = v[2];
    v[1] = c * x - s * y;
    v[2] = s * x + c * y;
}
} // namespace detail

/// Per-atom propagator for one sequence with cached segment maps.
class LindbladEngine {
public:
    LindbladEngine(const SequenceSpec& seq, double rabi, double detuning, double decay_rate)
        : detuning_(detuning), decay_rate_(decay_rate), timing_(seq.timing) {
        seq.timing.validate();
        pulse_map_ = segment_map(rabi, seq.timing.pi_duration);
        bs_map_ = segment_map(rabi, seq.timing.beamsplitter_duration);
        mirror_phases_ = expanded_phases(seq);
        first_bs_phase_ = seq.first_bs_phase;
        final_bs_phase_ = seq.final_bs_phase;
    }

    /// BS1 + deadtime + all mirror pulses and deadtimes (everything before
    /// the final beamsplitter).
    LindbladState propagate_train(LindbladState v) const {
        return propagate_train_observed(v, [](int, const LindbladState&) {});
    }

    /// Same as propagate_train, invoking obs(mirror_index, state) after each
    /// mirror pulse (before the following deadtime).
    template <typename Obs>
    LindbladState propagate_train_observed(LindbladState v, Obs&& obs) const {
        apply_pulse(v, bs_map_, first_bs_phase_);
        apply_delay(v, timing_.deadtime);
        for (std::size_t i = 0; i < mirror_phases_.size(); ++i) {
            apply_pulse(v, pulse_map_, mirror_phases_[i]);
            obs(static_cast<int>(i), v);
            apply_delay(v, timing_.deadtime);
        }
        return v;
    }

    LindbladState apply_final_bs(LindbladState v, double extra_phase = 0.0) const {
        apply_pulse(v, bs_map_, final_bs_phase_ + extra_phase);
        return v;
    }

    DensityMatrix propagate(const DensityMatrix& rho0, double final_bs_extra = 0.0) const {
        LindbladState v = propagate_train(to_lindblad_state(rho0));
        v = apply_final_bs(v, final_bs_extra);
        return from_lindblad_state(v);
    }

    const Eigen::Matrix4d& pulse_map() const { return pulse_map_; }

private:
    Eigen::Matrix4d segment_map(double rabi, double duration) const {
        Eigen::Matrix4d a = lindblad_generator(rabi, detuning_, decay_rate_, 0.0);
        Eigen::Matrix4d m = (a * duration).exp();
        if (!m.allFinite())
            throw std::runtime_error("LindbladEngine: propagator overflow in segment of duration " +
                                     std::to_string(duration));
        return m;
    }

    void apply_pulse(LindbladState& v, const Eigen::Matrix4d& map0, double phase) const {
        detail::rotate_coherence(v, phase);
        v = map0 * v;
        detail::rotate_coherence(v, -phase);
    }

    void apply_delay(LindbladState& v, double t) const {
        const double k = std::exp(-decay_rate_ * t);
        const double sk = std::sqrt(k);
        v[0] += v[3] * (1.0 - k);
        v[3] *= k;
        detail::rotate_coherence(v, detuning_ * t);
        v[1] *= sk;
        v[2] *= sk;
    }

    double detuning_;
    double decay_rate_;
    TimingSpec timing_;
    Eigen::Matrix4d pulse_map_;
    Eigen::Matrix4d bs_map_;
    std::vector<double> mirror_phases_;
    double first_bs_phase_;
    double final_bs_phase_;
};

/// Density-matrix evolution of one atom through the whole sequence
/// (including the final beamsplitter at seq.final_bs_phase).
inline DensityMatrix lindblad_propagate(const DensityMatrix& rho0, const SequenceSpec& seq,
                                        const AtomSample& sample, double rabi_nominal,
                                        double decay_rate) {
    LindbladEngine engine(seq, rabi_nominal * sample.rabi_scale, sample.detuning, decay_rate);
    return engine.propagate(rho0);
}

/// Coherent reference: compose the closed-form unitaries and exact free
/// evolution segment by segment (used for Gamma = 0 cross-checks and the
/// ideal-pulse limit).
inline DensityMatrix unitary_compose_propagate(const DensityMatrix& rho0, const SequenceSpec& seq,
                                               double rabi, double detuning,
                                               double final_bs_extra = 0.0) {
    DensityMatrix rho = rho0;
    for (const auto& seg : sequence_segments(seq, final_bs_extra)) {
        if (seg.is_pulse) {
            TwoLevelUnitary u = unitary_pulse(PulseParams(rabi, detuning, seg.phase, seg.duration, 0.0));
            rho = (u * rho * u.adjoint()).eval();
        } else {
            rho = free_evolution(rho, seg.duration, 0.0, detuning);
        }
    }
    return rho;
}

} // namespace rai
