#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rai/constants.hpp"
#include "rai/phase.hpp"

namespace rai {

/// Pulse timing of the interferometer program. The mirror-pulse period is
/// T = pi_duration + deadtime; the resonant signal frequency is
/// f_R = 1/(2T) (sign of the per-pulse sensitivity alternates, so maximal
/// response comes from a signal that flips sign between consecutive pulses).
struct TimingSpec {
    double pi_duration = 80e-9;            // s
    double deadtime = 80e-9;               // s
    double beamsplitter_duration = 40e-9;  // s, pi/2 area at nominal Rabi

    double period() const { return pi_duration + deadtime; }
    double resonance_frequency() const { return 1.0 / (2.0 * period()); }

    void validate() const {
        if (pi_duration <= 0.0 || deadtime <= 0.0 || beamsplitter_duration <= 0.0)
            throw std::invalid_argument("TimingSpec: all durations must be > 0");
    }
};

/// Ordered list of N base phases, each stored in [0, 2pi).
struct PhaseTuple {
    std::vector<double> values;

    PhaseTuple() = default;
    explicit PhaseTuple(std::vector<double> v) : values(std::move(v)) {
        if (values.empty()) throw std::invalid_argument("PhaseTuple: needs at least one phase");
        for (auto& p : values) p = wrap_two_pi(p);
    }

    int size() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

/// Oscillating laser-phase signal delta_phi * sin(omega (t_i - t_1) + theta0)
/// added to the i-th mirror pulse. Time is referenced to the first
/// mirror-pulse center so that theta0 = pi/2 gives the alternating +,-,+,...
/// pattern on resonance regardless of the lead-in timing.
struct SignalSpec {
    double amplitude = 0.0; // rad
    double omega = 0.0;     // rad/s
    double theta0 = 0.0;    // rad
};

/// Full interferometer program: pi/2 beamsplitter (phase first_bs_phase),
/// L mirror pi pulses with cyclically repeated base phases, pi/2 beamsplitter
/// (phase final_bs_phase). Mirror pulse i (1-based) is centered at
/// t_i = bs_duration + deadtime + (i-1) T + pi_duration/2.
struct SequenceSpec {
    PhaseTuple base_phases;
    int loops = 0; // L, multiple of N (0 = Ramsey, beamsplitters only)
    TimingSpec timing;
    double final_bs_phase = 0.0;
    double first_bs_phase = 0.0;
    std::optional<SignalSpec> signal;
    std::optional<int> quantize_bits;

    /// Center time of 0-based mirror pulse i.
    double mirror_pulse_time(int i) const {
        return timing.beamsplitter_duration + timing.deadtime + i * timing.period() +
               0.5 * timing.pi_duration;
    }

    double total_duration() const {
        return 2.0 * timing.beamsplitter_duration + timing.deadtime +
               loops * timing.period();
    }
};

inline SequenceSpec build_sequence(const PhaseTuple& base, int loops, const TimingSpec& timing,
                                   double final_bs_phase) {
    timing.validate();
    if (loops < 0) throw std::invalid_argument("build_sequence: negative loop count");
    if (loops % base.size() != 0)
        throw std::invalid_argument("build_sequence: base phase count must divide loops");
    SequenceSpec seq;
    seq.base_phases = base;
    seq.loops = loops;
    seq.timing = timing;
    seq.final_bs_phase = wrap_two_pi(final_bs_phase);
    return seq;
}

/// Universally robust (UR-N) dynamical-decoupling phases,
///   phi_k = (k-1)(k-2)/2 * Phi + (k-1) phi2,
/// with Phi(4m) = pi/m and Phi(4m+2) = 2m pi/(2m+1), each entry shifted by
/// global_offset. The rational part of phi_k is reduced mod 2pi in integer
/// arithmetic to keep the results at a few ulp.
inline PhaseTuple ur_n_phases(int n, double phi2, double global_offset = 0.0) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("ur_n_phases: n must be even and >= 2");
    // Phi = 2pi p/q
    std::int64_t p, q;
    if (n % 4 == 0) {
        p = 1;
        q = n / 2; // pi/m = 2pi/(2m), m = n/4
    } else {
        std::int64_t m = (n - 2) / 4;
        p = m;
        q = 2 * m + 1;
    }
    std::vector<double> phases(static_cast<std::size_t>(n));
    for (std::int64_t k = 1; k <= n; ++k) {
        std::int64_t tri = (k - 1) * (k - 2) / 2;
        std::int64_t r = (tri * p) % q;
        double rational = two_pi * static_cast<double>(r) / static_cast<double>(q);
        phases[static_cast<std::size_t>(k - 1)] =
            wrap_two_pi(rational + static_cast<double>(k - 1) * phi2 + global_offset);
    }
    return PhaseTuple(std::move(phases));
}

/// The 8-pulse pattern phi1, phi2, phi2+pi, phi1+pi, phi1+pi, phi2+pi, phi2,
/// phi1 that makes the phase distribution of decayed atoms average to zero.
inline PhaseTuple constrained_expand(double phi1, double phi2) {
    const double pi = std::numbers::pi;
    return PhaseTuple({phi1, phi2, phi2 + pi, phi1 + pi, phi1 + pi, phi2 + pi, phi2, phi1});
}

/// Round a phase to the nearest multiple of 2pi/2^bits (DDS phase word);
/// exact half-LSB ties round toward zero.
inline double quantize_phase_dds(double phi, int bits) {
    if (bits < 1 || bits > 32) throw std::invalid_argument("quantize_phase_dds: bits must be in [1, 32]");
    const double lsb = two_pi / std::ldexp(1.0, bits);
    const double q = phi / lsb;
    double r = std::round(q);
    if (std::abs(r - q) == 0.5) r = std::trunc(q);
    return r * lsb;
}

/// Add an oscillating phase signal to the mirror pulses of a sequence.
inline SequenceSpec inject_signal(const SequenceSpec& seq, double amplitude, double omega,
                                  double theta0) {
    if (seq.signal) throw std::invalid_argument("inject_signal: sequence already carries a signal");
    SequenceSpec out = seq;
    out.signal = SignalSpec{amplitude, omega, theta0};
    return out;
}

/// The L mirror-pulse phases actually commanded: cyclically repeated base
/// phases plus the signal if present. With quantize_bits set, the base phase
/// and the per-pulse signal contribution are each rounded to the DDS lattice
/// before being summed (the signal rides on the statically programmed base
/// word). Entries are wrapped to [0, 2pi).
inline std::vector<double> expanded_phases(const SequenceSpec& seq) {
    const int n = seq.base_phases.size();
    std::vector<double> out(static_cast<std::size_t>(seq.loops));
    const double t1 = seq.loops > 0 ? seq.mirror_pulse_time(0) : 0.0;
    for (int i = 0; i < seq.loops; ++i) {
        double phi = seq.base_phases[i % n];
        if (seq.quantize_bits) phi = quantize_phase_dds(phi, *seq.quantize_bits);
        if (seq.signal && seq.signal->amplitude != 0.0) {
            const double t = seq.mirror_pulse_time(i) - t1;
            double s = seq.signal->amplitude * std::sin(seq.signal->omega * t + seq.signal->theta0);
            if (seq.quantize_bits) s = quantize_phase_dds(s, *seq.quantize_bits);
            phi += s;
        }
        out[static_cast<std::size_t>(i)] = wrap_two_pi(phi);
    }
    return out;
}

} // namespace rai
