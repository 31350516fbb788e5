#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rai/ensemble.hpp"
#include "rai/program.hpp"
#include "rai/pulse.hpp"
#include "rai/rng.hpp"

namespace rai {

/// Spontaneous-emission history of one quantum-jump trajectory.
struct JumpRecord {
    bool decayed = false;
    std::vector<double> decay_times; // absolute times within the sequence, increasing
};

struct JumpResult {
    Eigen::Vector2cd state; // normalized final state
    JumpRecord record;
};

/// Quantum-jump (Monte Carlo wavefunction) engine: the state evolves under
/// H_eff = H - i hbar Gamma |e><e|/2; when the squared norm crosses a uniform
/// threshold the atom is reset to |g> at the crossing time and the threshold
/// is redrawn. The ensemble average over seeds converges to the Lindblad
/// solution; unlike the density-matrix route, each trajectory knows whether
/// and when it decayed.
class JumpEngine {
public:
    JumpEngine(const SequenceSpec& seq, double rabi, double detuning, double decay_rate)
        : rabi_(rabi), detuning_(detuning), decay_rate_(decay_rate), seq_(seq) {
        seq.timing.validate();
        pulse_full_ = effective_pulse_propagator(
            PulseParams(rabi, detuning, 0.0, seq.timing.pi_duration, decay_rate));
        bs_full_ = effective_pulse_propagator(
            PulseParams(rabi, detuning, 0.0, seq.timing.beamsplitter_duration, decay_rate));
        segments_ = sequence_segments(seq, 0.0);
    }

    /// Run one trajectory. final_bs_extra is added to the final beamsplitter
    /// phase; obs(mirror_index, normalized_state, decayed_so_far) fires after
    /// each mirror pulse.
    template <typename Obs>
    JumpResult run_observed(Rng& rng, double final_bs_extra, Obs&& obs) const {
        Eigen::Vector2cd psi(1.0, 0.0);
        JumpRecord rec;
        double threshold = rng.uniform01();
        double t0 = 0.0; // segment start time
        for (const auto& seg : segments_) {
            double phase = seg.phase;
            if (!seg.is_mirror && seg.is_pulse && &seg == &segments_.back())
                phase = wrap_two_pi(seg.phase + final_bs_extra);
            if (seg.is_pulse)
                run_pulse(psi, seg, phase, t0, threshold, rec, rng);
            else
                run_delay(psi, seg.duration, t0, threshold, rec, rng);
            if (seg.is_mirror) {
                Eigen::Vector2cd snap = psi.normalized();
                obs(seg.mirror_index, snap, rec.decayed);
            }
            t0 += seg.duration;
        }
        return JumpResult{psi.normalized(), std::move(rec)};
    }

    JumpResult run(Rng& rng, double final_bs_extra = 0.0) const {
        return run_observed(rng, final_bs_extra, [](int, const Eigen::Vector2cd&, bool) {});
    }

    /// Deterministic no-jump branch: propagate under H_eff without ever
    /// resetting. The returned and observed states are unnormalized; their
    /// squared norm is the never-decayed probability, and rho_lindblad minus
    /// |psi~><psi~| is exactly the decayed-subensemble density matrix.
    template <typename Obs>
    Eigen::Vector2cd no_jump_observed(double final_bs_extra, Obs&& obs) const {
        Eigen::Vector2cd psi(1.0, 0.0);
        for (const auto& seg : segments_) {
            double phase = seg.phase;
            if (!seg.is_mirror && seg.is_pulse && &seg == &segments_.back())
                phase = wrap_two_pi(seg.phase + final_bs_extra);
            if (seg.is_pulse) {
                const std::complex<double> tw(std::cos(phase), std::sin(phase));
                psi[1] *= std::conj(tw);
                psi = (seg.is_mirror ? pulse_full_ : bs_full_) * psi;
                psi[1] *= tw;
            } else {
                apply_delay_phases(psi, seg.duration);
            }
            if (seg.is_mirror) obs(seg.mirror_index, psi);
        }
        return psi;
    }

private:
    Eigen::Matrix2cd pulse_propagator(double duration, bool full_mirror) const {
        if (full_mirror) return pulse_full_;
        return effective_pulse_propagator(PulseParams(rabi_, detuning_, 0.0, duration, decay_rate_));
    }

    void run_pulse(Eigen::Vector2cd& psi, const Segment& seg, double phase, double seg_start,
                   double& threshold, JumpRecord& rec, Rng& rng) const {
        // Work in the frame rotated by the pulse phase; |g> is unchanged by
        // the rotation so jump resets are frame-independent.
        const std::complex<double> tw(std::cos(phase), std::sin(phase));
        psi[1] *= std::conj(tw);
        double remaining = seg.duration;
        double elapsed = 0.0;
        while (remaining > 0.0) {
            const bool full = seg.is_mirror && remaining == seg.duration;
            Eigen::Matrix2cd m = full ? pulse_full_
                                      : (remaining == seq_.timing.beamsplitter_duration && !seg.is_mirror
                                             ? bs_full_
                                             : pulse_propagator(remaining, false));
            Eigen::Vector2cd end = m * psi;
            if (end.squaredNorm() >= threshold) {
                psi = end;
                break;
            }
            // Jump inside this stretch: bisect ||M(t) psi||^2 = threshold
            // (monotone in t, decay only removes norm).
            double lo = 0.0, hi = remaining;
            for (int it = 0; it < 64; ++it) {
                const double mid = 0.5 * (lo + hi);
                Eigen::Vector2cd trial =
                    effective_pulse_propagator(PulseParams(rabi_, detuning_, 0.0, mid, decay_rate_)) * psi;
                if (trial.squaredNorm() >= threshold)
                    lo = mid;
                else
                    hi = mid;
            }
            const double tjump = 0.5 * (lo + hi);
            rec.decayed = true;
            rec.decay_times.push_back(seg_start + elapsed + tjump);
            psi = Eigen::Vector2cd(1.0, 0.0);
            threshold = rng.uniform01();
            elapsed += tjump;
            remaining -= tjump;
        }
        psi[1] *= tw;
    }

    void run_delay(Eigen::Vector2cd& psi, double duration, double seg_start, double& threshold,
                   JumpRecord& rec, Rng& rng) const {
        double remaining = duration;
        double elapsed = 0.0;
        while (remaining > 0.0) {
            const double pg = std::norm(psi[0]);
            const double pe = std::norm(psi[1]);
            const double end_norm = pg + pe * std::exp(-decay_rate_ * remaining);
            if (end_norm >= threshold) {
                apply_delay_phases(psi, remaining);
                break;
            }
            const double tjump = std::log(pe / (threshold - pg)) / decay_rate_;
            rec.decayed = true;
            rec.decay_times.push_back(seg_start + elapsed + tjump);
            psi = Eigen::Vector2cd(1.0, 0.0);
            threshold = rng.uniform01();
            elapsed += tjump;
            remaining -= tjump;
        }
    }

    void apply_delay_phases(Eigen::Vector2cd& psi, double t) const {
        const double half = 0.5 * detuning_ * t;
        psi[0] *= std::complex<double>(std::cos(half), std::sin(half));
        psi[1] *= std::complex<double>(std::cos(half), -std::sin(half));
        psi[1] *= std::exp(-0.5 * decay_rate_ * t);
    }

    double rabi_;
    double detuning_;
    double decay_rate_;
    SequenceSpec seq_;
    Eigen::Matrix2cd pulse_full_;
    Eigen::Matrix2cd bs_full_;
    std::vector<Segment> segments_;
};

/// One quantum-jump trajectory through the full sequence (final beamsplitter
/// at seq.final_bs_phase), reproducible given the seed.
inline JumpResult jump_trajectory(const SequenceSpec& seq, const AtomSample& sample,
                                  double rabi_nominal, double decay_rate, std::uint64_t seed) {
    JumpEngine engine(seq, rabi_nominal * sample.rabi_scale, sample.detuning, decay_rate);
    Rng rng(seed);
    return engine.run(rng);
}

} // namespace rai
