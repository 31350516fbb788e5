#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rai/density.hpp"
#include "rai/fringe.hpp"
#include "rai/jump.hpp"
#include "rai/lindblad.hpp"
#include "rai/parallel.hpp"
#include "rai/phase.hpp"
#include "rai/sequence.hpp"

namespace rai {

// Spurious-interference diagnostics. Atoms that spontaneously decay during a
// pulse re-emerge into a coherent superposition for the remainder of the
// pulse, with the laser phase imprinted; repeating phase patterns can make
// these re-emergent coherences add up across pulses into an interference
// signal that barely responds to the injected signal of interest.

struct BlochTracePoint {
    double u = 0.0; // 2 Re rho_ge of the decayed subensemble
    double v = 0.0; // 2 Im rho_ge
    double w = 0.0; // rho_ee - rho_gg
    double decayed_fraction = 0.0;

    double transverse() const { return std::hypot(u, v); }
};

struct BlochTrace {
    std::vector<BlochTracePoint> points; // one entry per mirror pulse
};

/// Monte-Carlo decayed-subensemble trace: run quantum-jump trajectories over
/// the ensemble and, after each mirror pulse, average the projectors of the
/// trajectories that have decayed so far. Pulses where nothing has decayed
/// yet report zeros.
inline BlochTrace decayed_bloch_trace(const SequenceSpec& seq, const Ensemble& ensemble,
                                      int n_trajectories, std::uint64_t seed) {
    if (n_trajectories < 1000)
        throw std::invalid_argument("decayed_bloch_trace: need at least 1000 trajectories");
    const std::size_t n_atoms = ensemble.samples.size();
    std::vector<JumpEngine> engines;
    engines.reserve(n_atoms);
    for (const auto& atom : ensemble.samples)
        engines.emplace_back(seq, ensemble.rabi_nominal * atom.rabi_scale, atom.detuning,
                             ensemble.decay_rate);

    const std::size_t n_pulses = static_cast<std::size_t>(seq.loops);
    struct Acc {
        std::vector<double> u, v, w;
        std::vector<std::int64_t> count;
    };
    const std::size_t n_chunks = std::min<std::size_t>(64, static_cast<std::size_t>(n_trajectories));
    std::vector<Acc> chunks(n_chunks);
    for (auto& c : chunks) {
        c.u.assign(n_pulses, 0.0);
        c.v.assign(n_pulses, 0.0);
        c.w.assign(n_pulses, 0.0);
        c.count.assign(n_pulses, 0);
    }
    const std::size_t per_chunk =
        (static_cast<std::size_t>(n_trajectories) + n_chunks - 1) / n_chunks;
    parallel_for(n_chunks, [&](std::size_t ci) {
        auto& acc = chunks[ci];
        const std::size_t lo = ci * per_chunk;
        const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(n_trajectories),
                                                     lo + per_chunk);
        for (std::size_t t = lo; t < hi; ++t) {
            Rng rng(derive_seed(seed, t));
            engines[t % n_atoms].run_observed(
                rng, 0.0, [&](int pulse, const Eigen::Vector2cd& psi, bool decayed) {
                    if (!decayed) return;
                    const std::size_t p = static_cast<std::size_t>(pulse);
                    const std::complex<double> rho_ge = psi[0] * std::conj(psi[1]);
                    acc.u[p] += 2.0 * rho_ge.real();
                    acc.v[p] += 2.0 * rho_ge.imag();
                    acc.w[p] += std::norm(psi[1]) - std::norm(psi[0]);
                    acc.count[p] += 1;
                });
        }
    });

    BlochTrace trace;
    trace.points.resize(n_pulses);
    for (std::size_t p = 0; p < n_pulses; ++p) {
        double su = 0.0, sv = 0.0, sw = 0.0;
        std::int64_t cnt = 0;
        for (const auto& c : chunks) {
            su += c.u[p];
            sv += c.v[p];
            sw += c.w[p];
            cnt += c.count[p];
        }
        auto& pt = trace.points[p];
        pt.decayed_fraction = static_cast<double>(cnt) / n_trajectories;
        if (cnt > 0) {
            pt.u = su / cnt;
            pt.v = sv / cnt;
            pt.w = sw / cnt;
        }
    }
    return trace;
}

/// Exact decayed-subensemble trace: rho_decayed = rho_lindblad - |psi~><psi~|
/// with psi~ the unnormalized no-jump state, ensemble-averaged. This is the
/// deterministic limit of decayed_bloch_trace.
inline BlochTrace decayed_bloch_trace_exact(const SequenceSpec& seq, const Ensemble& ensemble) {
    const std::size_t n_pulses = static_cast<std::size_t>(seq.loops);
    const std::size_t n_atoms = ensemble.samples.size();
    struct Row {
        std::vector<double> u, v, w, frac;
    };
    std::vector<Row> rows(n_atoms);
    parallel_for(n_atoms, [&](std::size_t ai) {
        const auto& atom = ensemble.samples[ai];
        const double rabi = ensemble.rabi_nominal * atom.rabi_scale;
        LindbladEngine lind(seq, rabi, atom.detuning, ensemble.decay_rate);
        JumpEngine jump(seq, rabi, atom.detuning, ensemble.decay_rate);
        std::vector<DensityMatrix> lind_snaps(n_pulses);
        lind.propagate_train_observed(to_lindblad_state(ground_density()),
                                      [&](int pulse, const LindbladState& v) {
                                          lind_snaps[static_cast<std::size_t>(pulse)] =
                                              from_lindblad_state(v);
                                      });
        auto& row = rows[ai];
        row.u.assign(n_pulses, 0.0);
        row.v.assign(n_pulses, 0.0);
        row.w.assign(n_pulses, 0.0);
        row.frac.assign(n_pulses, 0.0);
        jump.no_jump_observed(0.0, [&](int pulse, const Eigen::Vector2cd& psi) {
            const std::size_t p = static_cast<std::size_t>(pulse);
            DensityMatrix dec = lind_snaps[p] - density_from_state(psi);
            const double wgt = atom.weight;
            row.u[p] = wgt * 2.0 * dec(0, 1).real();
            row.v[p] = wgt * 2.0 * dec(0, 1).imag();
            row.w[p] = wgt * (dec(1, 1).real() - dec(0, 0).real());
            row.frac[p] = wgt * (dec(0, 0).real() + dec(1, 1).real());
        });
    });
    BlochTrace trace;
    trace.points.resize(n_pulses);
    for (std::size_t p = 0; p < n_pulses; ++p) {
        double su = 0.0, sv = 0.0, sw = 0.0, sf = 0.0;
        for (const auto& row : rows) {
            su += row.u[p];
            sv += row.v[p];
            sw += row.w[p];
            sf += row.frac[p];
        }
        auto& pt = trace.points[p];
        pt.decayed_fraction = sf;
        if (sf > 0.0) {
            pt.u = su / sf;
            pt.v = sv / sf;
            pt.w = sw / sf;
        }
    }
    return trace;
}

struct ConstraintCheck {
    bool satisfied = false;
    double residual = 0.0; // max pattern violation, rad
};

/// Check an 8-phase tuple against the decay-symmetry pattern
/// phi1, phi2, phi2+pi, phi1+pi, phi1+pi, phi2+pi, phi2, phi1.
inline ConstraintCheck cumulative_phase_check(const PhaseTuple& base, double tolerance = 1e-9) {
    if (base.size() != 8)
        throw std::invalid_argument("cumulative_phase_check: pattern is defined for 8 phases");
    const PhaseTuple pattern = constrained_expand(base[0], base[1]);
    double residual = 0.0;
    for (int k = 0; k < 8; ++k)
        residual = std::max(residual, circular_distance(base[k], pattern[k]));
    return {residual <= tolerance, residual};
}

struct SignaturePoint {
    double delta_phi = 0.0;
    double visibility = 0.0;
    double visibility_err = 0.0;
    double phase_shift = 0.0; // relative to the delta_phi = 0 run
    double phase_shift_err = 0.0;
};

/// Visibility and phase shift vs resonant signal amplitude with the jump
/// engine. All amplitudes share one seed stream (paired trajectories), so
/// the zero-signal reference phase cancels the Monte-Carlo noise common to
/// the runs.
inline std::vector<SignaturePoint> spurious_signature(const PhaseTuple& base, int loops,
                                                      const std::vector<double>& delta_phis,
                                                      const TimingSpec& timing,
                                                      const Ensemble& ensemble, int n_trajectories,
                                                      std::uint64_t seed) {
    const SequenceSpec seq0 = build_sequence(base, loops, timing, 0.0);
    const double omega = two_pi * timing.resonance_frequency();
    ScanParams params;
    params.engine = EngineKind::jump;
    params.n_trajectories = n_trajectories;
    params.seed = seed;
    const FringeResult ref = measure_fringe(seq0, ensemble, params);
    std::vector<SignaturePoint> out;
    out.reserve(delta_phis.size());
    for (double dp : delta_phis) {
        const FringeResult fr =
            dp == 0.0 ? ref
                      : measure_fringe(inject_signal(seq0, dp, omega, 0.5 * std::numbers::pi),
                                       ensemble, params);
        SignaturePoint pt;
        pt.delta_phi = dp;
        pt.visibility = fr.visibility;
        pt.visibility_err = fr.visibility_err;
        pt.phase_shift = wrap_pm_pi(fr.phase - ref.phase);
        pt.phase_shift_err = std::hypot(fr.phase_err, ref.phase_err);
        out.push_back(pt);
    }
    return out;
}

} // namespace rai
