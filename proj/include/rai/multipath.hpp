#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "rai/constants.hpp"
#include "rai/sequence.hpp"

namespace rai {

// Semi-classical multipath model. Internal state and momentum are locked by
// the single-photon transition, so between pulses every excited path advances
// one site on the relative-position lattice of spacing d0 = v_recoil * T
// while ground paths stand still. Each transfer imprints the local laser
// phase +-(phi_i - k x); paths landing on the same (internal, site) merge by
// complex addition.

/// Laser phase advance per lattice site, k * d0.
inline double recoil_phase_per_site(const TimingSpec& timing) {
    return laser_wavenumber * recoil_velocity * timing.period();
}

struct PathState {
    int internal = 0; // 0 = ground, 1 = excited
    int pos_index = 0;
    std::complex<double> amplitude{0.0, 0.0};
};

/// Merged set of paths after some pulse, stored densely by lattice site.
struct PathSet {
    std::array<std::vector<std::complex<double>>, 2> amps; // [internal][site]
    int pulse_index = 0; // number of mirror pulses applied so far

    double total_probability() const {
        double p = 0.0;
        for (const auto& row : amps)
            for (const auto& a : row) p += std::norm(a);
        return p;
    }

    int key_count() const {
        int n = 0;
        for (const auto& row : amps)
            for (const auto& a : row)
                if (a != std::complex<double>(0.0, 0.0)) ++n;
        return n;
    }

    std::vector<PathState> paths() const {
        std::vector<PathState> out;
        for (int s = 0; s < 2; ++s)
            for (std::size_t m = 0; m < amps[s].size(); ++m)
                if (amps[s][m] != std::complex<double>(0.0, 0.0))
                    out.push_back({s, static_cast<int>(m), amps[s][m]});
        return out;
    }
};

/// Spread-cost configuration: stray population at lattice distance d from the
/// nearer central arm is charged |a|^2 d^alpha, averaged over the pulse-error
/// samples below when scoring a sequence.
struct CostSpec {
    double weight_exponent = 2.0;
    double prune_threshold = 1e-12;
    std::vector<std::pair<double, double>> error_samples = {
        {0.15, -0.1}, {0.15, 0.0}, {0.15, 0.1},
        {0.2048, -0.1}, {0.2048, 0.0}, {0.2048, 0.1},
        {0.25, -0.1}, {0.25, 0.0}, {0.25, 0.1}};

    void validate() const {
        if (weight_exponent < 0.0) throw std::invalid_argument("CostSpec: weight_exponent must be >= 0");
        if (prune_threshold < 0.0 || prune_threshold > 1e-6)
            throw std::invalid_argument("CostSpec: prune_threshold must be in [0, 1e-6]");
        if (error_samples.empty()) throw std::invalid_argument("CostSpec: needs error samples");
    }
};

namespace detail {

struct PathPulse {
    std::complex<double> stay_g;   // g -> g
    std::complex<double> stay_e;   // e -> e
    std::complex<double> trans_ge; // g -> e, before e^{+i(phi - k x)}
};

/// Two-level amplitudes of a pulse of area pi(1+eps) at detuning ratio
/// delta/Omega_nominal; tau scales out.
inline PathPulse path_pulse_amplitudes(double area, double detuning_ratio) {
    const double omega = area; // tau = 1
    const double delta = detuning_ratio * std::numbers::pi;
    const double wgen = std::hypot(omega, delta);
    const double half = 0.5 * wgen;
    const double c = std::cos(half), s = std::sin(half);
    PathPulse p;
    p.stay_g = std::complex<double>(c, wgen > 0.0 ? delta / wgen * s : 0.0);
    p.stay_e = std::conj(p.stay_g);
    p.trans_ge = std::complex<double>(0.0, wgen > 0.0 ? -omega / wgen * s : 0.0);
    return p;
}

inline void apply_path_pulse(PathSet& set, const PathPulse& p, double phase, double recoil_phase,
                             double prune_threshold) {
    const std::size_t span = set.amps[0].size();
    std::array<std::vector<std::complex<double>>, 2> next;
    next[0].assign(span, {0.0, 0.0});
    next[1].assign(span, {0.0, 0.0});
    for (std::size_t m = 0; m < span; ++m) {
        const double chi = phase - recoil_phase * static_cast<double>(m);
        const std::complex<double> up(std::cos(chi), std::sin(chi));
        const std::complex<double> ag = set.amps[0][m];
        const std::complex<double> ae = set.amps[1][m];
        if (ag != std::complex<double>(0.0, 0.0)) {
            next[0][m] += ag * p.stay_g;
            next[1][m] += ag * p.trans_ge * up;
        }
        if (ae != std::complex<double>(0.0, 0.0)) {
            next[1][m] += ae * p.stay_e;
            next[0][m] += ae * p.trans_ge * std::conj(up);
        }
    }
    if (prune_threshold > 0.0)
        for (auto& row : next)
            for (auto& a : row)
                if (std::norm(a) < prune_threshold) a = {0.0, 0.0};
    set.amps = std::move(next);
}

/// Excited paths advance one site; arrays grow by one slot.
inline void advance_paths(PathSet& set) {
    const std::size_t span = set.amps[0].size();
    set.amps[0].resize(span + 1, {0.0, 0.0});
    std::vector<std::complex<double>> moved(span + 1, {0.0, 0.0});
    for (std::size_t m = 0; m < span; ++m) moved[m + 1] = set.amps[1][m];
    set.amps[1] = std::move(moved);
}

} // namespace detail

/// Propagate the merged path set through the mirror train of seq with pulse
/// area pi(1 + area_error) and detuning detuning_ratio * Omega_nominal,
/// returning one snapshot after each mirror pulse. The initial beamsplitter
/// splits the atom into equal-weight (ground, 0) and (excited, 0) paths.
inline std::vector<PathSet> propagate_paths(const SequenceSpec& seq, double area_error,
                                            double detuning_ratio,
                                            const CostSpec& cost = CostSpec{}) {
    cost.validate();
    const double recoil = recoil_phase_per_site(seq.timing);
    const auto phases = expanded_phases(seq);
    const auto mirror = detail::path_pulse_amplitudes(std::numbers::pi * (1.0 + area_error),
                                                      detuning_ratio);
    // ideal pi/2 beamsplitter
    PathSet set;
    set.amps[0].assign(1, {0.0, 0.0});
    set.amps[1].assign(1, {0.0, 0.0});
    {
        const double inv = 1.0 / std::numbers::sqrt2;
        const std::complex<double> up(std::cos(seq.first_bs_phase), std::sin(seq.first_bs_phase));
        set.amps[0][0] = inv;
        set.amps[1][0] = std::complex<double>(0.0, -inv) * up;
    }
    std::vector<PathSet> snapshots;
    snapshots.reserve(static_cast<std::size_t>(seq.loops));
    for (int i = 0; i < seq.loops; ++i) {
        detail::advance_paths(set);
        detail::apply_path_pulse(set, mirror, phases[static_cast<std::size_t>(i)], recoil,
                                 cost.prune_threshold);
        set.pulse_index = i + 1;
        snapshots.push_back(set);
    }
    return snapshots;
}

/// Lattice positions of the two perfect-pulse arms after each mirror pulse:
/// arm A starts ground, arm B starts excited; an arm advances whenever it was
/// excited over the preceding interval.
inline std::pair<std::vector<int>, std::vector<int>> central_arms(const SequenceSpec& seq) {
    std::vector<int> a(static_cast<std::size_t>(seq.loops));
    std::vector<int> b(static_cast<std::size_t>(seq.loops));
    for (int p = 1; p <= seq.loops; ++p) {
        a[static_cast<std::size_t>(p - 1)] = p / 2;
        b[static_cast<std::size_t>(p - 1)] = (p + 1) / 2;
    }
    return {std::move(a), std::move(b)};
}

/// Population-weighted stray-distance cost over all snapshots. On-arm paths
/// (distance 0) are free for every exponent.
inline double spread_cost(const std::vector<PathSet>& snapshots, const CostSpec& cost) {
    cost.validate();
    double c = 0.0;
    for (const auto& snap : snapshots) {
        const int p = snap.pulse_index;
        const int arm_a = p / 2;
        const int arm_b = (p + 1) / 2;
        for (const auto& row : snap.amps) {
            for (std::size_t m = 0; m < row.size(); ++m) {
                const double q = std::norm(row[m]);
                if (q == 0.0) continue;
                const int mi = static_cast<int>(m);
                const int d = std::min(std::abs(mi - arm_a), std::abs(mi - arm_b));
                if (d > 0) c += q * std::pow(static_cast<double>(d), cost.weight_exponent);
            }
        }
    }
    return c;
}

/// Spread cost of a candidate tuple averaged over the error samples.
inline double sequence_cost(const PhaseTuple& base, int loops, const TimingSpec& timing,
                            const CostSpec& cost) {
    cost.validate();
    const SequenceSpec seq = build_sequence(base, loops, timing, 0.0);
    double acc = 0.0;
    for (const auto& [eps, ratio] : cost.error_samples)
        acc += spread_cost(propagate_paths(seq, eps, ratio, cost), cost);
    return acc / static_cast<double>(cost.error_samples.size());
}

/// Close the interferometer in the path picture: advance once more, apply an
/// ideal pi/2 beamsplitter at phase final_bs_phase + phi, and return the
/// excited-state population for each phi on a uniform [0, 2pi) grid.
inline std::vector<std::pair<double, double>> path_fringe(const SequenceSpec& seq,
                                                          double area_error, double detuning_ratio,
                                                          int n_points,
                                                          const CostSpec& cost = CostSpec{}) {
    if (n_points < 5) throw std::invalid_argument("path_fringe: need at least 5 points");
    auto snapshots = propagate_paths(seq, area_error, detuning_ratio, cost);
    PathSet set = snapshots.empty() ? PathSet{} : snapshots.back();
    if (snapshots.empty()) {
        // Ramsey limit: just the two post-beamsplitter paths
        const double inv = 1.0 / std::numbers::sqrt2;
        const std::complex<double> up(std::cos(seq.first_bs_phase), std::sin(seq.first_bs_phase));
        set.amps[0].assign(1, inv);
        set.amps[1].assign(1, std::complex<double>(0.0, -inv) * up);
    }
    detail::advance_paths(set);
    const double recoil = recoil_phase_per_site(seq.timing);
    const double inv = 1.0 / std::numbers::sqrt2;
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k) {
        const double phi = two_pi * k / n_points;
        const double bs_phase = seq.final_bs_phase + phi;
        double pe = 0.0;
        const std::size_t span = set.amps[0].size();
        for (std::size_t m = 0; m < span; ++m) {
            const double chi = bs_phase - recoil * static_cast<double>(m);
            const std::complex<double> up(std::cos(chi), std::sin(chi));
            const std::complex<double> amp_e =
                set.amps[1][m] * inv + set.amps[0][m] * std::complex<double>(0.0, -inv) * up;
            pe += std::norm(amp_e);
        }
        out.emplace_back(phi, pe);
    }
    return out;
}

} // namespace rai
