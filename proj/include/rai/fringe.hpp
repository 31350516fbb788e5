#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rai/ensemble.hpp"
#include "rai/jump.hpp"
#include "rai/lindblad.hpp"
#include "rai/parallel.hpp"
#include "rai/phase.hpp"
#include "rai/rng.hpp"

namespace rai {

enum class EngineKind { lindblad, jump };

/// Knobs shared by every fringe-producing run.
struct ScanParams {
    int n_points = 24;                     // final-beamsplitter phases per scan
    EngineKind engine = EngineKind::lindblad;
    int n_trajectories = 4000;             // jump engine only
    std::uint64_t seed = 1;                // trajectory seeds and scan noise
    double noise_sigma = 0.0;              // additive Gaussian noise per P_e point

    void validate() const {
        if (n_points < 5) throw std::invalid_argument("ScanParams: need at least 5 scan points");
        if (engine == EngineKind::jump && n_trajectories < 1)
            throw std::invalid_argument("ScanParams: jump engine needs a trajectory count");
        if (noise_sigma < 0.0) throw std::invalid_argument("ScanParams: negative noise sigma");
    }
};

struct FringePoint {
    double phi_b; // scan phase, relative to seq.final_bs_phase
    double p_e;
};

/// Fitted fringe P_e = offset + (v/2) cos(dphi + phi_b) with standard errors
/// from the linear-model covariance.
struct FringeResult {
    double visibility = 0.0;
    double phase = 0.0;
    double offset = 0.0;
    double visibility_err = 0.0;
    double phase_err = 0.0;
    double offset_err = 0.0;
    double residual_rms = 0.0;
    bool degenerate = false; // zero-visibility fit; phase undefined
};

/// Excited-state population vs final-beamsplitter phase over a uniform
/// [0, 2pi) grid, ensemble-averaged. Deterministic given (params.seed).
inline std::vector<FringePoint> fringe_scan(const SequenceSpec& seq, const Ensemble& ensemble,
                                            const ScanParams& params) {
    params.validate();
    const int np = params.n_points;
    std::vector<double> grid(static_cast<std::size_t>(np));
    for (int k = 0; k < np; ++k) grid[static_cast<std::size_t>(k)] = two_pi * k / np;

    const std::size_t n_atoms = ensemble.samples.size();
    std::vector<double> acc(static_cast<std::size_t>(np), 0.0);

    if (params.engine == EngineKind::lindblad) {
        // per-atom rows, reduced in index order afterwards
        std::vector<std::vector<double>> rows(n_atoms);
        parallel_for(n_atoms, [&](std::size_t ai) {
            const auto& atom = ensemble.samples[ai];
            LindbladEngine engine(seq, ensemble.rabi_nominal * atom.rabi_scale, atom.detuning,
                                  ensemble.decay_rate);
            LindbladState train = engine.propagate_train(to_lindblad_state(ground_density()));
            auto& row = rows[ai];
            row.resize(static_cast<std::size_t>(np));
            for (int k = 0; k < np; ++k) {
                LindbladState v = engine.apply_final_bs(train, grid[static_cast<std::size_t>(k)]);
                row[static_cast<std::size_t>(k)] = atom.weight * v[3];
            }
        });
        for (const auto& row : rows)
            for (int k = 0; k < np; ++k) acc[static_cast<std::size_t>(k)] += row[static_cast<std::size_t>(k)];
    } else {
        const int nt = params.n_trajectories;
        // Trajectory t reruns with the same derived seed for every phi_b, so
        // the Monte-Carlo noise is common across the fringe.
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(nt));
        // one engine per atom, shared across trajectories
        std::vector<JumpEngine> engines;
        engines.reserve(n_atoms);
        for (const auto& atom : ensemble.samples)
            engines.emplace_back(seq, ensemble.rabi_nominal * atom.rabi_scale, atom.detuning,
                                 ensemble.decay_rate);
        parallel_for(static_cast<std::size_t>(nt), [&](std::size_t t) {
            const std::size_t ai = t % n_atoms;
            auto& row = rows[t];
            row.resize(static_cast<std::size_t>(np));
            const std::uint64_t seed_t = derive_seed(params.seed, t);
            for (int k = 0; k < np; ++k) {
                Rng rng(seed_t);
                JumpResult res = engines[ai].run(rng, grid[static_cast<std::size_t>(k)]);
                row[static_cast<std::size_t>(k)] = std::norm(res.state[1]);
            }
        });
        for (const auto& row : rows)
            for (int k = 0; k < np; ++k) acc[static_cast<std::size_t>(k)] += row[static_cast<std::size_t>(k)];
        for (auto& v : acc) v /= static_cast<double>(nt);
    }

    if (params.noise_sigma > 0.0) {
        Rng noise(derive_seed(params.seed, 0x6e6f697365ULL));
        for (auto& v : acc) v += params.noise_sigma * noise.normal();
    }

    std::vector<FringePoint> out(static_cast<std::size_t>(np));
    for (int k = 0; k < np; ++k)
        out[static_cast<std::size_t>(k)] = {grid[static_cast<std::size_t>(k)], acc[static_cast<std::size_t>(k)]};
    return out;
}

/// Least-squares fit of a scan to a + b cos(phi) + c sin(phi); visibility
/// v = 2 sqrt(b^2 + c^2) and phase dphi = atan2(-c, b) so the model reads
/// (1/2)(1 + v cos(dphi + phi_b)) when a = 1/2.
inline FringeResult fit_fringe(const std::vector<FringePoint>& scan) {
    const int n = static_cast<int>(scan.size());
    if (n < 5) throw std::invalid_argument("fit_fringe: need at least 5 points");
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::cos(scan[static_cast<std::size_t>(i)].phi_b);
        x(i, 2) = std::sin(scan[static_cast<std::size_t>(i)].phi_b);
        y(i) = scan[static_cast<std::size_t>(i)].p_e;
    }
    Eigen::Matrix3d xtx = x.transpose() * x;
    if (std::abs(xtx.determinant()) < 1e-9 * std::pow(static_cast<double>(n), 3))
        throw std::invalid_argument("fit_fringe: degenerate design matrix (scan phases do not span a fringe)");
    Eigen::Matrix3d cov_unit = xtx.inverse();
    Eigen::Vector3d beta = cov_unit * (x.transpose() * y);
    Eigen::VectorXd resid = y - x * beta;
    const double rss = resid.squaredNorm();
    const double sigma2 = rss / std::max(1, n - 3);
    Eigen::Matrix3d cov = sigma2 * cov_unit;

    const double a = beta(0), b = beta(1), c = beta(2);
    const double r2 = b * b + c * c;
    const double r = std::sqrt(r2);

    FringeResult res;
    res.offset = a;
    res.offset_err = std::sqrt(cov(0, 0));
    res.visibility = 2.0 * r;
    res.residual_rms = std::sqrt(rss / n);
    if (r2 < 1e-28) {
        res.degenerate = true;
        res.phase = 0.0;
        res.phase_err = std::numeric_limits<double>::infinity();
        res.visibility_err = 2.0 * std::sqrt(0.5 * (cov(1, 1) + cov(2, 2)));
        return res;
    }
    res.phase = std::atan2(-c, b);
    const double dv_db = 2.0 * b / r, dv_dc = 2.0 * c / r;
    res.visibility_err = std::sqrt(std::max(0.0, dv_db * dv_db * cov(1, 1) + dv_dc * dv_dc * cov(2, 2) +
                                                     2.0 * dv_db * dv_dc * cov(1, 2)));
    const double dp_db = c / r2, dp_dc = -b / r2;
    res.phase_err = std::sqrt(std::max(0.0, dp_db * dp_db * cov(1, 1) + dp_dc * dp_dc * cov(2, 2) +
                                                2.0 * dp_db * dp_dc * cov(1, 2)));
    return res;
}

inline FringeResult measure_fringe(const SequenceSpec& seq, const Ensemble& ensemble,
                                   const ScanParams& params) {
    return fit_fringe(fringe_scan(seq, ensemble, params));
}

/// Fringe fit per loop count (each loop count must be a multiple of N).
inline std::vector<std::pair<int, FringeResult>> visibility_vs_loops(
    const PhaseTuple& base, const std::vector<int>& loop_list, const TimingSpec& timing,
    const Ensemble& ensemble, const ScanParams& params) {
    std::vector<std::pair<int, FringeResult>> out;
    out.reserve(loop_list.size());
    for (int loops : loop_list) {
        const SequenceSpec seq = build_sequence(base, loops, timing, 0.0);
        out.emplace_back(loops, measure_fringe(seq, ensemble, params));
    }
    return out;
}

/// Closed-form estimate of the spontaneous-emission visibility limit,
/// exp(-Gamma L T / 2): the atom spends about half the sequence excited.
inline double se_visibility_limit_closed_form(int loops, const TimingSpec& timing,
                                              double decay_rate) {
    return std::exp(-0.5 * decay_rate * loops * timing.period());
}

/// Operational spontaneous-emission limit: single resonant atom, ideal atom
/// optics (exact-area operations applied at their pulse centers with exact
/// decay maps in between), fitted visibility. The limit is set by the
/// excited-state lifetime alone; with finite drive durations the driven
/// coherence damps faster than Gamma/2 and the OBE visibility falls below
/// this curve.
inline double se_visibility_limit(int loops, const TimingSpec& timing, double decay_rate,
                                  int n_points = 24) {
    const SequenceSpec seq = build_sequence(PhaseTuple({0.0}), loops, timing, 0.0);
    std::vector<double> event_times;
    event_times.reserve(static_cast<std::size_t>(loops) + 2);
    event_times.push_back(0.5 * timing.beamsplitter_duration);
    for (int i = 0; i < loops; ++i) event_times.push_back(seq.mirror_pulse_time(i));
    event_times.push_back(seq.total_duration() - 0.5 * timing.beamsplitter_duration);
    const auto rotation = [](double area, double phase) {
        return unitary_pulse(PulseParams(area, 0.0, phase, 1.0, 0.0));
    };
    std::vector<FringePoint> scan;
    scan.reserve(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k) {
        const double phi_b = two_pi * k / n_points;
        DensityMatrix rho = ground_density();
        double t = 0.0;
        for (std::size_t e = 0; e < event_times.size(); ++e) {
            rho = free_evolution(rho, event_times[e] - t, decay_rate);
            t = event_times[e];
            const bool is_first = e == 0;
            const bool is_last = e + 1 == event_times.size();
            const double area = (is_first || is_last) ? 0.5 * std::numbers::pi : std::numbers::pi;
            const TwoLevelUnitary u = rotation(area, is_last ? phi_b : 0.0);
            rho = (u * rho * u.adjoint()).eval();
        }
        scan.push_back({phi_b, excited_population(rho)});
    }
    return fit_fringe(scan).visibility;
}

enum class RobustnessAxis { detuning, rabi };

struct RobustnessPoint {
    double offset;             // in units of the nominal Rabi frequency
    FringeResult fringe;       // raw fit
    double normalized_visibility = 0.0; // v / max(v) over the scan
};

/// Common detuning or Rabi-frequency error applied to the whole ensemble;
/// visibility reported normalized to its maximum over the scan.
inline std::vector<RobustnessPoint> robustness_scan(const SequenceSpec& seq,
                                                    const Ensemble& ensemble, RobustnessAxis axis,
                                                    const std::vector<double>& offsets,
                                                    const ScanParams& params) {
    for (double x : offsets)
        if (std::abs(x) > 0.2)
            throw std::invalid_argument("robustness_scan: offsets limited to +-0.2 of the Rabi frequency");
    std::vector<RobustnessPoint> out;
    out.reserve(offsets.size());
    for (double x : offsets) {
        Ensemble mod = ensemble;
        if (axis == RobustnessAxis::detuning) {
            for (auto& a : mod.samples) a.detuning += x * ensemble.rabi_nominal;
        } else {
            mod.rabi_nominal = ensemble.rabi_nominal * (1.0 + x);
        }
        out.push_back({x, measure_fringe(seq, mod, params), 0.0});
    }
    double vmax = 0.0;
    for (const auto& p : out) vmax = std::max(vmax, p.fringe.visibility);
    for (auto& p : out) p.normalized_visibility = vmax > 0.0 ? p.fringe.visibility / vmax : 0.0;
    return out;
}

} // namespace rai
