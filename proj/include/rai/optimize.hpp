#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rai/fringe.hpp"
#include "rai/multipath.hpp"
#include "rai/parallel.hpp"
#include "rai/phase.hpp"
#include "rai/rng.hpp"
#include "rai/se_analysis.hpp"
#include "rai/sequence.hpp"

namespace rai {

enum class OptimizeMode { discrete_pi_over_8, continuous };

struct OptimizerConfig {
    int n_phases = 8;
    int loops = 64;
    OptimizeMode mode = OptimizeMode::discrete_pi_over_8;
    int max_evals = 20000;
    std::uint64_t seed = 1;
    int restarts = 16;

    void validate() const {
        if (n_phases != 4 && n_phases != 8 && n_phases != 16)
            throw std::invalid_argument("OptimizerConfig: n_phases must be 4, 8 or 16");
        if (loops < n_phases || loops % n_phases != 0)
            throw std::invalid_argument("OptimizerConfig: n_phases must divide loops");
        if (max_evals < 1) throw std::invalid_argument("OptimizerConfig: max_evals must be >= 1");
        if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts must be >= 1");
    }
};

struct EvalRecord {
    int index = 0;
    std::vector<double> phases;
    double value = 0.0;
};

struct OpenLoopResult {
    PhaseTuple tuple;
    double cost = 0.0;
    std::vector<EvalRecord> log;
    std::string flag; // empty on clean convergence
};

namespace detail {

class CostEvaluator {
public:
    CostEvaluator(const OptimizerConfig& cfg, const CostSpec& cost, const TimingSpec& timing)
        : cfg_(cfg), cost_(cost), timing_(timing) {}

    bool exhausted() const { return evals_ >= cfg_.max_evals; }
    int evals() const { return evals_; }
    std::vector<EvalRecord>& log() { return log_; }

    /// Cost of a discrete tuple (grid indices 0..15), memoized; only fresh
    /// evaluations consume budget.
    double discrete(const std::vector<int>& key) {
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::vector<double> phases(key.size());
        for (std::size_t j = 0; j < key.size(); ++j)
            phases[j] = key[j] * (std::numbers::pi / 8.0);
        const double c = continuous(phases);
        memo_.emplace(key, c);
        return c;
    }

    double continuous(const std::vector<double>& phases) {
        ++evals_;
        const double c = sequence_cost(PhaseTuple(phases), cfg_.loops, timing_, cost_);
        log_.push_back({evals_, phases, c});
        return c;
    }

private:
    const OptimizerConfig& cfg_;
    const CostSpec& cost_;
    const TimingSpec& timing_;
    int evals_ = 0;
    std::map<std::vector<int>, double> memo_;
    std::vector<EvalRecord> log_;
};

} // namespace detail

/// Shift a tuple by the global offset that puts its first phase in [0, pi/4).
inline PhaseTuple canonicalize_tuple(const PhaseTuple& tuple) {
    const double quarter = 0.25 * std::numbers::pi;
    const double offset = quarter * std::floor(tuple[0] / quarter);
    std::vector<double> out(static_cast<std::size_t>(tuple.size()));
    for (int j = 0; j < tuple.size(); ++j) out[static_cast<std::size_t>(j)] = tuple[j] - offset;
    return PhaseTuple(std::move(out));
}

/// Open-loop phase optimization: minimize the trajectory-spread cost over N
/// base phases. Discrete mode restricts phases to multiples of pi/8 and runs
/// multi-start cyclic coordinate descent to a fixed point; continuous mode
/// refines the discrete optimum with a compass pattern search. Deterministic
/// given (seed, config).
inline OpenLoopResult open_loop_optimize(const OptimizerConfig& cfg, const CostSpec& cost,
                                         const TimingSpec& timing) {
    cfg.validate();
    cost.validate();
    detail::CostEvaluator eval(cfg, cost, timing);
    const int n = cfg.n_phases;

    std::vector<int> best_key(static_cast<std::size_t>(n), 0);
    double best_cost = eval.discrete(best_key);
    OpenLoopResult result;
    if (best_cost == 0.0) {
        result.tuple = canonicalize_tuple(PhaseTuple(std::vector<double>(n, 0.0)));
        result.cost = 0.0;
        result.flag = "degenerate objective";
        result.log = std::move(eval.log());
        return result;
    }

    bool budget_out = false;
    for (int r = 0; r < cfg.restarts && !budget_out; ++r) {
        std::vector<int> key(static_cast<std::size_t>(n), 0);
        if (r > 0) {
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
            for (auto& k : key) k = static_cast<int>(rng.next_u64() % 16);
        }
        double cur = eval.discrete(key);
        if (cur < best_cost) {
            best_cost = cur;
            best_key = key;
        }
        bool changed = true;
        while (changed && !budget_out) {
            changed = false;
            for (int j = 0; j < n && !budget_out; ++j) {
                int arg = key[static_cast<std::size_t>(j)];
                double local = cur;
                for (int k = 0; k < 16; ++k) {
                    if (k == key[static_cast<std::size_t>(j)]) continue;
                    if (eval.exhausted()) {
                        budget_out = true;
                        break;
                    }
                    std::vector<int> cand = key;
                    cand[static_cast<std::size_t>(j)] = k;
                    const double c = eval.discrete(cand);
                    if (c < local) {
                        local = c;
                        arg = k;
                    }
                }
                if (arg != key[static_cast<std::size_t>(j)]) {
                    key[static_cast<std::size_t>(j)] = arg;
                    cur = local;
                    changed = true;
                    if (cur < best_cost) {
                        best_cost = cur;
                        best_key = key;
                    }
                }
            }
        }
    }

    std::vector<double> best(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) best[static_cast<std::size_t>(j)] = best_key[static_cast<std::size_t>(j)] * (std::numbers::pi / 8.0);

    if (cfg.mode == OptimizeMode::continuous && !budget_out) {
        double step = std::numbers::pi / 16.0;
        while (step > 1e-4 && !budget_out) {
            bool improved = false;
            for (int j = 0; j < n && !budget_out; ++j) {
                for (double dir : {1.0, -1.0}) {
                    if (eval.exhausted()) {
                        budget_out = true;
                        break;
                    }
                    std::vector<double> cand = best;
                    cand[static_cast<std::size_t>(j)] = wrap_two_pi(cand[static_cast<std::size_t>(j)] + dir * step);
                    const double c = eval.continuous(cand);
                    if (c < best_cost) {
                        best_cost = c;
                        best = cand;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
    }

    // Canonical gauge: first phase in [0, pi/4). The shift can move the cost
    // slightly (the first beamsplitter phase stays fixed), so keep the found
    // tuple if the canonical image scores worse.
    PhaseTuple found(best);
    PhaseTuple canon = canonicalize_tuple(found);
    double canon_cost = sequence_cost(canon, cfg.loops, timing, cost);
    if (canon_cost <= best_cost * (1.0 + 1e-9)) {
        result.tuple = canon;
        result.cost = canon_cost;
    } else {
        result.tuple = found;
        result.cost = best_cost;
        result.flag = "canonicalization skipped: gauge-shifted cost is worse";
    }
    if (budget_out) result.flag = "budget exhausted";
    result.log = std::move(eval.log());
    return result;
}

// ---------------------------------------------------------------------------
// Closed-loop optimization against a simulated noisy experiment
// ---------------------------------------------------------------------------

struct FitnessSample {
    double phi1 = 0.0;
    double phi2 = 0.0;
    double fitness = 0.0;
    double visibility = 0.0;
    double phase0 = 0.0; // fitted phase without applied signal
    int n_scans = 1;
    bool degenerate = false;
};

/// Everything a simulated closed-loop evaluation needs besides (phi1, phi2).
struct ExperimentContext {
    Ensemble ensemble;
    TimingSpec timing;
    int n_points = 24;
    EngineKind engine = EngineKind::lindblad;
    int n_trajectories = 4000;
    int n_scans = 1; // fringe scans averaged per evaluation
};

/// One simulated experiment: expand (phi1, phi2) through the decay-symmetry
/// pattern, run fringe scans with additive Gaussian noise, and score
/// f = v cos^4(dphi0 / 2).
inline FitnessSample simulated_experiment(double phi1, double phi2, int loops, double noise_sigma,
                                          std::uint64_t seed, const ExperimentContext& ctx) {
    if (noise_sigma < 0.0) throw std::invalid_argument("simulated_experiment: negative noise sigma");
    const PhaseTuple base = constrained_expand(phi1, phi2);
    const SequenceSpec seq = build_sequence(base, loops, ctx.timing, 0.0);
    ScanParams params;
    params.n_points = ctx.n_points;
    params.engine = ctx.engine;
    params.n_trajectories = ctx.n_trajectories;
    params.noise_sigma = noise_sigma;

    FitnessSample out;
    out.phi1 = wrap_two_pi(phi1);
    out.phi2 = wrap_two_pi(phi2);
    out.n_scans = std::max(1, ctx.n_scans);

    double v_acc = 0.0;
    double cos_acc = 0.0, sin_acc = 0.0;
    int good = 0;
    for (int s = 0; s < out.n_scans; ++s) {
        params.seed = derive_seed(seed, static_cast<std::uint64_t>(s));
        const FringeResult fr = measure_fringe(seq, ctx.ensemble, params);
        if (fr.degenerate) continue;
        v_acc += fr.visibility;
        cos_acc += std::cos(fr.phase);
        sin_acc += std::sin(fr.phase);
        ++good;
    }
    if (good == 0) {
        out.degenerate = true;
        out.fitness = 0.0;
        return out;
    }
    out.visibility = v_acc / good;
    out.phase0 = std::atan2(sin_acc, cos_acc);
    const double c = std::cos(0.5 * out.phase0);
    out.fitness = out.visibility * c * c * c * c;
    return out;
}

struct ClosedLoopResult {
    FitnessSample best;
    std::vector<FitnessSample> trajectory; // every evaluation, in order
    std::string flag;
};

/// Derivative-free fitness ascent on the (phi1, phi2) torus: compass pattern
/// search with geometric step shrink, using only simulated_experiment
/// evaluations.
inline ClosedLoopResult closed_loop_optimize(double start_phi1, double start_phi2, int loops,
                                             double noise_sigma, int max_evals, std::uint64_t seed,
                                             const ExperimentContext& ctx) {
    if (max_evals < 20) throw std::invalid_argument("closed_loop_optimize: max_evals must be >= 20");
    ClosedLoopResult result;
    int evals = 0;
    const auto eval_at = [&](double p1, double p2) {
        FitnessSample s = simulated_experiment(p1, p2, loops, noise_sigma,
                                               derive_seed(seed, static_cast<std::uint64_t>(evals)), ctx);
        ++evals;
        result.trajectory.push_back(s);
        return s;
    };

    FitnessSample center = eval_at(start_phi1, start_phi2);
    double step = std::numbers::pi / 8.0;
    const double min_step = std::numbers::pi / 128.0;
    while (step >= min_step) {
        if (evals + 4 > max_evals) {
            result.flag = "budget exhausted";
            break;
        }
        const double p1 = center.phi1, p2 = center.phi2;
        FitnessSample probes[4] = {
            eval_at(p1 + step, p2), eval_at(p1 - step, p2),
            eval_at(p1, p2 + step), eval_at(p1, p2 - step)};
        const FitnessSample* best_probe = &probes[0];
        for (const auto& p : probes)
            if (p.fitness > best_probe->fitness) best_probe = &p;
        if (best_probe->fitness > center.fitness)
            center = *best_probe;
        else
            step *= 0.5;
    }
    result.best = center;
    return result;
}

struct Landscape {
    int n = 0;              // cells per axis
    double resolution = 0.0; // rad
    std::vector<double> values; // row-major fitness, phi1 = i * resolution

    double at(int i, int j) const {
        const int ii = ((i % n) + n) % n;
        const int jj = ((j % n) + n) % n;
        return values[static_cast<std::size_t>(ii * n + jj)];
    }

    std::pair<double, double> argmax() const {
        int bi = 0, bj = 0;
        double best = values[0];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (at(i, j) > best) {
                    best = at(i, j);
                    bi = i;
                    bj = j;
                }
        return {bi * resolution, bj * resolution};
    }
};

/// Fitness over the full (phi1, phi2) torus at the given grid resolution.
inline Landscape landscape_scan(int loops, double resolution, double noise_sigma,
                                std::uint64_t seed, const ExperimentContext& ctx) {
    const double cells = two_pi / resolution;
    const int n = static_cast<int>(std::lround(cells));
    if (n < 1 || std::abs(cells - n) > 1e-9)
        throw std::invalid_argument("landscape_scan: resolution must divide 2pi");
    Landscape ls;
    ls.n = n;
    ls.resolution = resolution;
    ls.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    parallel_for(ls.values.size(), [&](std::size_t cell) {
        const int i = static_cast<int>(cell) / n;
        const int j = static_cast<int>(cell) % n;
        ls.values[cell] = simulated_experiment(i * resolution, j * resolution, loops, noise_sigma,
                                               derive_seed(seed, cell), ctx)
                              .fitness;
    });
    return ls;
}

} // namespace rai
