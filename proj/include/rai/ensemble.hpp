#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rai/constants.hpp"
#include "rai/rng.hpp"
#include "rai/sequence.hpp"

namespace rai {

/// One atom drawn from the thermal cloud: an absolute Doppler detuning and
/// the local Rabi-frequency scale set by its position in the Gaussian beam.
struct AtomSample {
    double detuning = 0.0;   // rad/s
    double rabi_scale = 1.0; // Omega_local / Omega_nominal, in (0, 1]
    double weight = 1.0;     // ensemble weights sum to 1
};

struct EnsembleSpec {
    int n_samples = 256;
    double doppler_sigma_over_rabi = 0.1; // Doppler spread / nominal Rabi
    double waist_over_cloud = 3.0;        // beam waist / cloud sigma
    double rabi_nominal = 0.0;            // rad/s; 0 = pi / pi_duration
    std::uint64_t seed = 1;

    void validate() const {
        if (n_samples < 1) throw std::invalid_argument("EnsembleSpec: n_samples must be >= 1");
        if (doppler_sigma_over_rabi < 0.0 || waist_over_cloud <= 0.0)
            throw std::invalid_argument("EnsembleSpec: parameters must be positive");
    }
};

/// Atom samples plus the beam/transition context the engines need.
struct Ensemble {
    std::vector<AtomSample> samples;
    double rabi_nominal = 0.0; // calibrated beam-center Rabi frequency, rad/s
    double decay_rate = default_decay_rate;
    double calibration = 1.0;  // factor applied to the raw nominal Rabi
};

/// Ground-state transfer probability of a single square pulse (coherent
/// two-level formula).
inline double pulse_transfer_probability(double rabi, double detuning, double duration) {
    const double wgen = std::hypot(rabi, detuning);
    if (wgen == 0.0) return 0.0;
    const double s = std::sin(0.5 * wgen * duration);
    return (rabi * rabi) / (wgen * wgen) * s * s;
}

/// Draw the raw (uncalibrated) thermal ensemble. Doppler detunings are
/// Normal(0, ratio * Omega0); the transverse radius is a 2D Gaussian with
/// sigma = waist / waist_over_cloud and the local Rabi scale is the beam's
/// field amplitude exp(-r^2 / w^2). Deterministic given the seed.
inline std::vector<AtomSample> sample_ensemble(const EnsembleSpec& spec, const TimingSpec& timing) {
    spec.validate();
    const double rabi0 = spec.rabi_nominal > 0.0 ? spec.rabi_nominal
                                                 : std::numbers::pi / timing.pi_duration;
    Rng rng(spec.seed);
    std::vector<AtomSample> out(static_cast<std::size_t>(spec.n_samples));
    const double w = 1.0 / spec.n_samples;
    const double sigma_r = 1.0 / spec.waist_over_cloud; // in units of the waist
    for (auto& a : out) {
        a.detuning = spec.doppler_sigma_over_rabi * rabi0 * rng.normal();
        const double x = sigma_r * rng.normal();
        const double y = sigma_r * rng.normal();
        a.rabi_scale = std::exp(-(x * x + y * y)); // exp(-r^2/w^2), r, w in waist units
        a.weight = w;
    }
    return out;
}

/// Ensemble-mean single-pi-pulse transfer at a given scale factor applied to
/// the nominal Rabi frequency, with Doppler detunings co-scaled (the sampled
/// delta/Omega ratios are properties of the cloud, not of the beam power).
inline double mean_pi_transfer(const std::vector<AtomSample>& samples, double rabi0,
                               double scale, const TimingSpec& timing) {
    double acc = 0.0;
    for (const auto& a : samples)
        acc += a.weight * pulse_transfer_probability(scale * rabi0 * a.rabi_scale,
                                                     scale * a.detuning, timing.pi_duration);
    return acc;
}

/// Themal ensemble with the beam-center Rabi frequency calibrated by
/// bisection so the ensemble-mean single-pi transfer hits the target
/// (default 0.900, the pulse efficiency regime of interest). Detunings
/// co-scale so the Doppler-spread/Rabi ratio is preserved.
inline Ensemble make_thermal_ensemble(const EnsembleSpec& spec, const TimingSpec& timing,
                                      double decay_rate = default_decay_rate,
                                      double target_transfer = 0.9) {
    Ensemble e;
    e.samples = sample_ensemble(spec, timing);
    e.decay_rate = decay_rate;
    const double rabi0 = spec.rabi_nominal > 0.0 ? spec.rabi_nominal
                                                 : std::numbers::pi / timing.pi_duration;
    // Bracket the crossing nearest scale = 1, then bisect.
    const double lo_scan = 0.5, hi_scan = 2.5;
    const int steps = 200;
    double best_lo = -1.0, best_hi = -1.0, best_dist = 1e300;
    double prev_s = lo_scan;
    double prev_f = mean_pi_transfer(e.samples, rabi0, prev_s, timing) - target_transfer;
    for (int i = 1; i <= steps; ++i) {
        const double s = lo_scan + (hi_scan - lo_scan) * i / steps;
        const double f = mean_pi_transfer(e.samples, rabi0, s, timing) - target_transfer;
        if (prev_f == 0.0 || prev_f * f < 0.0) {
            const double mid = 0.5 * (prev_s + s);
            if (std::abs(mid - 1.0) < best_dist) {
                best_dist = std::abs(mid - 1.0);
                best_lo = prev_s;
                best_hi = s;
            }
        }
        prev_s = s;
        prev_f = f;
    }
    if (best_lo < 0.0)
        throw std::runtime_error("make_thermal_ensemble: calibration target not bracketed");
    double lo = best_lo, hi = best_hi;
    double flo = mean_pi_transfer(e.samples, rabi0, lo, timing) - target_transfer;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = mean_pi_transfer(e.samples, rabi0, mid, timing) - target_transfer;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    e.calibration = 0.5 * (lo + hi);
    e.rabi_nominal = e.calibration * rabi0;
    for (auto& a : e.samples) a.detuning *= e.calibration;
    return e;
}

/// Single ideal atom: resonant, beam center, exact pi-pulse area.
inline Ensemble ideal_ensemble(const TimingSpec& timing, double decay_rate = 0.0) {
    Ensemble e;
    e.samples = {AtomSample{0.0, 1.0, 1.0}};
    e.rabi_nominal = std::numbers::pi / timing.pi_duration;
    e.decay_rate = decay_rate;
    return e;
}

} // namespace rai
