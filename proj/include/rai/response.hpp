#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rai/fringe.hpp"
#include "rai/sequence.hpp"

namespace rai {

// Oscillating-signal response measurements. The injected signal is
// delta_phi * sin(omega (t_i - t_1) + pi/2); on resonance (omega = 2 pi f_R)
// it alternates +delta_phi, -delta_phi, ... across the mirror pulses, which
// matches the alternating arm-exchange sensitivity and yields the maximal
// phase response 2 L delta_phi.

inline constexpr double signal_theta0 = 0.5 * std::numbers::pi;

namespace detail {

/// Fitted fringe phases for a list of signal amplitudes (always including a
/// zero-amplitude reference), unwrapped by nearest-branch continuation from
/// the reference. Returns pairs (delta_phi, unwrapped phase shift).
struct PhaseResponse {
    std::vector<std::pair<double, double>> shifts;
    std::vector<double> phase_errs;
    bool unwrap_ambiguous = false;
};

inline PhaseResponse phase_vs_amplitude(const PhaseTuple& base, int loops, const TimingSpec& timing,
                                        double omega, const std::vector<double>& delta_phis,
                                        const Ensemble& ensemble, const ScanParams& params) {
    const SequenceSpec seq0 = build_sequence(base, loops, timing, 0.0);
    const FringeResult ref = measure_fringe(seq0, ensemble, params);
    PhaseResponse out;
    out.shifts.reserve(delta_phis.size());
    double prev = 0.0;
    for (double dp : delta_phis) {
        FringeResult fr = dp == 0.0
                              ? ref
                              : measure_fringe(inject_signal(seq0, dp, omega, signal_theta0),
                                               ensemble, params);
        const double step = wrap_pm_pi(fr.phase - ref.phase - prev);
        if (std::abs(step) > 0.5 * std::numbers::pi) out.unwrap_ambiguous = true;
        const double shift = prev + step;
        out.shifts.emplace_back(dp, shift);
        out.phase_errs.push_back(fr.phase_err);
        prev = shift;
    }
    return out;
}

} // namespace detail

struct AmplificationResult {
    double slope = 0.0;     // d(dphi)/d(delta_phi), dimensionless
    double slope_err = 0.0;
    bool unwrap_ambiguous = false;
    std::vector<std::pair<double, double>> points; // (delta_phi, phase shift)
};

/// Resonant phase-amplification slope: fit the fringe per signal amplitude,
/// unwrap against the zero-amplitude reference, and fit a line through the
/// origin. Perfect pulses give slope 2L. Amplitudes should be ordered and
/// keep |2 L delta_phi| well inside one fringe branch.
inline AmplificationResult measure_amplification(const PhaseTuple& base, int loops,
                                                 const std::vector<double>& delta_phis,
                                                 const TimingSpec& timing, const Ensemble& ensemble,
                                                 const ScanParams& params) {
    if (delta_phis.empty()) throw std::invalid_argument("measure_amplification: no amplitudes");
    const double omega = two_pi * timing.resonance_frequency();
    auto resp = detail::phase_vs_amplitude(base, loops, timing, omega, delta_phis, ensemble, params);
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [dp, shift] : resp.shifts) {
        sxy += dp * shift;
        sxx += dp * dp;
    }
    if (sxx == 0.0) throw std::invalid_argument("measure_amplification: needs a nonzero amplitude");
    AmplificationResult out;
    out.slope = sxy / sxx;
    double rss = 0.0;
    int m = 0;
    for (const auto& [dp, shift] : resp.shifts) {
        if (dp == 0.0) continue;
        const double e = shift - out.slope * dp;
        rss += e * e;
        ++m;
    }
    out.slope_err = m > 1 ? std::sqrt(rss / (m - 1) / sxx) : 0.0;
    out.unwrap_ambiguous = resp.unwrap_ambiguous;
    out.points = std::move(resp.shifts);
    return out;
}

struct ResponseCurve {
    std::vector<std::pair<double, double>> points; // (delta_f Hz, signed response)
    double resonance_hz = 0.0;
    int loops = 0;
};

/// Phase response vs signal-frequency offset, self-normalized to the
/// resonant response (signed; side lobes go negative).
inline ResponseCurve response_vs_offset(const PhaseTuple& base, int loops, double delta_phi,
                                        const std::vector<double>& offsets_hz,
                                        const TimingSpec& timing, const Ensemble& ensemble,
                                        const ScanParams& params) {
    const double f_r = timing.resonance_frequency();
    const SequenceSpec seq0 = build_sequence(base, loops, timing, 0.0);
    const FringeResult ref = measure_fringe(seq0, ensemble, params);
    const auto shift_at = [&](double freq_hz) {
        const SequenceSpec seq = inject_signal(seq0, delta_phi, two_pi * freq_hz, signal_theta0);
        return wrap_pm_pi(measure_fringe(seq, ensemble, params).phase - ref.phase);
    };
    const double at_res = shift_at(f_r);
    if (at_res == 0.0) throw std::runtime_error("response_vs_offset: vanishing resonant response");
    ResponseCurve out;
    out.resonance_hz = f_r;
    out.loops = loops;
    out.points.reserve(offsets_hz.size());
    for (double df : offsets_hz) out.points.emplace_back(df, shift_at(f_r + df) / at_res);
    return out;
}

/// Ideal-pulse response function sampled at the pulse centers,
/// H(omega) = (1/L) sum_i (-1)^{i-1} sin(omega (i-1) T + pi/2);
/// H(2 pi f_R) = 1 and H(0) = 0 for even L.
inline double analytic_response(int loops, const TimingSpec& timing, double omega) {
    if (loops < 1) throw std::invalid_argument("analytic_response: loops must be >= 1");
    const double t = timing.period();
    double acc = 0.0;
    double sign = 1.0;
    for (int i = 0; i < loops; ++i) {
        acc += sign * std::sin(omega * t * i + signal_theta0);
        sign = -sign;
    }
    return acc / loops;
}

/// Full width at half maximum of the main response lobe by bisection on the
/// analytic or measured curve values (grid must bracket the half crossing).
inline double response_fwhm(const std::vector<std::pair<double, double>>& points) {
    // points: (delta_f, signed response), assumed to include delta_f = 0 with
    // response 1 and to extend past the first 0.5 crossing on both sides.
    double left = 0.0, right = 0.0;
    bool have_left = false, have_right = false;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& [x0, y0] = points[i - 1];
        const auto& [x1, y1] = points[i];
        if (!(x0 < x1)) continue;
        if ((y0 - 0.5) * (y1 - 0.5) <= 0.0 && y0 != y1) {
            const double xc = x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0);
            if (x1 <= 0.0 && !have_left) {
                left = xc;
                have_left = true;
            } else if (x0 >= 0.0 && !have_right) {
                right = xc;
                have_right = true;
            }
        }
    }
    if (!have_left || !have_right)
        throw std::invalid_argument("response_fwhm: grid does not bracket the half-maximum crossings");
    return right - left;
}

struct StaircasePoint {
    double commanded = 0.0; // requested signal amplitude, rad
    double measured = 0.0;  // fringe phase shift, rad
    double expected = 0.0;  // 2 L * quantized amplitude
};

/// Staircase induced by DDS phase quantization: the commanded oscillating
/// amplitude is applied through a bits-deep phase word, so the measured
/// amplified phase moves in plateaus separated by 2L * (2pi/2^bits).
inline std::vector<StaircasePoint> dds_staircase(const PhaseTuple& base, int loops,
                                                 const std::vector<double>& commanded, int bits,
                                                 const TimingSpec& timing, const Ensemble& ensemble,
                                                 const ScanParams& params) {
    const double omega = two_pi * timing.resonance_frequency();
    SequenceSpec seq0 = build_sequence(base, loops, timing, 0.0);
    seq0.quantize_bits = bits;
    const FringeResult ref = measure_fringe(seq0, ensemble, params);
    std::vector<StaircasePoint> out;
    out.reserve(commanded.size());
    double prev = 0.0;
    for (double dp : commanded) {
        const FringeResult fr =
            dp == 0.0 ? ref
                      : measure_fringe(inject_signal(seq0, dp, omega, signal_theta0), ensemble, params);
        const double shift = prev + wrap_pm_pi(fr.phase - ref.phase - prev);
        out.push_back({dp, shift, 2.0 * loops * quantize_phase_dds(dp, bits)});
        prev = shift;
    }
    return out;
}

} // namespace rai
