#pragma once

#include <vector>

#include "rai/sequence.hpp"

namespace rai {

/// One piecewise-constant segment of the pulse program. Pulses use the
/// atom's local Rabi frequency; delays have no drive.
struct Segment {
    bool is_pulse = false;
    bool is_mirror = false;
    int mirror_index = -1; // 0-based when is_mirror
    double duration = 0.0;
    double phase = 0.0;    // commanded laser phase (signal/quantization applied)
};

/// Expand a sequence into its segment list:
/// BS1, deadtime, L x (mirror pulse, deadtime), BS2.
/// final_bs_extra is added to the final beamsplitter phase (fringe scans).
inline std::vector<Segment> sequence_segments(const SequenceSpec& seq, double final_bs_extra = 0.0) {
    std::vector<Segment> segs;
    segs.reserve(static_cast<std::size_t>(2 * seq.loops + 3));
    const auto& t = seq.timing;
    segs.push_back({true, false, -1, t.beamsplitter_duration, wrap_two_pi(seq.first_bs_phase)});
    segs.push_back({false, false, -1, t.deadtime, 0.0});
    const auto phases = expanded_phases(seq);
    for (int i = 0; i < seq.loops; ++i) {
        segs.push_back({true, true, i, t.pi_duration, phases[static_cast<std::size_t>(i)]});
        segs.push_back({false, false, -1, t.deadtime, 0.0});
    }
    segs.push_back({true, false, -1, t.beamsplitter_duration,
                    wrap_two_pi(seq.final_bs_phase + final_bs_extra)});
    return segs;
}

} // namespace rai
