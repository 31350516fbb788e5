#include <catch2/catch_amalgamated.hpp>

#include "rai/se_analysis.hpp"

using Catch::Approx;
using namespace rai;

namespace {
const PhaseTuple paper_tuple = constrained_expand(3 * std::numbers::pi / 8, 7 * std::numbers::pi / 8);
const PhaseTuple alternating_8 = PhaseTuple({0.5 * std::numbers::pi, 1.5 * std::numbers::pi,
                                             0.5 * std::numbers::pi, 1.5 * std::numbers::pi,
                                             0.5 * std::numbers::pi, 1.5 * std::numbers::pi,
                                             0.5 * std::numbers::pi, 1.5 * std::numbers::pi});
} // namespace

TEST_CASE("cumulative phase constraint check") {
    SECTION("the optimized tuple satisfies the pattern exactly") {
        const auto res = cumulative_phase_check(paper_tuple);
        CHECK(res.satisfied);
        CHECK(res.residual < 1e-12);
    }
    SECTION("the alternating tuple violates it") {
        const auto res = cumulative_phase_check(alternating_8);
        CHECK_FALSE(res.satisfied);
        CHECK(res.residual > 1.0); // phi_3 should be phi_2 + pi but equals phi_1
    }
    SECTION("a tuple built from the pattern passes by construction") {
        const auto res = cumulative_phase_check(PhaseTuple({0.0, 0.0, std::numbers::pi,
                                                            std::numbers::pi, std::numbers::pi,
                                                            std::numbers::pi, 0.0, 0.0}));
        CHECK(res.satisfied);
        CHECK(res.residual < 1e-12);
    }
    SECTION("every constrained expansion passes on a 16x16 grid") {
        for (int i = 0; i < 16; ++i)
            for (int j = 0; j < 16; ++j) {
                const double a = two_pi * i / 16.0;
                const double b = two_pi * j / 16.0;
                CHECK(cumulative_phase_check(constrained_expand(a, b)).satisfied);
            }
    }
    SECTION("only 8-phase tuples are accepted") {
        CHECK_THROWS_AS(cumulative_phase_check(PhaseTuple({0.0, 1.0})), std::invalid_argument);
    }
}

TEST_CASE("no decay channel leaves the decayed trace empty") {
    const SequenceSpec seq = build_sequence(alternating_8, 8, TimingSpec{}, 0.0);
    const Ensemble ideal = ideal_ensemble(TimingSpec{}, 0.0);
    const BlochTrace trace = decayed_bloch_trace(seq, ideal, 1000, 17);
    REQUIRE(trace.points.size() == 8);
    for (const auto& pt : trace.points) {
        CHECK(pt.decayed_fraction == 0.0);
        CHECK(pt.transverse() == 0.0);
    }
}

TEST_CASE("exact decayed trace reconstructs against the Monte-Carlo estimate") {
    Ensemble atom = ideal_ensemble(TimingSpec{}, default_decay_rate);
    atom.samples[0].rabi_scale = 0.9;
    const SequenceSpec seq = build_sequence(alternating_8, 8, TimingSpec{}, 0.0);
    const BlochTrace exact = decayed_bloch_trace_exact(seq, atom);
    const int n = 40000;
    const BlochTrace mc = decayed_bloch_trace(seq, atom, n, 23);
    REQUIRE(exact.points.size() == mc.points.size());
    for (std::size_t p = 0; p < exact.points.size(); ++p) {
        const auto& ex = exact.points[p];
        const auto& m = mc.points[p];
        const double f = ex.decayed_fraction;
        const double sigma_f = std::sqrt(std::max(f * (1.0 - f), 1e-12) / n);
        CHECK(std::abs(m.decayed_fraction - f) < 4.0 * sigma_f + 1e-9);
        if (f > 1e-3 && m.decayed_fraction > 0.0) {
            const double n_dec = f * n;
            const double sigma_c = 1.0 / std::sqrt(n_dec); // components are bounded by 1
            CHECK(std::abs(m.u - ex.u) < 5.0 * sigma_c);
            CHECK(std::abs(m.v - ex.v) < 5.0 * sigma_c);
            CHECK(std::abs(m.w - ex.w) < 5.0 * sigma_c);
        }
    }
}

TEST_CASE("Bloch vectors of the decayed subensemble stay inside the sphere") {
    Ensemble atom = ideal_ensemble(TimingSpec{}, default_decay_rate);
    atom.samples[0].rabi_scale = 0.9;
    const SequenceSpec seq = build_sequence(paper_tuple, 16, TimingSpec{}, 0.0);
    for (const auto& pt : decayed_bloch_trace_exact(seq, atom).points) {
        CHECK(pt.u * pt.u + pt.v * pt.v + pt.w * pt.w <= 1.0 + 1e-9);
        CHECK(pt.decayed_fraction >= 0.0);
        CHECK(pt.decayed_fraction <= 1.0);
    }
}

TEST_CASE("alternating sequence builds up a transverse decayed phase; the constrained tuple does not") {
    Ensemble atom = ideal_ensemble(TimingSpec{}, default_decay_rate);
    atom.samples[0].rabi_scale = 0.9;

    const SequenceSpec alt = build_sequence(alternating_8, 8, TimingSpec{}, 0.0);
    const BlochTrace alt_trace = decayed_bloch_trace_exact(alt, atom);
    CHECK(alt_trace.points[1].transverse() > alt_trace.points[0].transverse());
    CHECK(alt_trace.points[2].transverse() > alt_trace.points[1].transverse());

    const SequenceSpec opt = build_sequence(paper_tuple, 8, TimingSpec{}, 0.0);
    const BlochTrace opt_trace = decayed_bloch_trace_exact(opt, atom);
    // after the full 8-pulse group the decayed distribution is symmetric
    CHECK(opt_trace.points[7].transverse() < 0.02);
    CHECK(opt_trace.points[7].transverse() < alt_trace.points[7].transverse());
}

TEST_CASE("spurious signature runs share the zero-signal reference") {
    Ensemble atom = ideal_ensemble(TimingSpec{}, default_decay_rate);
    atom.samples[0].rabi_scale = 0.9;
    const auto rows = spurious_signature(alternating_8, 8, {0.0, 0.02}, TimingSpec{}, atom, 2000, 3);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].delta_phi == 0.0);
    CHECK(rows[0].phase_shift == 0.0);
    CHECK(rows[1].visibility >= 0.0);
}
