#include <catch2/catch_amalgamated.hpp>

#include "rai/program.hpp"
#include "rai/rng.hpp"
#include "rai/sequence.hpp"
#include "support/oracles.hpp"

using Catch::Approx;
using namespace rai;

namespace {
const std::vector<double> paper_tuple = {
    3 * std::numbers::pi / 8, 7 * std::numbers::pi / 8, 15 * std::numbers::pi / 8,
    11 * std::numbers::pi / 8, 11 * std::numbers::pi / 8, 15 * std::numbers::pi / 8,
    7 * std::numbers::pi / 8, 3 * std::numbers::pi / 8};
}

TEST_CASE("minimal sequence is a three-pulse interferometer") {
    const SequenceSpec seq = build_sequence(PhaseTuple({0.0}), 1, TimingSpec{}, 0.0);
    const auto segs = sequence_segments(seq);
    REQUIRE(segs.size() == 5);
    CHECK(segs[0].is_pulse);
    CHECK(segs[0].duration == Approx(40e-9));
    CHECK(segs[2].is_mirror);
    CHECK(segs[2].duration == Approx(80e-9));
    CHECK(segs[4].is_pulse);
    CHECK_FALSE(segs[4].is_mirror);
}

TEST_CASE("cyclic expansion repeats the base phases") {
    const SequenceSpec seq = build_sequence(PhaseTuple(paper_tuple), 504, TimingSpec{}, 0.0);
    const auto phases = expanded_phases(seq);
    REQUIRE(phases.size() == 504);
    for (std::size_t i = 0; i < phases.size(); ++i)
        CHECK(phases[i] == Approx(paper_tuple[i % 8]).margin(1e-15));
}

TEST_CASE("default timing gives a 160 ns pulse period") {
    const SequenceSpec seq = build_sequence(PhaseTuple({0.0}), 8, TimingSpec{}, 0.0);
    CHECK(seq.mirror_pulse_time(1) - seq.mirror_pulse_time(0) == Approx(160e-9));
    CHECK(seq.timing.resonance_frequency() == Approx(3.125e6));
}

TEST_CASE("loop count must be a multiple of the tuple size") {
    CHECK_THROWS_AS(build_sequence(PhaseTuple(paper_tuple), 100, TimingSpec{}, 0.0),
                    std::invalid_argument);
    CHECK_NOTHROW(build_sequence(PhaseTuple(paper_tuple), 0, TimingSpec{}, 0.0));
}

TEST_CASE("UR-8 with phi2 = pi/2 shifted by 3pi/8 reproduces the optimized tuple") {
    const PhaseTuple ur = ur_n_phases(8, 0.5 * std::numbers::pi, 3 * std::numbers::pi / 8);
    REQUIRE(ur.size() == 8);
    for (int k = 0; k < 8; ++k)
        CHECK(circular_distance(ur[k], paper_tuple[static_cast<std::size_t>(k)]) < 1e-13);
    // same values straight from the formula
    const auto ref = oracle::ur_formula(8, 0.5 * std::numbers::pi, 3 * std::numbers::pi / 8);
    for (int k = 0; k < 8; ++k) CHECK(circular_distance(ur[k], ref[static_cast<std::size_t>(k)]) < 1e-12);
}

TEST_CASE("UR-N formula evaluations") {
    const PhaseTuple ur2 = ur_n_phases(2, 0.0, 0.0);
    CHECK(ur2[0] == Approx(0.0).margin(1e-15));
    CHECK(ur2[1] == Approx(0.0).margin(1e-15));

    const PhaseTuple ur4 = ur_n_phases(4, 0.0, 0.0);
    CHECK(ur4[0] == Approx(0.0).margin(1e-15));
    CHECK(ur4[1] == Approx(0.0).margin(1e-15));
    CHECK(circular_distance(ur4[2], std::numbers::pi) < 1e-13);
    CHECK(circular_distance(ur4[3], std::numbers::pi) < 1e-13);

    CHECK_THROWS_AS(ur_n_phases(7, 0.0, 0.0), std::invalid_argument);

    Rng rng(5);
    for (int n : {2, 4, 6, 8, 10, 16}) {
        const double phi2 = rng.uniform(0.0, two_pi);
        const double off = rng.uniform(0.0, two_pi);
        const PhaseTuple got = ur_n_phases(n, phi2, off);
        const auto ref = oracle::ur_formula(n, phi2, off);
        for (int k = 0; k < n; ++k)
            CHECK(circular_distance(got[k], ref[static_cast<std::size_t>(k)]) < 1e-11);
    }
}

TEST_CASE("constrained expansion reproduces the pattern") {
    const PhaseTuple a = constrained_expand(3 * std::numbers::pi / 8, 7 * std::numbers::pi / 8);
    for (int k = 0; k < 8; ++k)
        CHECK(circular_distance(a[k], paper_tuple[static_cast<std::size_t>(k)]) < 1e-15);

    const PhaseTuple b = constrained_expand(0.0, 0.0);
    const std::vector<double> expect_b = {0, 0, std::numbers::pi, std::numbers::pi,
                                          std::numbers::pi, std::numbers::pi, 0, 0};
    for (int k = 0; k < 8; ++k)
        CHECK(circular_distance(b[k], expect_b[static_cast<std::size_t>(k)]) < 1e-15);

    const PhaseTuple c = constrained_expand(0.5 * std::numbers::pi, 1.5 * std::numbers::pi);
    const std::vector<double> expect_c = {0.5 * std::numbers::pi, 1.5 * std::numbers::pi,
                                          0.5 * std::numbers::pi, 1.5 * std::numbers::pi,
                                          1.5 * std::numbers::pi, 0.5 * std::numbers::pi,
                                          1.5 * std::numbers::pi, 0.5 * std::numbers::pi};
    for (int k = 0; k < 8; ++k)
        CHECK(circular_distance(c[k], expect_c[static_cast<std::size_t>(k)]) < 1e-15);
}

TEST_CASE("constrained expansion satisfies all eight pattern identities") {
    Rng rng(9);
    const double pi = std::numbers::pi;
    for (int i = 0; i < 100; ++i) {
        const double p1 = rng.uniform(0.0, two_pi);
        const double p2 = rng.uniform(0.0, two_pi);
        const PhaseTuple t = constrained_expand(p1, p2);
        // the pattern is a palindrome: phi_k = phi_{9-k}
        for (int k = 0; k < 4; ++k) CHECK(circular_distance(t[k], t[7 - k]) < 1e-12);
        // explicit pairwise pi offsets
        CHECK(circular_distance(t[2], t[1] + pi) < 1e-12);
        CHECK(circular_distance(t[3], t[0] + pi) < 1e-12);
        CHECK(circular_distance(t[4], t[0] + pi) < 1e-12);
        CHECK(circular_distance(t[5], t[1] + pi) < 1e-12);
        CHECK(circular_distance(t[6], t[1]) < 1e-12);
        CHECK(circular_distance(t[7], t[0]) < 1e-12);
    }
}

TEST_CASE("DDS quantization") {
    const double lsb = two_pi / 65536.0;
    CHECK(quantize_phase_dds(lsb, 16) == lsb);
    CHECK(quantize_phase_dds(0.0, 7) == 0.0);
    CHECK(quantize_phase_dds(1.0e-4, 16) == Approx(9.5874e-5).margin(1e-9));
    CHECK(quantize_phase_dds(1.0e-4, 16) == lsb);
    // ties round toward zero
    CHECK(quantize_phase_dds(0.5 * lsb, 16) == 0.0);
    CHECK(quantize_phase_dds(1.5 * lsb, 16) == lsb);
    CHECK(quantize_phase_dds(-0.5 * lsb, 16) == 0.0);
    CHECK(quantize_phase_dds(-1.5 * lsb, 16) == -lsb);
    CHECK_THROWS_AS(quantize_phase_dds(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(quantize_phase_dds(1.0, 33), std::invalid_argument);

    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
        const int bits = 1 + static_cast<int>(rng.next_u64() % 20);
        const double phi = rng.uniform(-two_pi, two_pi);
        const double q = quantize_phase_dds(phi, bits);
        CHECK(quantize_phase_dds(q, bits) == q);                       // idempotent
        CHECK(std::abs(q - phi) <= 0.5 * two_pi / std::ldexp(1.0, bits) + 1e-15);
    }
}

TEST_CASE("signal injection") {
    const SequenceSpec seq = build_sequence(PhaseTuple({0.0}), 8, TimingSpec{}, 0.0);
    const double fr = seq.timing.resonance_frequency();

    SECTION("zero amplitude leaves the phases unchanged") {
        const SequenceSpec s = inject_signal(seq, 0.0, two_pi * fr, 0.5 * std::numbers::pi);
        const auto phases = expanded_phases(s);
        for (double p : phases) CHECK(p == 0.0);
    }

    SECTION("resonant signal with theta0 = pi/2 alternates +dphi, -dphi") {
        const double dphi = 0.01;
        const SequenceSpec s = inject_signal(seq, dphi, two_pi * fr, 0.5 * std::numbers::pi);
        const auto phases = expanded_phases(s);
        for (int i = 0; i < 8; ++i) {
            const double expect = (i % 2 == 0) ? dphi : two_pi - dphi;
            CHECK(phases[static_cast<std::size_t>(i)] == Approx(expect).margin(1e-12));
        }
    }

    SECTION("double injection is rejected") {
        const SequenceSpec s = inject_signal(seq, 0.01, two_pi * fr, 0.0);
        CHECK_THROWS_AS(inject_signal(s, 0.01, two_pi * fr, 0.0), std::invalid_argument);
    }

    SECTION("subtracting the signal recovers the base phases") {
        Rng rng(21);
        const SequenceSpec base = build_sequence(
            PhaseTuple({0.3, 1.7, 4.4, 2.2}), 16, TimingSpec{}, 0.0);
        const double amp = 0.37, omega = 2.1e6, theta0 = 0.9;
        const SequenceSpec s = inject_signal(base, amp, omega, theta0);
        const auto phases = expanded_phases(s);
        const double t1 = s.mirror_pulse_time(0);
        for (int i = 0; i < 16; ++i) {
            const double sig = amp * std::sin(omega * (s.mirror_pulse_time(i) - t1) + theta0);
            CHECK(circular_distance(phases[static_cast<std::size_t>(i)] - sig,
                                    base.base_phases[i % 4]) < 1e-14);
        }
    }
}

TEST_CASE("phases are exactly periodic in the pulse index") {
    Rng rng(17);
    std::vector<double> base;
    for (int i = 0; i < 8; ++i) base.push_back(rng.uniform(0.0, two_pi));
    const SequenceSpec seq = build_sequence(PhaseTuple(base), 64, TimingSpec{}, 0.0);
    const auto phases = expanded_phases(seq);
    for (std::size_t i = 8; i < phases.size(); ++i) CHECK(phases[i] == phases[i - 8]);
}
