#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "rai/lindblad.hpp"
#include "rai/rng.hpp"
#include "support/oracles.hpp"

using Catch::Approx;
using namespace rai;

TEST_CASE("free evolution follows the exponential decay law") {
    const double gamma = default_decay_rate;
    SECTION("pure excited state decays to 1/e after one lifetime") {
        const DensityMatrix rho = free_evolution(excited_density(), excited_state_lifetime, gamma);
        CHECK(excited_population(rho) == Approx(std::exp(-1.0)).margin(1e-12));
        CHECK(rho(0, 0).real() == Approx(1.0 - std::exp(-1.0)).margin(1e-12));
    }
    SECTION("no decay, resonant frame: state unchanged") {
        DensityMatrix rho;
        rho << 0.3, std::complex<double>(0.2, -0.1), std::complex<double>(0.2, 0.1), 0.7;
        CHECK((free_evolution(rho, 5e-6, 0.0) - rho).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("coherence decays at half the population rate") {
        DensityMatrix rho;
        rho << 0.5, 0.5, 0.5, 0.5;
        const DensityMatrix out = free_evolution(rho, 2.0 / gamma, gamma);
        CHECK(std::abs(out(0, 1)) == Approx(0.5 * std::exp(-1.0)).margin(1e-12));
    }
    SECTION("negative time rejected") {
        CHECK_THROWS_AS(free_evolution(ground_density(), -1e-9, gamma), std::invalid_argument);
    }
    SECTION("detuning rotates the coherence by e^{+i delta t}") {
        DensityMatrix rho;
        rho << 0.5, 0.5, 0.5, 0.5;
        const double delta = 2.3e6, t = 1e-7;
        const DensityMatrix out = free_evolution(rho, t, 0.0, delta);
        CHECK(std::arg(out(0, 1)) == Approx(delta * t).margin(1e-12));
    }
}

TEST_CASE("pulse maps built by phase rotation match direct exponentials") {
    Rng rng(31);
    for (int i = 0; i < 25; ++i) {
        const double omega = rng.uniform(1e6, 5e7);
        const double delta = rng.uniform(-1e7, 1e7);
        const double gamma = rng.uniform(0.0, 1e5);
        const double phase = rng.uniform(0.0, two_pi);
        const double tau = rng.uniform(1e-9, 3e-7);
        const Eigen::Matrix4d direct = (lindblad_generator(omega, delta, gamma, phase) * tau).exp();
        const Eigen::Matrix4d zero = (lindblad_generator(omega, delta, gamma, 0.0) * tau).exp();
        LindbladState v(rng.uniform01(), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform01());
        LindbladState a = direct * v;
        LindbladState b = v;
        detail::rotate_coherence(b, phase);
        b = zero * b;
        detail::rotate_coherence(b, -phase);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("segment map agrees with RK4 integration of the master equation") {
    const double omega = 2.2e7, delta = -4e6, gamma = default_decay_rate, tau = 2.5e-7, phase = 1.1;
    DensityMatrix rho = ground_density();
    const DensityMatrix ref = oracle::rk4_lindblad(rho, omega, delta, phase, gamma, tau, 40000);
    const Eigen::Matrix4d m = (lindblad_generator(omega, delta, gamma, phase) * tau).exp();
    const DensityMatrix got = from_lindblad_state(m * to_lindblad_state(rho));
    CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("two resonant pi/2 beamsplitters compose a pi pulse") {
    // L = 0 Ramsey sequence at phi_b = 0: both pi/2 pulses share phase 0
    const SequenceSpec seq = build_sequence(PhaseTuple({0.0}), 0, TimingSpec{}, 0.0);
    const AtomSample ideal{0.0, 1.0, 1.0};
    const double rabi = std::numbers::pi / seq.timing.pi_duration;
    const DensityMatrix rho = lindblad_propagate(ground_density(), seq, ideal, rabi, 0.0);
    CHECK(excited_population(rho) == Approx(1.0).margin(1e-12));
}

TEST_CASE("zero decay reduces to the unitary composition") {
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> base;
        for (int i = 0; i < 8; ++i) base.push_back(rng.uniform(0.0, two_pi));
        SequenceSpec seq = build_sequence(PhaseTuple(base), 16, TimingSpec{}, rng.uniform(0.0, two_pi));
        const double rabi = rng.uniform(2e7, 4.5e7);
        const double delta = rng.uniform(-4e6, 4e6);
        LindbladEngine engine(seq, rabi, delta, 0.0);
        const DensityMatrix a = engine.propagate(ground_density());
        const DensityMatrix b = unitary_compose_propagate(ground_density(), seq, rabi, delta);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("trace, hermiticity and positivity are preserved with decay") {
    Rng rng(99);
    std::vector<double> base;
    for (int i = 0; i < 8; ++i) base.push_back(rng.uniform(0.0, two_pi));
    const SequenceSpec seq = build_sequence(PhaseTuple(base), 64, TimingSpec{}, 0.3);
    const double rabi = 0.92 * std::numbers::pi / seq.timing.pi_duration;
    LindbladEngine engine(seq, rabi, 2e6, default_decay_rate);
    double worst_trace = 0.0, worst_eig = 0.0;
    LindbladState v = engine.propagate_train_observed(
        to_lindblad_state(ground_density()), [&](int, const LindbladState& s) {
            const DensityMatrix rho = from_lindblad_state(s);
            worst_trace = std::max(worst_trace, trace_defect(rho));
            worst_eig = std::min(worst_eig, min_eigenvalue(rho));
            CHECK(hermiticity_defect(rho) < 1e-12);
        });
    v = engine.apply_final_bs(v);
    const DensityMatrix rho = from_lindblad_state(v);
    worst_trace = std::max(worst_trace, trace_defect(rho));
    CHECK(worst_trace < 1e-9);
    CHECK(worst_eig > -1e-10);
}

TEST_CASE("full-sequence Lindblad run matches RK4 on a short sequence") {
    // independent oracle: RK4-integrate every segment of a 4-pulse sequence
    const SequenceSpec seq = build_sequence(PhaseTuple({0.4, 2.0}), 4, TimingSpec{}, 1.3);
    const double rabi = 0.9 * std::numbers::pi / seq.timing.pi_duration;
    const double delta = 3e6;
    const double gamma = default_decay_rate;

    DensityMatrix ref = ground_density();
    for (const auto& seg : sequence_segments(seq)) {
        const double om = seg.is_pulse ? rabi : 0.0;
        ref = oracle::rk4_lindblad(ref, om, delta, seg.phase, gamma, seg.duration, 20000);
    }
    LindbladEngine engine(seq, rabi, delta, gamma);
    const DensityMatrix got = engine.propagate(ground_density());
    CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-8);
}
