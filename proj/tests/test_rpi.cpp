#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmeas/readout.hpp"
#include "qmeas/rng.hpp"
#include "qmeas/rpi.hpp"

using namespace qmeas;

namespace {

SystemConfig pi_pulse_config(double kappa) {
    SystemConfig c;
    c.e1 = -0.5;
    c.e2 = 0.5;
    c.v_amplitude = kPi; // T_R = 1
    c.t1 = 0.25;
    c.t2 = 0.75;
    c.t_total = 1.0;
    c.kappa = kappa;
    return c;
}

ReadoutCurve constant_curve(double value, double dt, double t_total) {
    ReadoutCurve c;
    c.dt = dt;
    c.t_total = t_total;
    c.samples.assign(static_cast<std::size_t>(std::ceil(t_total / dt - 1e-12)), value);
    return c;
}

} // namespace

TEST_CASE("kappa = 0 pi-pulse transfers the state completely") {
    auto cfg = pi_pulse_config(0.0);
    auto curve = constant_curve(0.0, 0.02, cfg.t_total);
    auto traj = integrate_rpi(cfg, curve, AmplitudePair{});
    CHECK(traj.final_p2() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(probability_density(traj) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("no drive, readout pinned at the occupied level: nothing happens") {
    auto cfg = pi_pulse_config(2.0);
    cfg.v_amplitude = 0.0;
    cfg.t1 = cfg.t2 = 0.0;
    auto curve = constant_curve(cfg.e1, 0.05, cfg.t_total);
    auto traj = integrate_rpi(cfg, curve, AmplitudePair{});
    CHECK(std::abs(traj.amplitudes.back().c1 - std::complex<double>(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(traj.amplitudes.back().c2) < 1e-12);
    CHECK(probability_density(traj) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("no drive, readout at midpoint: closed-form norm decay") {
    auto cfg = pi_pulse_config(3.0);
    cfg.v_amplitude = 0.0;
    cfg.t1 = cfg.t2 = 0.0;
    auto scales = derive_scales(cfg);
    auto curve = constant_curve(0.0, 0.05, cfg.t_total);
    auto traj = integrate_rpi(cfg, curve, AmplitudePair{});
    const double expected = std::exp(-cfg.t_total / (2.0 * scales.t_lr));
    CHECK(probability_density(traj) == doctest::Approx(expected).epsilon(1e-8));
    // the decay law holds along the whole trajectory
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double ref = std::exp(-traj.times[i] / (2.0 * scales.t_lr));
        CHECK(traj.norm_sq[i] == doctest::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("kappa = 0 integration matches the Rabi closed form pointwise") {
    auto cfg = pi_pulse_config(0.0);
    auto curve = constant_curve(0.3, 0.01, cfg.t_total);
    auto traj = integrate_rpi(cfg, curve, AmplitudePair{});
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto ref = rabi_reference(cfg, traj.times[i]);
        CHECK(std::abs(traj.amplitudes[i].c1 - ref.c1) < 1e-8);
        CHECK(std::abs(traj.amplitudes[i].c2 - ref.c2) < 1e-8);
    }
}

TEST_CASE("rabi_reference closed form") {
    auto cfg = pi_pulse_config(0.0);
    CHECK(rabi_reference(cfg, cfg.t1).p2() == doctest::Approx(0.0));
    // half pulse: v * t' = pi/4 -> P2 = 1/2
    CHECK(rabi_reference(cfg, 0.5).p2() == doctest::Approx(0.5).epsilon(1e-12));
    const auto end = rabi_reference(cfg, 0.9);
    CHECK(std::abs(end.c1) < 1e-12);
    CHECK(std::abs(end.c2 - std::complex<double>(0.0, -1.0)) < 1e-12);
}

TEST_CASE("norm is non-increasing for random readouts") {
    auto cfg = pi_pulse_config(5.0);
    PriorSpec prior{-1.0, 1.0, 0.02};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto curve = generate_readout(cfg, prior, seed);
        auto traj = integrate_rpi(cfg, curve, AmplitudePair{});
        for (std::size_t i = 1; i < traj.norm_sq.size(); ++i)
            CHECK(traj.norm_sq[i] <= traj.norm_sq[i - 1] * (1.0 + 1e-12));
        const double p = probability_density(traj);
        CHECK(p > 0.0);
        CHECK(p <= 1.0 + 1e-12);
        for (double v : traj.p2) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("kappa = 0 conserves the norm to 1e-9 per unit time") {
    auto cfg = pi_pulse_config(0.0);
    PriorSpec prior{-1.0, 1.0, 0.02};
    auto curve = generate_readout(cfg, prior, 5);
    auto traj = integrate_rpi(cfg, curve, AmplitudePair{});
    for (std::size_t i = 0; i < traj.norm_sq.size(); ++i)
        CHECK(std::abs(traj.norm_sq[i] - 1.0) < 1e-9 * std::max(1.0, traj.times[i]));
}

TEST_CASE("fourth-order step convergence") {
    auto cfg = pi_pulse_config(2.0);
    auto curve = constant_curve(0.2, 0.125, cfg.t_total);

    IntegratorOptions fine;
    fine.substeps_per_segment = 512;
    fine.rabi_step_fraction = 1.0;
    const double reference = integrate_rpi(cfg, curve, AmplitudePair{}, fine).final_p2();

    auto error_at = [&](double substeps) {
        IntegratorOptions opt;
        opt.substeps_per_segment = substeps;
        opt.rabi_step_fraction = 1.0; // disable the Rabi cap to expose h^4
        return std::abs(integrate_rpi(cfg, curve, AmplitudePair{}, opt).final_p2() -
                        reference);
    };
    const double e4 = error_at(4);
    const double e8 = error_at(8);
    const double ratio = e4 / e8;
    CHECK(ratio > 8.0);   // h^4 scaling, with slack
    CHECK(ratio < 40.0);
}

TEST_CASE("occupation history ignores the initial normalization") {
    auto cfg = pi_pulse_config(1.5);
    PriorSpec prior{-1.0, 1.0, 0.05};
    auto curve = generate_readout(cfg, prior, 9);
    AmplitudePair scaled{std::complex<double>(0.3, -0.4), std::complex<double>(0.0, 0.0)};
    auto a = integrate_rpi(cfg, curve, AmplitudePair{});
    auto b = integrate_rpi(cfg, curve, scaled);
    for (std::size_t i = 0; i < a.p2.size(); ++i)
        CHECK(a.p2[i] == doctest::Approx(b.p2[i]).epsilon(1e-12));
}

TEST_CASE("integration rejects mismatched readouts") {
    auto cfg = pi_pulse_config(1.0);
    auto short_curve = constant_curve(0.0, 0.1, 0.5);
    CHECK_THROWS_AS(integrate_rpi(cfg, short_curve, AmplitudePair{}),
                    std::invalid_argument);
    auto bad = constant_curve(0.0, 0.1, cfg.t_total);
    bad.samples[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(integrate_rpi(cfg, bad, AmplitudePair{}), std::invalid_argument);
}
