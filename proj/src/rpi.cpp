#include "qmeas/rpi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmeas {

namespace {

using cd = std::complex<double>;

// One RK4 step of the constant-coefficient system
//   dC1/dt = -i v C2 - d1 C1,   dC2/dt = -i v C1 - d2 C2
// with d_i = kappa (E_i - E)^2 precomputed for the current segment.
inline void rk4_step(cd& c1, cd& c2, double v, double d1, double d2, double h) {
    const cd iv(0.0, v);
    auto f1 = [&](const cd& a1, const cd& a2) { return -iv * a2 - d1 * a1; };
    auto f2 = [&](const cd& a1, const cd& a2) { return -iv * a1 - d2 * a2; };

    const cd k1a = f1(c1, c2), k1b = f2(c1, c2);
    const cd k2a = f1(c1 + 0.5 * h * k1a, c2 + 0.5 * h * k1b);
    const cd k2b = f2(c1 + 0.5 * h * k1a, c2 + 0.5 * h * k1b);
    const cd k3a = f1(c1 + 0.5 * h * k2a, c2 + 0.5 * h * k2b);
    const cd k3b = f2(c1 + 0.5 * h * k2a, c2 + 0.5 * h * k2b);
    const cd k4a = f1(c1 + h * k3a, c2 + h * k3b);
    const cd k4b = f2(c1 + h * k3a, c2 + h * k3b);

    c1 += (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    c2 += (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
}

// Advance over [a, b] with constant readout value e; splits at the pulse
// boundaries so v is constant within each piece.
void advance(cd& c1, cd& c2, double a, double b, double e,
             const SystemConfig& cfg, double step_target) {
    const double d1 = cfg.kappa * (cfg.e1 - e) * (cfg.e1 - e);
    const double d2 = cfg.kappa * (cfg.e2 - e) * (cfg.e2 - e);

    double cuts[4] = {a, std::clamp(cfg.t1, a, b), std::clamp(cfg.t2, a, b), b};
    for (int p = 0; p < 3; ++p) {
        const double lo = cuts[p], hi = cuts[p + 1];
        if (hi - lo <= 0.0) continue;
        const double mid = 0.5 * (lo + hi);
        const double v = (mid >= cfg.t1 && mid <= cfg.t2) ? cfg.v_amplitude : 0.0;
        const auto nsteps = std::max<long>(1, static_cast<long>(std::ceil((hi - lo) / step_target - 1e-12)));
        const double h = (hi - lo) / static_cast<double>(nsteps);
        for (long i = 0; i < nsteps; ++i) rk4_step(c1, c2, v, d1, d2, h);
    }
}

} // namespace

Trajectory integrate_rpi(const SystemConfig& config, const ReadoutCurve& readout,
                         const AmplitudePair& initial, const IntegratorOptions& options) {
    config.validate();
    readout.validate();
    if (std::abs(readout.t_total - config.t_total) > 1e-9 * std::max(1.0, config.t_total))
        throw std::invalid_argument("integrate_rpi: readout does not cover [0, t_total]");

    AmplitudePair state = initial.normalized();

    double step_target = readout.dt / options.substeps_per_segment;
    if (config.v_amplitude > 0.0) {
        const double t_rabi = kPi / config.v_amplitude;
        step_target = std::min(step_target, t_rabi * options.rabi_step_fraction);
    }

    const std::size_t n = readout.segment_count();
    Trajectory traj;
    traj.times.reserve(n + 1);
    traj.amplitudes.reserve(n + 1);
    traj.p2.reserve(n + 1);
    traj.norm_sq.reserve(n + 1);

    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.amplitudes.push_back(state);
        traj.p2.push_back(state.p2());
        traj.norm_sq.push_back(state.norm_sq());
    };

    record(0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = readout.segment_start(k);
        const double b = readout.segment_end(k);
        advance(state.c1, state.c2, a, b, readout.samples[k], config, step_target);
        if (!state.finite())
            throw std::runtime_error("integrate_rpi: state became non-finite");
        record(b);
    }
    return traj;
}

double probability_density(const Trajectory& traj) { return traj.norm_sq.back(); }

AmplitudePair rabi_reference(const SystemConfig& config, double t) {
    const double overlap = std::max(0.0, std::min(t, config.t2) - config.t1);
    const double theta = config.v_amplitude * overlap;
    return {std::complex<double>(std::cos(theta), 0.0),
            std::complex<double>(0.0, -std::sin(theta))};
}

} // namespace qmeas
