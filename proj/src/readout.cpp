#include "qmeas/readout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qmeas/rng.hpp"
#include "qmeas/rpi.hpp"

namespace qmeas {

double ReadoutCurve::segment_end(std::size_t k) const {
    return std::min(static_cast<double>(k + 1) * dt, t_total);
}

double ReadoutCurve::value_at(double t) const {
    if (samples.empty()) throw std::invalid_argument("ReadoutCurve: empty");
    if (t <= 0.0) return samples.front();
    auto k = static_cast<std::size_t>(t / dt);
    if (k >= samples.size()) k = samples.size() - 1;
    return samples[k];
}

void ReadoutCurve::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("ReadoutCurve: dt must be positive");
    if (samples.empty()) throw std::invalid_argument("ReadoutCurve: no samples");
    if (!(t_total > 0.0)) throw std::invalid_argument("ReadoutCurve: t_total must be positive");
    const double covered = dt * static_cast<double>(samples.size());
    if (covered < t_total * (1.0 - 1e-12))
        throw std::invalid_argument("ReadoutCurve: samples do not cover [0, t_total]");
    if (dt * static_cast<double>(samples.size() - 1) >= t_total)
        throw std::invalid_argument("ReadoutCurve: trailing samples beyond t_total");
    for (double e : samples)
        if (!std::isfinite(e)) throw std::invalid_argument("ReadoutCurve: non-finite sample");
}

PriorSpec default_prior(const SystemConfig& config) {
    const double de = config.delta_e();
    PriorSpec prior;
    prior.e_lo = config.e1 - 0.5 * de;
    prior.e_hi = config.e2 + 0.5 * de;
    prior.dt = config.v_amplitude > 0.0 ? (kPi / config.v_amplitude) / 50.0
                                        : config.t_total / 50.0;
    return prior;
}

ReadoutCurve generate_readout(const SystemConfig& config, const PriorSpec& prior,
                              std::uint64_t seed) {
    config.validate();
    if (prior.e_lo > prior.e_hi)
        throw std::invalid_argument("generate_readout: e_lo must not exceed e_hi");
    if (!(prior.e_lo <= config.e1 && prior.e_hi >= config.e2))
        throw std::invalid_argument("generate_readout: prior window must contain [E1, E2]");
    if (!(prior.dt > 0.0)) throw std::invalid_argument("generate_readout: dt must be positive");

    ReadoutCurve curve;
    curve.dt = prior.dt;
    curve.t_total = config.t_total;
    // number of segments covering [0, T]; the last may be truncated
    auto n = static_cast<std::size_t>(std::ceil(config.t_total / prior.dt - 1e-12));
    n = std::max<std::size_t>(n, 1);
    curve.samples.resize(n);
    Rng rng(seed);
    for (auto& e : curve.samples) e = rng.uniform(prior.e_lo, prior.e_hi);
    return curve;
}

namespace {

// integral of the piecewise-constant curve over [a, b] within [0, t_total]
double integrate_curve(const ReadoutCurve& c, double a, double b) {
    a = std::max(a, 0.0);
    b = std::min(b, c.t_total);
    if (b <= a) return 0.0;
    const auto n = c.samples.size();
    auto k0 = std::min(static_cast<std::size_t>(a / c.dt), n - 1);
    auto k1 = std::min(static_cast<std::size_t>(b / c.dt), n - 1);
    double sum = 0.0;
    for (std::size_t k = k0; k <= k1; ++k) {
        const double lo = std::max(a, c.segment_start(k));
        const double hi = std::min(b, c.segment_end(k));
        if (hi > lo) sum += c.samples[k] * (hi - lo);
    }
    return sum;
}

} // namespace

ReadoutCurve smooth_readout(const ReadoutCurve& curve, double window, SmoothEdge edge) {
    curve.validate();
    if (!(window > 0.0)) throw std::invalid_argument("smooth_readout: window must be positive");

    ReadoutCurve out = curve;
    if (window <= curve.dt) return out; // averaging within one segment is the identity

    const double t_end = curve.t_total;
    for (std::size_t k = 0; k < curve.samples.size(); ++k) {
        const double center = 0.5 * (curve.segment_start(k) + curve.segment_end(k));
        double lo = 0.0;
        double hi = 0.0;
        if (edge == SmoothEdge::kShrinkSymmetric) {
            const double hw = std::min({0.5 * window, center, t_end - center});
            lo = center - hw;
            hi = center + hw;
        } else {
            lo = std::max(0.0, center - 0.5 * window);
            hi = std::min(t_end, center + 0.5 * window);
        }
        if (hi - lo > 0.0)
            out.samples[k] = integrate_curve(curve, lo, hi) / (hi - lo);
    }
    return out;
}

ClassLabel classify(const Trajectory& traj, const ReadoutCurve& smoothed,
                    const DerivedScales& scales) {
    if (std::abs(traj.final_time() - smoothed.t_total) > 1e-9 * smoothed.t_total)
        throw std::invalid_argument("classify: trajectory and readout span different [0, T]");
    ClassLabel label;
    label.state_up = traj.final_p2() > 0.5;
    label.readout_up = smoothed.final_value() > scales.e0;
    return label;
}

} // namespace qmeas
