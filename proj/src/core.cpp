#include "qmeas/core.hpp"

#include <cmath>
#include <stdexcept>

namespace qmeas {

AmplitudePair AmplitudePair::normalized() const {
    const double n = std::sqrt(norm_sq());
    if (!(n > 0.0)) throw std::invalid_argument("AmplitudePair: zero state cannot be normalized");
    return {c1 / n, c2 / n};
}

bool AmplitudePair::finite() const {
    return std::isfinite(c1.real()) && std::isfinite(c1.imag()) &&
           std::isfinite(c2.real()) && std::isfinite(c2.imag());
}

void SystemConfig::validate() const {
    if (!(e2 > e1)) throw std::invalid_argument("SystemConfig: e2 must exceed e1");
    if (!(t1 >= 0.0 && t1 <= t2 && t2 <= t_total))
        throw std::invalid_argument("SystemConfig: need 0 <= t1 <= t2 <= t_total");
    if (!(kappa >= 0.0)) throw std::invalid_argument("SystemConfig: kappa must be >= 0");
    if (!(v_amplitude >= 0.0)) throw std::invalid_argument("SystemConfig: v_amplitude must be >= 0");
    if (!std::isfinite(e1) || !std::isfinite(e2) || !std::isfinite(t_total) ||
        !std::isfinite(kappa) || !std::isfinite(v_amplitude))
        throw std::invalid_argument("SystemConfig: non-finite parameter");
}

DerivedScales derive_scales(const SystemConfig& config) {
    config.validate();
    DerivedScales s;
    s.delta_e = config.delta_e();
    if (!(s.delta_e > 0.0)) throw std::invalid_argument("derive_scales: delta_e must be positive");
    s.e0 = config.e0();
    s.t_rabi = config.v_amplitude > 0.0 ? kPi / config.v_amplitude : kInf;
    s.t_lr = config.kappa > 0.0 ? 1.0 / (config.kappa * s.delta_e * s.delta_e) : kInf;
    s.fuzziness_ratio = (config.kappa > 0.0 && config.v_amplitude > 0.0)
                            ? 4.0 * kPi * s.t_lr / s.t_rabi
                            : kInf;
    return s;
}

double kappa_for_fuzziness(double ratio, double delta_e, double t_rabi) {
    if (!(ratio > 0.0)) throw std::invalid_argument("kappa_for_fuzziness: ratio must be positive");
    if (!(delta_e > 0.0) || !(t_rabi > 0.0) || !std::isfinite(t_rabi))
        throw std::invalid_argument("kappa_for_fuzziness: need delta_e > 0 and finite t_rabi");
    const double t_lr = ratio * t_rabi / (4.0 * kPi);
    return 1.0 / (t_lr * delta_e * delta_e);
}

bool is_pi_pulse(const SystemConfig& config, double rel_tol) {
    if (!(config.v_amplitude > 0.0)) return false;
    const double half_rabi = 0.5 * kPi / config.v_amplitude;
    return std::abs((config.t2 - config.t1) - half_rabi) <= rel_tol * half_rabi;
}

} // namespace qmeas
