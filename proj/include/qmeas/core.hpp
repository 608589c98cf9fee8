#pragma once

#include <complex>
#include <limits>

// Shared domain types for the two-level continuous-measurement simulator.
// Units: hbar = 1 throughout; energies and 1/time share a scale.

namespace qmeas {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Unnormalized expansion coefficients (C1, C2) in the rotating basis.
// The squared norm of the pair is the (unnormalized) probability density
// of the readout that produced it.
struct AmplitudePair {
    std::complex<double> c1{1.0, 0.0};
    std::complex<double> c2{0.0, 0.0};

    double norm_sq() const { return std::norm(c1) + std::norm(c2); }

    // Normalized occupation of the upper level, in [0, 1].
    double p2() const {
        const double n2 = std::norm(c2);
        return n2 / (std::norm(c1) + n2);
    }

    AmplitudePair normalized() const;
    bool finite() const;
};

// Two-level system, driving pulse and measurement strength.
// The driving amplitude v acts on [t1, t2] and vanishes outside.
struct SystemConfig {
    double e1 = -0.5;         // lower level
    double e2 = 0.5;          // upper level
    double v_amplitude = kPi; // Rabi matrix element during the pulse
    double t1 = 0.0;          // pulse start
    double t2 = 0.5;          // pulse end
    double t_total = 0.5;     // measurement duration
    double kappa = 0.0;       // measurement strength, 1/(energy^2 * time)

    double delta_e() const { return e2 - e1; }
    double e0() const { return 0.5 * (e1 + e2); }

    // Throws std::invalid_argument on violated invariants.
    void validate() const;
};

struct DerivedScales {
    double delta_e = 0.0;         // E2 - E1
    double e0 = 0.0;              // (E1 + E2)/2
    double t_rabi = kInf;         // pi / v
    double t_lr = kInf;           // level resolution time, 1/(kappa dE^2)
    double fuzziness_ratio = kInf; // 4*pi*t_lr/t_rabi, the figure-axis quantity
};

DerivedScales derive_scales(const SystemConfig& config);

// Inverse of the fuzziness_ratio definition: the kappa that yields
// 4*pi*T_lr/T_R = ratio for the given level splitting and Rabi period.
double kappa_for_fuzziness(double ratio, double delta_e, double t_rabi);

// True if t2 - t1 matches half a Rabi period (a pi-pulse) within rel_tol.
bool is_pi_pulse(const SystemConfig& config, double rel_tol = 1e-9);

} // namespace qmeas
