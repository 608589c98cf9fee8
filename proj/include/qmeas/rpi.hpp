#pragma once

#include <vector>

#include "qmeas/core.hpp"
#include "qmeas/readout.hpp"

namespace qmeas {

// State history on the readout grid plus the final time.
struct Trajectory {
    std::vector<double> times;
    std::vector<AmplitudePair> amplitudes;
    std::vector<double> p2;      // normalized upper-level occupation
    std::vector<double> norm_sq; // |C1|^2 + |C2|^2, the running P[E]

    double final_time() const { return times.back(); }
    double final_p2() const { return p2.back(); }
};

struct IntegratorOptions {
    // Step target = min(segment/substeps_per_segment, t_rabi * rabi_step_fraction);
    // steps are additionally aligned to segment edges and pulse boundaries so
    // the coefficients are constant within every step.
    double substeps_per_segment = 8.0;
    double rabi_step_fraction = 1e-3;
};

// Integrates the complex-Hamiltonian two-level equations
//   dC1/dt = -i v(t) C2 - kappa (E1 - E(t))^2 C1
//   dC2/dt = -i v(t) C1 - kappa (E2 - E(t))^2 C2
// with classical fixed-step RK4. The initial state is normalized on entry.
Trajectory integrate_rpi(const SystemConfig& config, const ReadoutCurve& readout,
                         const AmplitudePair& initial,
                         const IntegratorOptions& options = {});

// ||psi_T||^2: the unnormalized probability density of the readout that
// produced the trajectory.
double probability_density(const Trajectory& traj);

// Closed-form kappa = 0 reference starting from (1, 0):
// C1 = cos(theta), C2 = -i sin(theta) with theta the accumulated pulse area.
AmplitudePair rabi_reference(const SystemConfig& config, double t);

} // namespace qmeas
