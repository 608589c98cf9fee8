#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmeas/core.hpp"
#include "qmeas/readout.hpp"
#include "qmeas/rpi.hpp"

// Sequential weak-observation model: each elementary observation multiplies
// the state componentwise by (u1, u2) on a positive result and (u1', u2') on
// a negative one, with |u_i|^2 = p_i and |u_i'|^2 = 1 - p_i.

namespace qmeas {

struct ElementaryModel {
    double p1 = 0.0;        // positive-result probability on level 1
    double p2 = 0.0;        // positive-result probability on level 2
    double chi = 0.0;       // phase of u1 (u2 carries -chi)
    double chi_prime = 0.0; // phase of u2' (u1' carries -chi_prime)
    double tau = 0.0;       // repetition period between observations

    double p0() const { return 0.5 * (p1 + p2); }
    double delta_p() const { return p2 - p1; }

    std::complex<double> u1() const;
    std::complex<double> u2() const;
    std::complex<double> u1_neg() const;
    std::complex<double> u2_neg() const;

    void validate() const; // throws std::invalid_argument
};

// One N-series summary: counts, ratio and the mapped readout energy.
struct SeriesRecord {
    int n_total = 0;
    int n_plus = 0;
    double n_ratio = 0.0;
    double energy = 0.0;
};

// p = (p1 |C1|^2 + p2 |C2|^2) / (|C1|^2 + |C2|^2)
double positive_probability(const AmplitudePair& state, const ElementaryModel& model);

AmplitudePair elementary_update(const AmplitudePair& state, bool positive,
                                const ElementaryModel& model);

// Componentwise amplitude factors for a series with known outcome order:
// U_i = u_i^{N+} u_i'^{N-N+}.
std::pair<std::complex<double>, std::complex<double>>
series_amplitude_selective(const ElementaryModel& model, const std::vector<bool>& outcomes);

// Order-ignorant amplitudes: sqrt(C(N, N+)) times the selective ones; their
// squared moduli are the two binomial probabilities.
std::pair<std::complex<double>, std::complex<double>>
series_amplitude_unordered(const ElementaryModel& model, int n_plus, int n_total);

// P(N+, N) = C(N,N+) [ P1 p1^{N+}(1-p1)^{N-N+} + P2 p2^{N+}(1-p2)^{N-N+} ]
double series_outcome_probability(const AmplitudePair& state, const ElementaryModel& model,
                                  int n_plus, int n_total);

// Gaussian (large-N) limit of the unordered amplitudes at ratio n = N+/N,
// normalized so the squared modulus approximates the binomial pmf pointwise.
std::pair<std::complex<double>, std::complex<double>>
gaussian_series_amplitude(const ElementaryModel& model, double n_ratio, int n_total);

// Linear readout map E = E0 + dE (n - p0)/dp.
double n_to_energy(double n_ratio, const ElementaryModel& model, const DerivedScales& scales);

struct LevelResolution {
    double t_lr = 0.0;          // tau * 4 p0 (1-p0) / dp^2
    double implied_kappa = 0.0; // dp^2 / (4 p0 (1-p0) dE^2 tau)
};

LevelResolution level_resolution_time(const ElementaryModel& model, const DerivedScales& scales);

// Weak-coupling meter reduction: p0 = |a|^2 (1+g^2), dp = 4 g |a|^2,
// chi = 0 (real a), chi' = -g b. The small-p0 resolution-time estimate
// tau/(4 g^2 |a|^2) is exposed for cross-checks.
ElementaryModel concrete_model_params(double g, double a_sq, double b, double tau);
double concrete_t_lr_estimate(double g, double a_sq, double tau);

struct FeasibilityReport {
    double commutator_ratio = 0.0; // N^2 dp v tau / sqrt(p0), want <= 0.1
    double continuity_ratio = 0.0; // p0 / dp^2, want >= 10
    double phase_ratio = 0.0;      // g b T / tau, want <= 0.1
    bool commutator_ok = false;
    bool continuity_ok = false;
    bool phase_ok = false;

    bool all_ok() const { return commutator_ok && continuity_ok && phase_ok; }
    std::string to_string() const;
};

FeasibilityReport feasibility_check(const ElementaryModel& model, const DerivedScales& scales,
                                    int n_total, double g, double b, double t_total);

struct MicroRun {
    ReadoutCurve readout;              // dt = N tau, one sample per series
    Trajectory trajectory;             // state recorded at series boundaries
    std::vector<SeriesRecord> series;
};

// Observation-by-observation simulation over [0, t_total]: sample the
// outcome, apply the elementary update, then rotate by the pulse angle
// accumulated over the repetition period. Requires t_total = (whole number
// of series) * n_per_series * tau.
MicroRun micro_trajectory(const SystemConfig& config, const ElementaryModel& model,
                          int n_per_series, std::uint64_t seed);

// Ebar = E1 P1 + E2 P2.
double mean_energy(const AmplitudePair& state, const DerivedScales& scales);

// Binomial pmf C(n,k) p^k (1-p)^(n-k), computed in log space.
double binomial_pmf(int k, int n, double p);

// Model with p0 = 0.5 whose implied kappa matches config.kappa at the given
// repetition period (used to drive micro ensembles at a target fuzziness).
ElementaryModel model_for_config(const SystemConfig& config, double tau);

} // namespace qmeas
