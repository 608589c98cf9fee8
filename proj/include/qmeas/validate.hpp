#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qmeas/core.hpp"
#include "qmeas/ensemble.hpp"
#include "qmeas/micro.hpp"

// Oracles and equivalence harnesses: exact outcome enumeration, the
// series-product vs effective-operator comparison, and agreement between the
// two independent ensemble estimators.

namespace qmeas {

using Mat2 = std::array<std::complex<double>, 4>; // row-major 2x2

Mat2 mat_mul(const Mat2& a, const Mat2& b);
Mat2 mat_exp(const Mat2& m);                       // closed form for 2x2
double max_abs_diff(const Mat2& a, const Mat2& b);
Mat2 frobenius_normalized(const Mat2& m);

struct BruteForceSeries {
    std::vector<double> probability;  // P(N+, N), N+1 entries
    std::vector<Mat2> density;        // accumulated 2x2 density matrix per N+
};

// Enumerates all 2^N ordered outcome sequences, N <= 12.
BruteForceSeries brute_force_series(const AmplitudePair& state, const ElementaryModel& model,
                                    int n_total);

struct EquivalenceReport {
    double operator_error = 0.0;       // max element deviation, scale-normalized
    double predicted_bound = 0.0;      // N^2 dp v tau / sqrt(p0)
    double distribution_distance = 0.0; // max per-series TV distance
};

// Compares (i) the exact alternating product of elementary operators and
// per-observation pulse rotations with (ii) the factorized effective
// evolution exp[(-i v sigma1 - kappa (E - H0)^2) dt] per series, in the
// rotating basis. Positive outcomes are spread evenly through each series.
EquivalenceReport compare_series_evolution(const SystemConfig& config,
                                           const ElementaryModel& model, int n_per_series,
                                           std::span<const int> n_plus_per_series);

struct CrossSamplerReport {
    double p_state_rpi = 0.0;
    double p_state_micro = 0.0;
    double se_rpi = 0.0;
    double se_micro = 0.0;
    double noise_rpi = 0.0;
    double noise_micro = 0.0;
    double se_noise_rpi = 0.0;
    double se_noise_micro = 0.0;
    double ess_rpi = 0.0;

    double delta_p_state() const;
    double combined_se_p_state() const;
    double delta_noise() const;
    double combined_se_noise() const;
    bool agrees(double n_sigma = 3.0) const;
};

// Runs the flat-prior weighted RPI ensemble and the ancestral micro ensemble
// at matched fuzziness and reports both estimates with their errors.
// Requires the model's implied kappa to match config.kappa.
CrossSamplerReport cross_sampler_agreement(const SystemConfig& config,
                                           const ElementaryModel& model, int n_per_series,
                                           const PriorSpec& prior, std::size_t n_samples,
                                           std::uint64_t seed,
                                           const EnsembleOptions& options = {});

struct ValidationRow {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation; // "<=" or ">=" against the threshold
    bool pass = false;
};

// Deterministic oracle suite behind the `validate` CLI subcommand.
std::vector<ValidationRow> run_validation_suite(std::uint64_t seed);

} // namespace qmeas
