#pragma once

#include <cstdint>
#include <vector>

#include "qmeas/core.hpp"
#include "qmeas/micro.hpp"
#include "qmeas/readout.hpp"
#include "qmeas/rpi.hpp"

// Ensemble kernels. Trajectories are embarrassingly parallel: each draws an
// independent RNG stream from (seed, index) and the aggregation folds the
// per-trajectory records in index order, so results are bit-identical
// between the serial reference and the OpenMP path for any thread count.

namespace qmeas {

enum class ExecMode { kSerial, kOpenMP };

// Weighted 2-D density over (time column, value bin); each time column is
// normalized to unit mass.
struct Histogram2D {
    std::size_t t_bins = 0;
    std::size_t v_bins = 0;
    double t_lo = 0.0, t_hi = 0.0;
    double v_lo = 0.0, v_hi = 0.0;
    std::vector<double> mass; // t_bins * v_bins, row-major in t

    double& at(std::size_t ti, std::size_t vi) { return mass[ti * v_bins + vi]; }
    double at(std::size_t ti, std::size_t vi) const { return mass[ti * v_bins + vi]; }
    double t_center(std::size_t ti) const;
    double v_center(std::size_t vi) const;
    void deposit(std::size_t ti, double value, double weight);
    void normalize_columns();
};

struct EnsembleStats {
    std::size_t n_samples = 0;
    std::vector<double> weights;      // P[E] per readout (all 1 for ancestral runs)
    double p_transition_state = 0.0;  // weighted P( P2(T) > 1/2 )
    double p_transition_readout = 0.0; // valid positive
    double p_stay_readout = 0.0;       // valid negative
    double noise = 0.0;                // class disagreement
    double se_p_transition_state = 0.0; // weighted-ratio standard error
    double se_noise = 0.0;
    Histogram2D density_e;
    Histogram2D density_p2;

    double weight_sum() const;
    double effective_sample_size() const; // (sum w)^2 / sum w^2
};

struct EnsembleOptions {
    double smoothing_window = -1.0; // < 0: use t2 - t1
    SmoothEdge smooth_edge = SmoothEdge::kClip;
    std::size_t value_bins = 41;
    ExecMode exec = ExecMode::kOpenMP;
};

// Flat-prior importance-sampled ensemble: draw readouts from the prior,
// integrate the complex-Hamiltonian equations for each, and weight every
// statistic by the probability density P[E] = ||psi_T||^2.
EnsembleStats run_ensemble(const SystemConfig& config, const PriorSpec& prior, std::size_t n,
                           std::uint64_t seed, const EnsembleOptions& options = {});

// Ancestral micro ensemble: simulate the weak-observation record directly;
// every trajectory carries unit weight.
EnsembleStats run_micro_ensemble(const SystemConfig& config, const ElementaryModel& model,
                                 int n_per_series, std::size_t n, std::uint64_t seed,
                                 const EnsembleOptions& options = {});

// Readout-class selection for the moderate-fuzziness figure.
enum class ReadoutSelection { kAll, kReadoutUp, kReadoutDown };

struct SelectedDensities {
    Histogram2D density_e;
    Histogram2D density_p2;
};

SelectedDensities micro_selected_densities(const SystemConfig& config,
                                           const ElementaryModel& model, int n_per_series,
                                           std::size_t n, std::uint64_t seed,
                                           ReadoutSelection selection,
                                           const EnsembleOptions& options = {});

} // namespace qmeas
