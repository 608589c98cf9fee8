#include "qmeas/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "qmeas/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmeas {

double Histogram2D::t_center(std::size_t ti) const {
    const double w = (t_hi - t_lo) / static_cast<double>(t_bins);
    return t_lo + (static_cast<double>(ti) + 0.5) * w;
}

double Histogram2D::v_center(std::size_t vi) const {
    const double w = (v_hi - v_lo) / static_cast<double>(v_bins);
    return v_lo + (static_cast<double>(vi) + 0.5) * w;
}

void Histogram2D::deposit(std::size_t ti, double value, double weight) {
    const double w = (v_hi - v_lo) / static_cast<double>(v_bins);
    auto vi = static_cast<long>(std::floor((value - v_lo) / w));
    vi = std::clamp<long>(vi, 0, static_cast<long>(v_bins) - 1);
    at(ti, static_cast<std::size_t>(vi)) += weight;
}

void Histogram2D::normalize_columns() {
    for (std::size_t ti = 0; ti < t_bins; ++ti) {
        double col = 0.0;
        for (std::size_t vi = 0; vi < v_bins; ++vi) col += at(ti, vi);
        if (col > 0.0)
            for (std::size_t vi = 0; vi < v_bins; ++vi) at(ti, vi) /= col;
    }
}

double EnsembleStats::weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double EnsembleStats::effective_sample_size() const {
    double s1 = 0.0, s2 = 0.0;
    for (double w : weights) {
        s1 += w;
        s2 += w * w;
    }
    return s2 > 0.0 ? s1 * s1 / s2 : 0.0;
}

namespace {

// Everything the aggregation needs from one trajectory.
struct TrajRecord {
    double weight = 1.0;
    ClassLabel label;
    std::vector<double> smoothed; // readout values per time column
    std::vector<double> p2;       // occupation per time column
};

Histogram2D make_histogram(std::size_t t_bins, double t_hi, double v_lo, double v_hi,
                           std::size_t v_bins) {
    Histogram2D h;
    h.t_bins = t_bins;
    h.v_bins = v_bins;
    h.t_lo = 0.0;
    h.t_hi = t_hi;
    h.v_lo = v_lo;
    h.v_hi = v_hi;
    h.mass.assign(t_bins * v_bins, 0.0);
    return h;
}

// Blocked driver: a block of trajectories is simulated in parallel into
// preallocated slots, then folded serially in index order. Results do not
// depend on the thread count.
void run_blocked(std::size_t n, ExecMode exec,
                 const std::function<TrajRecord(std::size_t)>& simulate,
                 const std::function<void(std::size_t, TrajRecord&)>& fold) {
    constexpr std::size_t kBlock = 256;
    std::vector<TrajRecord> block(std::min(kBlock, n));
    for (std::size_t base = 0; base < n; base += kBlock) {
        const auto count = static_cast<std::ptrdiff_t>(std::min(kBlock, n - base));
        if (exec == ExecMode::kOpenMP) {
#pragma omp parallel for schedule(dynamic)
            for (std::ptrdiff_t i = 0; i < count; ++i)
                block[static_cast<std::size_t>(i)] =
                    simulate(base + static_cast<std::size_t>(i));
        } else {
            for (std::ptrdiff_t i = 0; i < count; ++i)
                block[static_cast<std::size_t>(i)] =
                    simulate(base + static_cast<std::size_t>(i));
        }
        for (std::ptrdiff_t i = 0; i < count; ++i)
            fold(base + static_cast<std::size_t>(i), block[static_cast<std::size_t>(i)]);
    }
}

EnsembleStats aggregate(const SystemConfig& config, std::size_t n, std::size_t t_bins,
                        const EnsembleOptions& options,
                        const std::function<TrajRecord(std::size_t)>& simulate) {
    const DerivedScales scales = derive_scales(config);
    EnsembleStats stats;
    stats.n_samples = n;
    stats.weights.resize(n);
    stats.density_e = make_histogram(t_bins, config.t_total, config.e1 - scales.delta_e,
                                     config.e2 + scales.delta_e, options.value_bins);
    stats.density_p2 = make_histogram(t_bins, config.t_total, 0.0, 1.0, options.value_bins);

    double s1 = 0.0, s2 = 0.0;          // sum w, sum w^2
    double t1_state = 0.0, t2_state = 0.0; // sums over state-up trajectories
    double t1_vp = 0.0, t1_vn = 0.0;
    double t1_noise = 0.0, t2_noise = 0.0;

    run_blocked(n, options.exec, simulate, [&](std::size_t j, TrajRecord& rec) {
        const double w = rec.weight;
        stats.weights[j] = w;
        s1 += w;
        s2 += w * w;
        if (rec.label.state_up) {
            t1_state += w;
            t2_state += w * w;
        }
        if (rec.label.valid_positive()) t1_vp += w;
        if (rec.label.valid_negative()) t1_vn += w;
        if (rec.label.noise()) {
            t1_noise += w;
            t2_noise += w * w;
        }
        for (std::size_t ti = 0; ti < t_bins; ++ti) {
            stats.density_e.deposit(ti, rec.smoothed[ti], w);
            stats.density_p2.deposit(ti, rec.p2[ti], w);
        }
    });

    if (!(s1 > 0.0))
        throw std::runtime_error("ensemble: total readout probability underflowed to zero");

    stats.p_transition_state = t1_state / s1;
    stats.p_transition_readout = t1_vp / s1;
    stats.p_stay_readout = t1_vn / s1;
    stats.noise = t1_noise / s1;

    // delta-method error of the weighted ratio estimator with binary scores
    auto ratio_se = [&](double p, double t2) {
        const double var = p * p * s2 + (1.0 - 2.0 * p) * t2;
        return std::sqrt(std::max(0.0, var)) / s1;
    };
    stats.se_p_transition_state = ratio_se(stats.p_transition_state, t2_state);
    stats.se_noise = ratio_se(stats.noise, t2_noise);

    stats.density_e.normalize_columns();
    stats.density_p2.normalize_columns();
    return stats;
}

double resolve_window(const SystemConfig& config, const EnsembleOptions& options) {
    if (options.smoothing_window > 0.0) return options.smoothing_window;
    const double pulse = config.t2 - config.t1;
    if (!(pulse > 0.0))
        throw std::invalid_argument("ensemble: no default smoothing window without a pulse");
    return pulse;
}

} // namespace

EnsembleStats run_ensemble(const SystemConfig& config, const PriorSpec& prior, std::size_t n,
                           std::uint64_t seed, const EnsembleOptions& options) {
    if (n < 1) throw std::invalid_argument("run_ensemble: n must be >= 1");
    config.validate();
    const DerivedScales scales = derive_scales(config);
    const double window = resolve_window(config, options);

    // column count = segment count of the prior grid
    const ReadoutCurve probe = generate_readout(config, prior, seed);
    const std::size_t t_bins = probe.segment_count();

    auto simulate = [&, window](std::size_t j) {
        const ReadoutCurve curve = generate_readout(config, prior, subseed(seed, j));
        const Trajectory traj = integrate_rpi(config, curve, AmplitudePair{});
        const ReadoutCurve smoothed = smooth_readout(curve, window, options.smooth_edge);
        TrajRecord rec;
        rec.weight = probability_density(traj);
        rec.label = classify(traj, smoothed, scales);
        rec.smoothed = smoothed.samples;
        rec.p2.assign(traj.p2.begin() + 1, traj.p2.end()); // one value per column
        return rec;
    };
    return aggregate(config, n, t_bins, options, simulate);
}

EnsembleStats run_micro_ensemble(const SystemConfig& config, const ElementaryModel& model,
                                 int n_per_series, std::size_t n, std::uint64_t seed,
                                 const EnsembleOptions& options) {
    if (n < 1) throw std::invalid_argument("run_micro_ensemble: n must be >= 1");
    config.validate();
    model.validate();
    const DerivedScales scales = derive_scales(config);
    const double window = resolve_window(config, options);

    const double dt = static_cast<double>(n_per_series) * model.tau;
    const auto t_bins = static_cast<std::size_t>(std::llround(config.t_total / dt));

    auto simulate = [&, window](std::size_t j) {
        const MicroRun run = micro_trajectory(config, model, n_per_series, subseed(seed, j));
        const ReadoutCurve smoothed = smooth_readout(run.readout, window, options.smooth_edge);
        TrajRecord rec;
        rec.weight = 1.0;
        rec.label = classify(run.trajectory, smoothed, scales);
        rec.smoothed = smoothed.samples;
        rec.p2.assign(run.trajectory.p2.begin() + 1, run.trajectory.p2.end());
        return rec;
    };
    return aggregate(config, n, t_bins, options, simulate);
}

SelectedDensities micro_selected_densities(const SystemConfig& config,
                                           const ElementaryModel& model, int n_per_series,
                                           std::size_t n, std::uint64_t seed,
                                           ReadoutSelection selection,
                                           const EnsembleOptions& options) {
    config.validate();
    model.validate();
    const DerivedScales scales = derive_scales(config);
    const double window = resolve_window(config, options);
    const double dt = static_cast<double>(n_per_series) * model.tau;
    const auto t_bins = static_cast<std::size_t>(std::llround(config.t_total / dt));

    SelectedDensities out;
    out.density_e = make_histogram(t_bins, config.t_total, config.e1 - scales.delta_e,
                                   config.e2 + scales.delta_e, options.value_bins);
    out.density_p2 = make_histogram(t_bins, config.t_total, 0.0, 1.0, options.value_bins);

    auto simulate = [&, window](std::size_t j) {
        const MicroRun run = micro_trajectory(config, model, n_per_series, subseed(seed, j));
        const ReadoutCurve smoothed = smooth_readout(run.readout, window, options.smooth_edge);
        TrajRecord rec;
        rec.weight = 1.0;
        rec.label = classify(run.trajectory, smoothed, scales);
        rec.smoothed = smoothed.samples;
        rec.p2.assign(run.trajectory.p2.begin() + 1, run.trajectory.p2.end());
        return rec;
    };
    run_blocked(n, options.exec, simulate, [&](std::size_t, TrajRecord& rec) {
        const bool keep = selection == ReadoutSelection::kAll ||
                          (selection == ReadoutSelection::kReadoutUp && rec.label.readout_up) ||
                          (selection == ReadoutSelection::kReadoutDown && !rec.label.readout_up);
        if (!keep) return;
        for (std::size_t ti = 0; ti < t_bins; ++ti) {
            out.density_e.deposit(ti, rec.smoothed[ti], 1.0);
            out.density_p2.deposit(ti, rec.p2[ti], 1.0);
        }
    });
    out.density_e.normalize_columns();
    out.density_p2.normalize_columns();
    return out;
}

} // namespace qmeas
