#pragma once

#include <cstdint>
#include <vector>

#include "qmeas/core.hpp"

namespace qmeas {

// Piecewise-constant energy readout E(t) on a uniform grid.
// Sample k holds on [k*dt, (k+1)*dt); the last segment is truncated at
// t_total when t_total is not a multiple of dt.
struct ReadoutCurve {
    double dt = 0.0;
    double t_total = 0.0;
    std::vector<double> samples;

    std::size_t segment_count() const { return samples.size(); }
    double segment_start(std::size_t k) const { return static_cast<double>(k) * dt; }
    double segment_end(std::size_t k) const;
    double value_at(double t) const;
    double final_value() const { return samples.back(); }

    void validate() const; // throws std::invalid_argument
};

// Flat prior over readout curves: i.i.d. uniform segment values on
// [e_lo, e_hi] with grid spacing dt.
struct PriorSpec {
    double e_lo = 0.0;
    double e_hi = 0.0;
    double dt = 0.0;
};

// Window [E1 - dE/2, E2 + dE/2], dt = T_R/50.
PriorSpec default_prior(const SystemConfig& config);

ReadoutCurve generate_readout(const SystemConfig& config, const PriorSpec& prior,
                              std::uint64_t seed);

// Edge handling of the moving average near t=0 and t=T. The shrinking
// window keeps the average centered but carries no averaging at the very
// ends; the clipped window keeps its nominal width and is what the
// final-time classification needs (see smooth_readout below).
enum class SmoothEdge { kShrinkSymmetric, kClip };

// Centered boxcar moving average of the given width, evaluated at segment
// centers and returned on the same grid.
ReadoutCurve smooth_readout(const ReadoutCurve& curve, double window,
                            SmoothEdge edge = SmoothEdge::kClip);

// Four-way final-time label: state up iff P2(T) > 1/2 (strict), readout up
// iff the smoothed E(T) > E0 (strict). Ties count as "down".
struct ClassLabel {
    bool state_up = false;
    bool readout_up = false;

    bool valid_positive() const { return state_up && readout_up; }
    bool valid_negative() const { return !state_up && !readout_up; }
    bool noise() const { return state_up != readout_up; }
};

struct Trajectory; // rpi.hpp

ClassLabel classify(const Trajectory& traj, const ReadoutCurve& smoothed,
                    const DerivedScales& scales);

} // namespace qmeas
