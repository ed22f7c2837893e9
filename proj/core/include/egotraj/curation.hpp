#pragma once

#include <optional>
#include <vector>

#include "egotraj/types.hpp"

namespace egotraj {

/// How the background tracks enter the similarity: either their displacements
/// are averaged into one background velocity per step (default), or each
/// track gets its own similarity and the per-track values are averaged.
enum class BackgroundAggregation { mean_displacement, per_track_average };

struct CurationConfig {
  double delta_td_m = 5.0;
  double delta_bgts = 0.7;
  double epsilon_motion = 1e-8;  // pixels
  int smoothing_window = 5;      // odd
  double low_motion_skip_fraction = 0.5;
  BackgroundAggregation background_aggregation = BackgroundAggregation::mean_displacement;

  /// Returns a description of the first invalid field, or nullopt when valid.
  std::optional<std::string> validate() const;
};

/// Cumulative Euclidean path length of the positional component.
/// Returns 0 for trajectories shorter than 2 poses.
double travel_distance(const Trajectory& traj);

/// Mean cosine similarity between object and background image-plane
/// displacements. Steps where either displacement is below eps are skipped
/// and the mean renormalized; when more than low_motion_skip_fraction of the
/// steps are skipped the similarity is undefined and nullopt is returned.
/// Throws LengthMismatch when track lengths differ.
std::optional<double> bgts(
    const Points2& object_track, const std::vector<Points2>& background_tracks, double eps,
    double low_motion_skip_fraction = 0.5,
    BackgroundAggregation aggregation = BackgroundAggregation::mean_displacement);

/// Unweighted moving average of the positions over a centered window,
/// truncated to the sequence bounds at the boundaries. Rotations and
/// timestamps pass through; the input is not modified.
Trajectory smooth_translations(const Trajectory& traj, int window = 5);

/// Runs the rule-based filters in order (degenerate, travel distance, BGTS)
/// and attaches a CurationReport. Kept episodes get their translations
/// smoothed exactly once (the report's smoothed flag guards repeats).
/// force_degenerate marks episodes whose upstream extraction already failed.
Episode curate(Episode ep, const CurationConfig& config, bool force_degenerate = false);

}  // namespace egotraj
