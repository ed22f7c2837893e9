#include "egotraj/curation.hpp"

#include <algorithm>
#include <cmath>

#include "egotraj/errors.hpp"

namespace egotraj {

std::optional<std::string> CurationConfig::validate() const {
  if (!(delta_td_m > 0.0)) return "delta_td_m must be positive";
  if (delta_bgts < -1.0 || delta_bgts > 1.0) return "delta_bgts must be in [-1, 1]";
  if (!(epsilon_motion > 0.0)) return "epsilon_motion must be positive";
  if (smoothing_window < 1 || smoothing_window % 2 == 0)
    return "smoothing_window must be a positive odd integer";
  if (low_motion_skip_fraction < 0.0 || low_motion_skip_fraction > 1.0)
    return "low_motion_skip_fraction must be in [0, 1]";
  return std::nullopt;
}

double travel_distance(const Trajectory& traj) {
  double dist = 0.0;
  for (std::size_t t = 1; t < traj.poses.size(); ++t) {
    dist += (traj.poses[t].position - traj.poses[t - 1].position).norm();
  }
  return dist;
}

namespace {

std::optional<double> bgts_mean_displacement(const Points2& object_track,
                                             const std::vector<Points2>& background_tracks,
                                             double eps, double skip_fraction) {
  const Eigen::Index t_count = object_track.rows();
  const Eigen::Index steps = t_count - 1;
  double acc = 0.0;
  Eigen::Index valid = 0;
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Eigen::RowVector2d u = object_track.row(t + 1) - object_track.row(t);
    Eigen::RowVector2d b = Eigen::RowVector2d::Zero();
    for (const Points2& q : background_tracks) {
      b += q.row(t + 1) - q.row(t);
    }
    b /= static_cast<double>(background_tracks.size());
    if (u.norm() < eps || b.norm() < eps) continue;
    acc += u.dot(b) / (u.norm() * b.norm());
    ++valid;
  }
  const Eigen::Index skipped = steps - valid;
  if (valid == 0 || static_cast<double>(skipped) > skip_fraction * static_cast<double>(steps)) {
    return std::nullopt;
  }
  return acc / static_cast<double>(valid);
}

std::optional<double> bgts_per_track(const Points2& object_track,
                                     const std::vector<Points2>& background_tracks, double eps,
                                     double skip_fraction) {
  const Eigen::Index steps = object_track.rows() - 1;
  double track_acc = 0.0;
  int surviving_tracks = 0;
  for (const Points2& q : background_tracks) {
    double acc = 0.0;
    Eigen::Index valid = 0;
    for (Eigen::Index t = 0; t < steps; ++t) {
      const Eigen::RowVector2d u = object_track.row(t + 1) - object_track.row(t);
      const Eigen::RowVector2d b = q.row(t + 1) - q.row(t);
      if (u.norm() < eps || b.norm() < eps) continue;
      acc += u.dot(b) / (u.norm() * b.norm());
      ++valid;
    }
    const Eigen::Index skipped = steps - valid;
    if (valid == 0 || static_cast<double>(skipped) > skip_fraction * static_cast<double>(steps)) {
      continue;
    }
    track_acc += acc / static_cast<double>(valid);
    ++surviving_tracks;
  }
  if (surviving_tracks == 0) return std::nullopt;
  return track_acc / static_cast<double>(surviving_tracks);
}

}  // namespace

std::optional<double> bgts(const Points2& object_track,
                           const std::vector<Points2>& background_tracks, double eps,
                           double low_motion_skip_fraction, BackgroundAggregation aggregation) {
  const Eigen::Index t_count = object_track.rows();
  if (t_count < 2) throw LengthMismatch("bgts: tracks need length T >= 2");
  for (const Points2& q : background_tracks) {
    if (q.rows() != t_count) throw LengthMismatch("bgts: track lengths differ");
  }
  if (background_tracks.empty()) return std::nullopt;

  if (aggregation == BackgroundAggregation::mean_displacement) {
    return bgts_mean_displacement(object_track, background_tracks, eps,
                                  low_motion_skip_fraction);
  }
  return bgts_per_track(object_track, background_tracks, eps, low_motion_skip_fraction);
}

Trajectory smooth_translations(const Trajectory& traj, int window) {
  if (window < 1 || window % 2 == 0) {
    throw InvalidSpec("smooth_translations: window must be a positive odd integer");
  }
  Trajectory out = traj;
  const int t_count = traj.length();
  const int half = window / 2;
  for (int t = 0; t < t_count; ++t) {
    const int lo = std::max(0, t - half);
    const int hi = std::min(t_count - 1, t + half);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int k = lo; k <= hi; ++k) sum += traj.poses[static_cast<std::size_t>(k)].position;
    out.poses[static_cast<std::size_t>(t)].position = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

Episode curate(Episode ep, const CurationConfig& config, bool force_degenerate) {
  if (const auto problem = config.validate()) {
    throw InvalidSpec("curate: " + *problem);
  }

  CurationReport report;
  report.delta_td_m = config.delta_td_m;
  report.delta_bgts = config.delta_bgts;
  report.smoothed = ep.curation && ep.curation->smoothed;

  if (ep.trajectory && ep.trajectory->length() >= 2) {
    report.travel_distance_m = travel_distance(*ep.trajectory);
  }
  const Points2 object_track = object_image_track(ep.frames);
  if (object_track.rows() >= 2) {
    report.bgts = bgts(object_track, background_image_tracks(ep.frames), config.epsilon_motion,
                       config.low_motion_skip_fraction, config.background_aggregation);
  }

  if (force_degenerate) {
    report.verdict = Verdict::rejected_degenerate;
    report.reason = "extraction degenerate";
  } else if (!ep.trajectory || ep.trajectory->length() < 2) {
    report.verdict = Verdict::rejected_degenerate;
    report.reason = "trajectory missing or shorter than 2 poses";
  } else if (report.travel_distance_m > config.delta_td_m) {
    report.verdict = Verdict::rejected_travel;
    report.reason = "travel distance exceeds threshold";
  } else if (!report.bgts.has_value()) {
    report.verdict = Verdict::rejected_degenerate;
    report.reason = "insufficient motion for background track similarity";
  } else if (*report.bgts > config.delta_bgts) {
    report.verdict = Verdict::rejected_bgts;
    report.reason = "background track similarity exceeds threshold";
  } else {
    report.verdict = Verdict::kept;
    report.reason = "ok";
    if (!report.smoothed) {
      ep.trajectory = smooth_translations(*ep.trajectory, config.smoothing_window);
      report.smoothed = true;
    }
  }

  ep.curation = report;
  return ep;
}

}  // namespace egotraj
