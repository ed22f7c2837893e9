#include "egotraj/types.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace egotraj {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kept:
      return "kept";
    case Verdict::rejected_travel:
      return "rejected-travel";
    case Verdict::rejected_bgts:
      return "rejected-bgts";
    case Verdict::rejected_degenerate:
      return "rejected-degenerate";
  }
  return "kept";
}

std::optional<Verdict> verdict_from_string(const std::string& s) {
  if (s == "kept") return Verdict::kept;
  if (s == "rejected-travel") return Verdict::rejected_travel;
  if (s == "rejected-bgts") return Verdict::rejected_bgts;
  if (s == "rejected-degenerate") return Verdict::rejected_degenerate;
  return std::nullopt;
}

namespace {

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

}  // namespace

std::vector<std::string> validate_episode(const Episode& ep) {
  std::vector<std::string> violations;
  auto add = [&violations](const std::string& v) { violations.push_back(v); };

  if (!ep.instruction.empty()) {
    if (ep.verb.empty()) add("verb: non-empty required when instruction is set");
    if (ep.object.empty()) add("object: non-empty required when instruction is set");
  }
  if (!(ep.frame_rate_hz > 0.0)) add("frame_rate_hz: positive value required");

  if (!ep.frames.empty()) {
    const Eigen::Index n = ep.frames.front().object_points.rows();
    const Eigen::Index k2d = ep.frames.front().object_track_2d.rows();
    const std::size_t n_bg = ep.frames.front().background_tracks_2d.size();
    bool n_mismatch = false, finite_bad = false, track_mismatch = false, bg_mismatch = false;
    for (std::size_t i = 0; i < ep.frames.size(); ++i) {
      const TrackedFrame& f = ep.frames[i];
      if (f.object_points.rows() != n) n_mismatch = true;
      if (!all_finite(f.object_points) || !all_finite(f.scene_points) ||
          !all_finite(f.object_track_2d)) {
        finite_bad = true;
      }
      for (const Points2& bg : f.background_tracks_2d) {
        if (!all_finite(bg)) finite_bad = true;
      }
      if (f.object_track_2d.rows() != k2d) track_mismatch = true;
      if (f.background_tracks_2d.size() != n_bg) bg_mismatch = true;
    }
    if (n < 3) add("object_points: N >= 3 required");
    if (n_mismatch) add("object_points: constant N across frames required");
    if (finite_bad) add("frames: finite coordinates required");
    if (track_mismatch) add("object_track_2d: constant K across frames required");
    if (bg_mismatch) add("background_tracks_2d: constant track count required");
  }

  if (ep.trajectory) {
    const Trajectory& traj = *ep.trajectory;
    if (traj.length() < 2) add("trajectory: length T >= 2 required");
    if (!(traj.frame_rate_hz > 0.0)) add("trajectory.frame_rate_hz: positive value required");
    bool ortho_bad = false, det_bad = false, pos_bad = false, ts_bad = false;
    std::size_t ortho_at = 0;
    for (std::size_t i = 0; i < traj.poses.size(); ++i) {
      const Pose6DoF& p = traj.poses[i];
      const double ortho_err =
          (p.rotation.transpose() * p.rotation - Eigen::Matrix3d::Identity()).norm();
      if (ortho_err >= 1e-6 && !ortho_bad) {
        ortho_bad = true;
        ortho_at = i;
      }
      if (std::abs(p.rotation.determinant() - 1.0) > 1e-6) det_bad = true;
      if (!p.position.allFinite()) pos_bad = true;
      if (i > 0 && traj.poses[i].timestamp_index <= traj.poses[i - 1].timestamp_index) {
        ts_bad = true;
      }
    }
    if (ortho_bad) {
      std::ostringstream os;
      os << "rotation: orthonormality violated at pose " << ortho_at;
      add(os.str());
    }
    if (det_bad && !ortho_bad) add("rotation: determinant must be +1");
    if (pos_bad) add("position: finite components required");
    if (ts_bad) add("timestamp_index: strictly increasing required");
  }

  return violations;
}

Points2 object_image_track(const std::vector<TrackedFrame>& frames) {
  const Eigen::Index t_count = static_cast<Eigen::Index>(frames.size());
  Points2 track(t_count, 2);
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const Points2& pts = frames[static_cast<std::size_t>(t)].object_track_2d;
    if (pts.rows() == 0) return Points2(0, 2);
    track.row(t) = pts.colwise().mean();
  }
  return track;
}

std::vector<Points2> background_image_tracks(const std::vector<TrackedFrame>& frames) {
  if (frames.empty()) return {};
  const std::size_t n_tracks = frames.front().background_tracks_2d.size();
  const Eigen::Index t_count = static_cast<Eigen::Index>(frames.size());
  std::vector<Points2> tracks(n_tracks, Points2(t_count, 2));
  for (Eigen::Index t = 0; t < t_count; ++t) {
    const TrackedFrame& f = frames[static_cast<std::size_t>(t)];
    if (f.background_tracks_2d.size() != n_tracks) return {};
    for (std::size_t l = 0; l < n_tracks; ++l) {
      if (f.background_tracks_2d[l].rows() == 0) return {};
      tracks[l].row(t) = f.background_tracks_2d[l].colwise().mean();
    }
  }
  return tracks;
}

}  // namespace egotraj
