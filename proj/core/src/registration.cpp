#include "egotraj/registration.hpp"

#include <cmath>
#include <limits>

#include "egotraj/errors.hpp"
#include "egotraj/kdtree.hpp"

namespace egotraj {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

}  // namespace

IcpResult icp_align(const Points3& src, const Points3& dst, const RegistrationConfig& config,
                    const Points3& src_colors, const Points3& dst_colors) {
  const Eigen::Index n_src = src.rows();
  if (n_src < 3 || dst.rows() < 3) {
    throw DegenerateInput("icp_align: both clouds need at least 3 points");
  }
  const bool use_color = config.color_weight > 0.0 && src_colors.rows() == n_src &&
                         dst_colors.rows() == dst.rows();

  KdTree3 tree(dst);

  IcpResult result;
  result.transform = RigidTransform::identity();
  double prev_rmse = std::numeric_limits<double>::infinity();

  std::vector<Eigen::Index> src_idx, dst_idx;
  src_idx.reserve(static_cast<std::size_t>(n_src));
  dst_idx.reserve(static_cast<std::size_t>(n_src));

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const Points3 moved = result.transform.apply(src);

    src_idx.clear();
    dst_idx.clear();
    for (Eigen::Index i = 0; i < n_src; ++i) {
      const auto hit = tree.nearest(moved.row(i).transpose(), config.max_correspondence_dist);
      if (hit) {
        src_idx.push_back(i);
        dst_idx.push_back(hit->index);
      }
    }
    result.overlap_fraction = static_cast<double>(src_idx.size()) / static_cast<double>(n_src);
    if (src_idx.size() < 3) {
      result.converged = false;
      return result;
    }

    const Eigen::Index m = static_cast<Eigen::Index>(src_idx.size());
    Points3 src_m(m, 3), dst_m(m, 3);
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      src_m.row(k) = src.row(src_idx[static_cast<std::size_t>(k)]);
      dst_m.row(k) = dst.row(dst_idx[static_cast<std::size_t>(k)]);
      if (use_color) {
        const double cdist = (src_colors.row(src_idx[static_cast<std::size_t>(k)]) -
                              dst_colors.row(dst_idx[static_cast<std::size_t>(k)]))
                                 .norm() /
                             kSqrt3;
        weights(k) = 1.0 - config.color_weight * std::min(cdist, 1.0);
      }
    }

    EstimateResult fit;
    try {
      fit = estimate_rigid_transform(src_m, dst_m, weights);
    } catch (const DegenerateInput&) {
      result.converged = false;
      return result;
    }
    result.transform = fit.transform;
    result.rmse = fit.rmse;

    if (std::abs(prev_rmse - fit.rmse) < config.convergence_tol) {
      result.converged = true;
      break;
    }
    prev_rmse = fit.rmse;
  }
  return result;
}

std::vector<RigidTransform> register_to_start_frame(const std::vector<TrackedFrame>& frames,
                                                    const RegistrationConfig& config) {
  if (frames.empty()) return {};
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].scene_points.rows() < 50) {
      throw RegistrationFailed(static_cast<int>(t),
                               "scene cloud too small (M >= 50 required, got " +
                                   std::to_string(frames[t].scene_points.rows()) + ")");
    }
    if (t > 0 && frames[t].frame_index <= frames[t - 1].frame_index) {
      throw RegistrationFailed(static_cast<int>(t), "frames not ordered by frame_index");
    }
  }

  std::vector<RigidTransform> to_start(frames.size());
  to_start[0] = RigidTransform::identity();
  for (std::size_t t = 1; t < frames.size(); ++t) {
    const IcpResult pairwise =
        icp_align(frames[t].scene_points, frames[t - 1].scene_points, config,
                  frames[t].scene_colors, frames[t - 1].scene_colors);
    if (pairwise.overlap_fraction < config.min_overlap_fraction) {
      throw RegistrationFailed(
          static_cast<int>(t),
          "overlap " + std::to_string(pairwise.overlap_fraction) + " below minimum " +
              std::to_string(config.min_overlap_fraction));
    }
    to_start[t] = to_start[t - 1].compose(pairwise.transform);
  }
  return to_start;
}

ExtractionResult extract_pose_sequence(const std::vector<TrackedFrame>& frames,
                                       const std::vector<RigidTransform>& cam_to_start,
                                       double frame_rate_hz) {
  if (frames.size() != cam_to_start.size()) {
    throw LengthMismatch("extract_pose_sequence: frames and transforms differ in length");
  }

  ExtractionResult out;
  out.trajectory.frame_rate_hz = frame_rate_hz;
  const std::size_t t_count = frames.size();
  if (t_count == 0) {
    out.degenerate = true;
    out.degenerate_reason = "no frames";
    return out;
  }

  std::vector<Points3> mapped(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    mapped[t] = cam_to_start[t].apply(frames[t].object_points);
  }

  out.trajectory.poses.resize(t_count);
  Eigen::Matrix3d r_abs = Eigen::Matrix3d::Identity();
  int compositions = 0;
  for (std::size_t t = 0; t < t_count; ++t) {
    Pose6DoF& pose = out.trajectory.poses[t];
    pose.timestamp_index = static_cast<int>(t) + 1;
    if (mapped[t].rows() == 0) {
      out.degenerate = true;
      out.degenerate_reason = "empty object cloud";
      pose.position.setZero();
      pose.rotation = r_abs;
      continue;
    }
    pose.position = mapped[t].colwise().mean().transpose();
    pose.rotation = r_abs;

    if (t + 1 < t_count) {
      if (mapped[t + 1].rows() != mapped[t].rows()) {
        out.degenerate = true;
        out.degenerate_reason = "object point count changed between frames";
        continue;
      }
      try {
        const EstimateResult step = estimate_rigid_transform(mapped[t], mapped[t + 1]);
        r_abs = step.transform.rotation * r_abs;
        if (++compositions % 10 == 0) r_abs = orthonormalized(r_abs);
      } catch (const DegenerateInput& e) {
        out.degenerate = true;
        out.degenerate_reason = e.what();
        // keep the last known rotation for the remaining steps
      }
    }
  }
  if (t_count < 2 && !out.degenerate) {
    out.degenerate = true;
    out.degenerate_reason = "trajectory shorter than 2 poses";
  }
  return out;
}

}  // namespace egotraj
