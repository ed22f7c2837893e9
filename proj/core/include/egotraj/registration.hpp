#pragma once

#include <string>
#include <vector>

#include "egotraj/geometry.hpp"
#include "egotraj/types.hpp"

namespace egotraj {

struct RegistrationConfig {
  int max_iterations = 50;
  double convergence_tol = 1e-5;        // meters, change in RMSE
  double max_correspondence_dist = 0.05;  // meters
  double color_weight = 0.0;            // 0 = pure geometric
  double min_overlap_fraction = 0.3;
};

struct IcpResult {
  RigidTransform transform;  // maps src into dst coordinates
  double rmse = 0.0;
  double overlap_fraction = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Point-to-point ICP between two clouds. Correspondences come from a k-d
/// tree on dst with rejection beyond max_correspondence_dist; when colors are
/// given on both sides and color_weight > 0, each correspondence is
/// down-weighted by config.color_weight * normalized RGB distance.
/// Summation order is fixed, so results are deterministic for a fixed input.
IcpResult icp_align(const Points3& src, const Points3& dst, const RegistrationConfig& config,
                    const Points3& src_colors = Points3(0, 3),
                    const Points3& dst_colors = Points3(0, 3));

/// Chains pairwise ICP over consecutive frames and composes the results into
/// frame-t -> start-frame transforms (index 0 is the identity). Throws
/// RegistrationFailed(t) when a pairwise alignment ends below
/// min_overlap_fraction or cannot form enough correspondences.
std::vector<RigidTransform> register_to_start_frame(const std::vector<TrackedFrame>& frames,
                                                    const RegistrationConfig& config);

struct ExtractionResult {
  Trajectory trajectory;
  bool degenerate = false;
  std::string degenerate_reason;
};

/// Maps every frame's object points into the start frame, takes centroids as
/// positions, and accumulates incremental SVD rotation estimates between
/// consecutive object clouds (re-orthonormalized every 10 compositions).
/// Per-step degeneracy marks the result instead of aborting.
ExtractionResult extract_pose_sequence(const std::vector<TrackedFrame>& frames,
                                       const std::vector<RigidTransform>& cam_to_start,
                                       double frame_rate_hz = 30.0);

}  // namespace egotraj
