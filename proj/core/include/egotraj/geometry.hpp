#pragma once

#include <Eigen/Core>
#include <optional>

#include "egotraj/types.hpp"

namespace egotraj {

/// Proper rigid motion x -> R*x + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  Points3 apply(const Points3& pts) const {
    Points3 out = pts * rotation.transpose();
    out.rowwise() += translation.transpose();
    return out;
  }

  /// this after other: (this * other)(x) == this(other(x)).
  RigidTransform compose(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
};

struct EstimateResult {
  RigidTransform transform;
  double rmse = 0.0;
};

/// Least-squares rigid fit between index-corresponded point sets via SVD of
/// the weighted cross-covariance (Kabsch). The reflection case is corrected
/// by flipping the sign of the smallest singular vector, so the returned
/// rotation is always proper.
///
/// Throws DegenerateInput when N < 3 or the centered source points are
/// collinear (scatter rank < 2).
EstimateResult estimate_rigid_transform(const Points3& src, const Points3& dst,
                                        const Eigen::VectorXd& weights = Eigen::VectorXd());

/// Nearest proper rotation in Frobenius norm (SVD projection).
Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d& m);

/// Geodesic angle between two rotations, radians in [0, pi].
double geodesic_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

struct EulerAngles {
  double roll = 0.0;   // about x
  double pitch = 0.0;  // about y
  double yaw = 0.0;    // about z
};

/// Extrinsic x-y-z convention, right handed, radians:
/// R = Rz(yaw) * Ry(pitch) * Rx(roll).
Eigen::Matrix3d rotation_from_euler(double roll, double pitch, double yaw);

/// Inverse of rotation_from_euler. At |pitch| = pi/2 the x/z rotations are
/// no longer separable; the canonical choice here is roll = 0 with the
/// remaining freedom folded into yaw. Throws NotARotation when the input
/// fails orthonormality by more than 1e-4.
EulerAngles euler_from_rotation(const Eigen::Matrix3d& r);

}  // namespace egotraj
