#include "egotraj/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "egotraj/errors.hpp"

namespace egotraj {

EstimateResult estimate_rigid_transform(const Points3& src, const Points3& dst,
                                        const Eigen::VectorXd& weights) {
  const Eigen::Index n = src.rows();
  if (n < 3) throw DegenerateInput("estimate_rigid_transform: N >= 3 required");
  if (dst.rows() != n) throw DegenerateInput("estimate_rigid_transform: src/dst size mismatch");

  Eigen::VectorXd w;
  if (weights.size() == 0) {
    w = Eigen::VectorXd::Ones(n);
  } else {
    if (weights.size() != n)
      throw DegenerateInput("estimate_rigid_transform: weight count mismatch");
    if (weights.minCoeff() < 0.0)
      throw DegenerateInput("estimate_rigid_transform: negative weight");
    w = weights;
  }
  const double w_sum = w.sum();
  if (!(w_sum > 0.0)) throw DegenerateInput("estimate_rigid_transform: weight sum must be positive");

  const Eigen::RowVector3d c_src = (w.transpose() * src) / w_sum;
  const Eigen::RowVector3d c_dst = (w.transpose() * dst) / w_sum;

  Points3 src_c = src.rowwise() - c_src;
  Points3 dst_c = dst.rowwise() - c_dst;

  // Collinearity check on the source scatter: rank < 2 leaves the rotation
  // about the line undetermined.
  {
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
      scatter.noalias() += w(i) * src_c.row(i).transpose() * src_c.row(i);
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> scatter_svd(scatter);
    const Eigen::Vector3d s = scatter_svd.singularValues();
    if (s(1) <= s(0) * 1e-9) {
      throw DegenerateInput("estimate_rigid_transform: collinear points (scatter rank < 2)");
    }
  }

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    cross.noalias() += w(i) * src_c.row(i).transpose() * dst_c.row(i);
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if ((v * u.transpose()).determinant() < 0.0) d(2) = -1.0;
  const Eigen::Matrix3d rot = v * d.asDiagonal() * u.transpose();

  RigidTransform tf;
  tf.rotation = rot;
  tf.translation = c_dst.transpose() - rot * c_src.transpose();

  double sq_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d r =
        rot * src.row(i).transpose() + tf.translation - dst.row(i).transpose();
    sq_sum += w(i) * r.squaredNorm();
  }
  return {tf, std::sqrt(sq_sum / w_sum)};
}

Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2) = -1.0;
  return svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
}

double geodesic_angle(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Eigen::Matrix3d rotation_from_euler(double roll, double pitch, double yaw) {
  const double ca = std::cos(roll), sa = std::sin(roll);
  const double cb = std::cos(pitch), sb = std::sin(pitch);
  const double cg = std::cos(yaw), sg = std::sin(yaw);
  Eigen::Matrix3d r;
  r << cg * cb, cg * sb * sa - sg * ca, cg * sb * ca + sg * sa,
       sg * cb, sg * sb * sa + cg * ca, sg * sb * ca - cg * sa,
       -sb,     cb * sa,                cb * ca;
  return r;
}

EulerAngles euler_from_rotation(const Eigen::Matrix3d& r) {
  const double ortho_err = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  if (ortho_err > 1e-4 || r.determinant() < 0.0) {
    throw NotARotation("euler_from_rotation: input fails orthonormality");
  }

  EulerAngles e;
  const double cb = std::sqrt(r(2, 1) * r(2, 1) + r(2, 2) * r(2, 2));
  e.pitch = std::atan2(-r(2, 0), cb);
  if (cb < 1e-10) {
    // Gimbal lock: fold the x-rotation into yaw.
    e.roll = 0.0;
    e.yaw = std::atan2(-r(0, 1), r(1, 1));
  } else {
    e.roll = std::atan2(r(2, 1), r(2, 2));
    e.yaw = std::atan2(r(1, 0), r(0, 0));
  }
  return e;
}

}  // namespace egotraj
