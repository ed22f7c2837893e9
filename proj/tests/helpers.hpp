#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "egotraj/rng.hpp"
#include "egotraj/types.hpp"

namespace egotraj::test {

inline Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  while (q.norm() < 1e-9) q = Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized().toRotationMatrix();
}

inline Points3 random_cloud(Rng& rng, int n, double scale = 1.0) {
  Points3 pts(n, 3);
  for (int i = 0; i < n; ++i) {
    pts.row(i) = Eigen::RowVector3d(rng.uniform(-scale, scale), rng.uniform(-scale, scale),
                                    rng.uniform(-scale, scale));
  }
  return pts;
}

inline Trajectory line_trajectory(int t_count, const Eigen::Vector3d& step,
                                  const Eigen::Vector3d& start = Eigen::Vector3d::Zero()) {
  Trajectory traj;
  traj.poses.resize(static_cast<std::size_t>(t_count));
  for (int t = 0; t < t_count; ++t) {
    traj.poses[static_cast<std::size_t>(t)].position = start + static_cast<double>(t) * step;
    traj.poses[static_cast<std::size_t>(t)].timestamp_index = t + 1;
  }
  return traj;
}

/// Scratch directory under the system temp root, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("egotraj-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::string out;
  std::ifstream in(p, std::ios::binary);
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    out.append(buf, static_cast<std::size_t>(in.gcount()));
  }
  return out;
}

}  // namespace egotraj::test
