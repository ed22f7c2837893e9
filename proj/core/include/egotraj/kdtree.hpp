#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "egotraj/types.hpp"

namespace egotraj {

/// Static 3D k-d tree for nearest-neighbor correspondence search.
/// Construction and queries are fully deterministic for a fixed input.
class KdTree3 {
 public:
  struct Hit {
    Eigen::Index index = -1;
    double sq_dist = 0.0;
  };

  explicit KdTree3(const Points3& points);

  /// Nearest point within max_dist of q, or nullopt if none qualifies.
  std::optional<Hit> nearest(const Eigen::Vector3d& q, double max_dist) const;

  Eigen::Index size() const { return points_.rows(); }

 private:
  struct Node {
    Eigen::Index point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(std::vector<Eigen::Index>& idx, int begin, int end, int depth);
  void search(int node, const Eigen::Vector3d& q, Hit& best) const;

  Points3 points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace egotraj
