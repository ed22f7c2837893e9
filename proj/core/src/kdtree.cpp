#include "egotraj/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace egotraj {

KdTree3::KdTree3(const Points3& points) : points_(points) {
  const Eigen::Index n = points_.rows();
  if (n == 0) return;
  nodes_.reserve(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  root_ = build(idx, 0, static_cast<int>(n), 0);
}

int KdTree3::build(std::vector<Eigen::Index>& idx, int begin, int end, int depth) {
  if (begin >= end) return -1;
  const int axis = depth % 3;
  const int mid = begin + (end - begin) / 2;
  std::nth_element(idx.begin() + begin, idx.begin() + mid, idx.begin() + end,
                   [this, axis](Eigen::Index a, Eigen::Index b) {
                     const double ca = points_(a, axis), cb = points_(b, axis);
                     if (ca != cb) return ca < cb;
                     return a < b;  // stable tie-break keeps the tree deterministic
                   });
  const int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back({idx[static_cast<std::size_t>(mid)], axis, -1, -1});
  const int left = build(idx, begin, mid, depth + 1);
  const int right = build(idx, mid + 1, end, depth + 1);
  nodes_[static_cast<std::size_t>(node_id)].left = left;
  nodes_[static_cast<std::size_t>(node_id)].right = right;
  return node_id;
}

std::optional<KdTree3::Hit> KdTree3::nearest(const Eigen::Vector3d& q, double max_dist) const {
  if (root_ < 0) return std::nullopt;
  Hit best;
  best.sq_dist = max_dist * max_dist;
  best.index = -1;
  search(root_, q, best);
  if (best.index < 0) return std::nullopt;
  return best;
}

void KdTree3::search(int node_id, const Eigen::Vector3d& q, Hit& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  const Eigen::Vector3d p = points_.row(node.point).transpose();
  const double sq = (p - q).squaredNorm();
  if (sq < best.sq_dist || (sq == best.sq_dist && best.index >= 0 && node.point < best.index)) {
    best.sq_dist = sq;
    best.index = node.point;
  }
  const double diff = q(node.axis) - points_(node.point, node.axis);
  const int near_child = diff <= 0.0 ? node.left : node.right;
  const int far_child = diff <= 0.0 ? node.right : node.left;
  if (near_child >= 0) search(near_child, q, best);
  if (far_child >= 0 && diff * diff <= best.sq_dist) search(far_child, q, best);
}

}  // namespace egotraj
