#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

namespace egotraj {

/// Row-major point blocks: one point per row, contiguous in memory.
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// One timestep of an object trajectory, expressed in the camera frame of the
/// action start. Rotation is kept as a full matrix internally; Euler angles
/// and rot6D exist only at I/O and action-encoding boundaries.
struct Pose6DoF {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  int timestamp_index = 1;
};

struct Trajectory {
  std::vector<Pose6DoF> poses;
  double frame_rate_hz = 30.0;

  int length() const { return static_cast<int>(poses.size()); }
};

/// Tracker output for a single frame: the object point cloud (with stable
/// point indices across frames), an optional scene cloud used for
/// registration, and image-plane tracks used by the curation filters.
struct TrackedFrame {
  Points3 object_points;   // N x 3, meters, this frame's camera coordinates
  Points3 object_colors;   // N x 3, RGB in [0,1]; empty when unavailable
  Points3 scene_points;    // M x 3; empty when unavailable
  Points3 scene_colors;    // M x 3; empty when unavailable
  Points2 object_track_2d; // K x 2, pixels
  std::vector<Points2> background_tracks_2d;  // L tracks, each K' x 2, pixels
  int frame_index = 0;
};

enum class Verdict { kept, rejected_travel, rejected_bgts, rejected_degenerate };

const char* to_string(Verdict v);
std::optional<Verdict> verdict_from_string(const std::string& s);

/// Per-episode filter measurements and the keep/reject decision.
/// A missing bgts value means the object track had insufficient motion
/// (or no usable tracks at all) and the similarity is undefined.
struct CurationReport {
  double travel_distance_m = 0.0;
  std::optional<double> bgts;
  Verdict verdict = Verdict::kept;
  double delta_td_m = 0.0;
  double delta_bgts = 0.0;
  bool smoothed = false;
  std::string reason;
};

struct Episode {
  std::string id;
  std::string instruction;
  std::string verb;
  std::string object;
  std::vector<TrackedFrame> frames;
  std::optional<Trajectory> trajectory;
  std::optional<CurationReport> curation;
  std::string source_dataset;
  double frame_rate_hz = 30.0;
};

/// One action step: Eq.-style 9-dim displacement [dx, dy, dz, d(rot6D)]
/// plus the absolute pose at t in position+rot6D form as proprioception.
/// `values`/`state` hold the normalized (and possibly padded) vectors once
/// normalization or merging ran; until then they are empty.
struct ActionRecord {
  Eigen::VectorXd values;
  Eigen::VectorXd raw_values;
  Eigen::VectorXd state;
  Eigen::VectorXd raw_state;
  std::vector<bool> pad_mask;        // per action dim, false = padded
  std::vector<bool> state_pad_mask;  // per state dim, false = padded
  int t = 1;
  std::string source;
};

/// Per-dimension normalization statistics.
struct DimStats {
  Eigen::VectorXd q01;
  Eigen::VectorXd q99;
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  int dim() const { return static_cast<int>(q01.size()); }
};

struct NormStats {
  DimStats action;
  DimStats state;
  std::string dataset_tag;
};

/// Checks every type invariant and returns one descriptor per violation.
/// Total function: never throws, an empty result means the episode is valid.
std::vector<std::string> validate_episode(const Episode& ep);

/// Per-episode image-plane sequences assembled from per-frame tracks.
/// The object position at frame t is the mean of that frame's tracked object
/// points; background track l follows the mean of its K' points.
Points2 object_image_track(const std::vector<TrackedFrame>& frames);
std::vector<Points2> background_image_tracks(const std::vector<TrackedFrame>& frames);

}  // namespace egotraj
