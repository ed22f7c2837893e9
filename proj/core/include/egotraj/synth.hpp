#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "egotraj/geometry.hpp"
#include "egotraj/types.hpp"

namespace egotraj {

/// Parametric SE(3) path: piecewise-linear translation over the episode's
/// normalized time plus a constant axis-angle rotation rate per frame.
struct MotionPath {
  std::vector<Eigen::Vector3d> translation_knots;  // empty or single knot = static
  Eigen::Vector3d rotation_axis = Eigen::Vector3d::UnitZ();
  double rotation_rate_rad = 0.0;  // per frame

  Eigen::Vector3d translation_at(int frame, int total_frames) const;
  Eigen::Matrix3d rotation_at(int frame) const;
};

enum class FailureMode { none, registration_jump, static_object, low_overlap };

const char* to_string(FailureMode m);
std::optional<FailureMode> failure_mode_from_string(const std::string& s);

/// Everything needed to generate one episode with known ground truth.
/// Identical spec + seed reproduces the episode bit for bit.
struct SceneSpec {
  int n_object_points = 120;
  int n_scene_points = 500;
  MotionPath object_motion;
  MotionPath camera_motion;
  double noise_sigma_m = 0.0;
  FailureMode failure_mode = FailureMode::none;
  int failure_frame = 5;          // 1-based, registration_jump onset
  double failure_magnitude_m = 1.0;
  int frames = 20;
  std::uint64_t seed = 0;
  double frame_rate_hz = 30.0;
  int n_background_tracks = 8;
  std::string instruction = "pick up the box";
  std::string verb = "pick";
  std::string object = "box";
  std::string source_dataset = "synth";

  std::string to_json() const;
  static SceneSpec from_json(const std::string& text);
};

struct GroundTruth {
  Trajectory poses;                        // start-frame coordinates
  std::vector<RigidTransform> cam_to_start;  // frame-t camera -> start camera
};

struct SynthEpisode {
  Episode episode;
  GroundTruth gt;
};

/// Pinhole intrinsics used for the generated 2D tracks.
inline constexpr double kSynthFocalPx = 500.0;
inline constexpr double kSynthCx = 320.0;
inline constexpr double kSynthCy = 240.0;

/// Generates an episode: colored object points on a box surface moved by
/// object_motion, a static scene shell observed from the moving camera, 3D
/// Gaussian noise, pinhole-projected 2D tracks, and the requested failure
/// mode. Throws InvalidSpec on malformed specs.
SynthEpisode generate_episode(const SceneSpec& spec);

struct RecoveryMetrics {
  double ate_rmse_m = 0.0;
  double max_rot_geodesic_deg = 0.0;
};

/// Positional RMSE and worst-case rotation geodesic angle between the ground
/// truth and a recovered trajectory (both already in start-frame
/// coordinates). Throws LengthMismatch when lengths differ.
RecoveryMetrics evaluate_recovery(const GroundTruth& gt, const Trajectory& recovered);

}  // namespace egotraj
