#include "egotraj/synth.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "egotraj/errors.hpp"
#include "egotraj/rng.hpp"

namespace egotraj {

using nlohmann::json;

namespace {

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n < 1e-12 || angle == 0.0) return Eigen::Matrix3d::Identity();
  const Eigen::Vector3d a = axis / n;
  Eigen::Matrix3d k;
  k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

constexpr double kCameraBaseZ = -1.5;
const Eigen::Vector3d kObjectHalfExtent(0.06, 0.04, 0.05);

Eigen::Vector2d project(const Eigen::Vector3d& p_cam) {
  const double z = std::max(p_cam.z(), 1e-6);
  return {kSynthFocalPx * p_cam.x() / z + kSynthCx, kSynthFocalPx * p_cam.y() / z + kSynthCy};
}

}  // namespace

Eigen::Vector3d MotionPath::translation_at(int frame, int total_frames) const {
  if (translation_knots.empty()) return Eigen::Vector3d::Zero();
  if (translation_knots.size() == 1 || total_frames < 2) return translation_knots.front();
  const double s = static_cast<double>(frame) / static_cast<double>(total_frames - 1);
  const double pos = s * static_cast<double>(translation_knots.size() - 1);
  const std::size_t lo = std::min(static_cast<std::size_t>(pos), translation_knots.size() - 2);
  const double frac = pos - static_cast<double>(lo);
  return (1.0 - frac) * translation_knots[lo] + frac * translation_knots[lo + 1];
}

Eigen::Matrix3d MotionPath::rotation_at(int frame) const {
  return axis_angle(rotation_axis, rotation_rate_rad * static_cast<double>(frame));
}

const char* to_string(FailureMode m) {
  switch (m) {
    case FailureMode::none:
      return "none";
    case FailureMode::registration_jump:
      return "registration_jump";
    case FailureMode::static_object:
      return "static_object";
    case FailureMode::low_overlap:
      return "low_overlap";
  }
  return "none";
}

std::optional<FailureMode> failure_mode_from_string(const std::string& s) {
  if (s == "none") return FailureMode::none;
  if (s == "registration_jump") return FailureMode::registration_jump;
  if (s == "static_object") return FailureMode::static_object;
  if (s == "low_overlap") return FailureMode::low_overlap;
  return std::nullopt;
}

namespace {

json motion_to_json(const MotionPath& m) {
  json knots = json::array();
  for (const Eigen::Vector3d& k : m.translation_knots) {
    knots.push_back(json::array({k.x(), k.y(), k.z()}));
  }
  return json{{"translation_knots", knots},
              {"rotation_axis", json::array({m.rotation_axis.x(), m.rotation_axis.y(),
                                             m.rotation_axis.z()})},
              {"rotation_rate_rad", m.rotation_rate_rad}};
}

MotionPath motion_from_json(const json& j) {
  MotionPath m;
  for (const json& k : j.value("translation_knots", json::array())) {
    m.translation_knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>(),
                                     k.at(2).get<double>());
  }
  if (j.contains("rotation_axis")) {
    const json& a = j["rotation_axis"];
    m.rotation_axis = Eigen::Vector3d(a.at(0), a.at(1), a.at(2));
  }
  m.rotation_rate_rad = j.value("rotation_rate_rad", 0.0);
  return m;
}

}  // namespace

std::string SceneSpec::to_json() const {
  json j{{"n_object_points", n_object_points},
         {"n_scene_points", n_scene_points},
         {"object_motion", motion_to_json(object_motion)},
         {"camera_motion", motion_to_json(camera_motion)},
         {"noise_sigma_m", noise_sigma_m},
         {"failure_mode", egotraj::to_string(failure_mode)},
         {"failure_frame", failure_frame},
         {"failure_magnitude_m", failure_magnitude_m},
         {"frames", frames},
         {"seed", seed},
         {"frame_rate_hz", frame_rate_hz},
         {"n_background_tracks", n_background_tracks},
         {"instruction", instruction},
         {"verb", verb},
         {"object", object},
         {"source_dataset", source_dataset}};
  return j.dump(2);
}

SceneSpec SceneSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("scene spec is not valid JSON: ") + e.what());
  }
  SceneSpec s;
  s.n_object_points = j.value("n_object_points", s.n_object_points);
  s.n_scene_points = j.value("n_scene_points", s.n_scene_points);
  if (j.contains("object_motion")) s.object_motion = motion_from_json(j["object_motion"]);
  if (j.contains("camera_motion")) s.camera_motion = motion_from_json(j["camera_motion"]);
  s.noise_sigma_m = j.value("noise_sigma_m", s.noise_sigma_m);
  if (j.contains("failure_mode")) {
    const auto mode = failure_mode_from_string(j["failure_mode"].get<std::string>());
    if (!mode) throw InvalidSpec("unknown failure_mode: " + j["failure_mode"].get<std::string>());
    s.failure_mode = *mode;
  }
  s.failure_frame = j.value("failure_frame", s.failure_frame);
  s.failure_magnitude_m = j.value("failure_magnitude_m", s.failure_magnitude_m);
  s.frames = j.value("frames", s.frames);
  s.seed = j.value("seed", s.seed);
  s.frame_rate_hz = j.value("frame_rate_hz", s.frame_rate_hz);
  s.n_background_tracks = j.value("n_background_tracks", s.n_background_tracks);
  s.instruction = j.value("instruction", s.instruction);
  s.verb = j.value("verb", s.verb);
  s.object = j.value("object", s.object);
  s.source_dataset = j.value("source_dataset", s.source_dataset);
  return s;
}

SynthEpisode generate_episode(const SceneSpec& spec) {
  if (spec.n_object_points < 3) throw InvalidSpec("n_object_points must be >= 3");
  if (spec.n_scene_points < 0) throw InvalidSpec("n_scene_points must be >= 0");
  if (spec.frames < 1) throw InvalidSpec("frames must be >= 1");
  if (spec.noise_sigma_m < 0.0) throw InvalidSpec("noise_sigma_m must be >= 0");
  if (!(spec.frame_rate_hz > 0.0)) throw InvalidSpec("frame_rate_hz must be positive");
  if (spec.n_background_tracks < 0 || spec.n_background_tracks > spec.n_scene_points) {
    throw InvalidSpec("n_background_tracks must be in [0, n_scene_points]");
  }
  if (spec.failure_mode == FailureMode::registration_jump) {
    if (spec.failure_frame < 1 || spec.failure_frame > spec.frames) {
      throw InvalidSpec("failure_frame must be in [1, frames]");
    }
    if (!(spec.failure_magnitude_m > 0.0)) {
      throw InvalidSpec("failure_magnitude_m must be positive");
    }
  }

  Rng rng(spec.seed);
  const int t_count = spec.frames;
  const bool static_object = spec.failure_mode == FailureMode::static_object;

  // Object: points on a box surface, colored by surface position.
  Points3 object_base(spec.n_object_points, 3);
  Points3 object_colors(spec.n_object_points, 3);
  for (int i = 0; i < spec.n_object_points; ++i) {
    const int face = static_cast<int>(rng.below(6));
    const int axis = face / 2;
    const double side = (face % 2 == 0) ? -1.0 : 1.0;
    Eigen::Vector3d p;
    for (int c = 0; c < 3; ++c) p(c) = rng.uniform(-1.0, 1.0) * kObjectHalfExtent(c);
    p(axis) = side * kObjectHalfExtent(axis);
    object_base.row(i) = p.transpose();
    for (int c = 0; c < 3; ++c) {
      object_colors(i, c) = 0.5 + 0.5 * p(c) / kObjectHalfExtent(c);
    }
  }
  const Eigen::Vector3d object_centroid = object_base.colwise().mean().transpose();

  // Scene: a static shell of points around the workspace, in front of the
  // camera, with a hole where the object lives.
  Points3 scene_world(spec.n_scene_points, 3);
  Points3 scene_colors(spec.n_scene_points, 3);
  for (int i = 0; i < spec.n_scene_points; ++i) {
    Eigen::Vector3d p;
    do {
      p = Eigen::Vector3d(rng.uniform(-1.2, 1.2), rng.uniform(-1.0, 1.0),
                          rng.uniform(-0.4, 0.9));
    } while (p.norm() < 0.35);
    scene_world.row(i) = p.transpose();
    scene_colors.row(i) = Eigen::RowVector3d(rng.uniform(), rng.uniform(), rng.uniform());
  }

  // Per-frame camera poses (camera-to-world) and the registration-jump
  // offsets the scene observations will be rendered with. From the onset
  // frame on, each frame carries an independent offset of the configured
  // magnitude, so the scene keeps contradicting the true camera path the
  // way a lost registration lock does.
  std::vector<Eigen::Matrix3d> cam_rot(static_cast<std::size_t>(t_count));
  std::vector<Eigen::Vector3d> cam_pos(static_cast<std::size_t>(t_count));
  std::vector<Eigen::Vector3d> jump(static_cast<std::size_t>(t_count), Eigen::Vector3d::Zero());
  const Eigen::Vector3d cam_base(0.0, 0.0, kCameraBaseZ);
  for (int t = 0; t < t_count; ++t) {
    cam_rot[static_cast<std::size_t>(t)] = spec.camera_motion.rotation_at(t);
    cam_pos[static_cast<std::size_t>(t)] =
        cam_base + spec.camera_motion.translation_at(t, t_count);
    if (spec.failure_mode == FailureMode::registration_jump && t + 1 >= spec.failure_frame) {
      jump[static_cast<std::size_t>(t)] = spec.failure_magnitude_m * rng.unit_vector();
    }
  }

  auto world_to_cam = [&](int t, const Eigen::Vector3d& offset,
                          const Eigen::Vector3d& p) -> Eigen::Vector3d {
    return cam_rot[static_cast<std::size_t>(t)].transpose() *
           (p - (cam_pos[static_cast<std::size_t>(t)] + offset));
  };

  SynthEpisode out;
  Episode& ep = out.episode;
  ep.id = "synth-" + [s = spec.seed]() {
    static const char* digits = "0123456789abcdef";
    std::string h(16, '0');
    std::uint64_t v = s;
    for (int i = 15; i >= 0; --i) {
      h[static_cast<std::size_t>(i)] = digits[v & 0xf];
      v >>= 4;
    }
    return h;
  }();
  ep.instruction = spec.instruction;
  ep.verb = spec.verb;
  ep.object = spec.object;
  ep.source_dataset = spec.source_dataset;
  ep.frame_rate_hz = spec.frame_rate_hz;
  ep.frames.resize(static_cast<std::size_t>(t_count));

  out.gt.poses.frame_rate_hz = spec.frame_rate_hz;
  out.gt.poses.poses.resize(static_cast<std::size_t>(t_count));
  out.gt.cam_to_start.resize(static_cast<std::size_t>(t_count));

  // Start-frame camera pose as the scene observations imply it.
  const Eigen::Matrix3d start_rot = cam_rot[0];
  const Eigen::Vector3d start_pos = cam_pos[0] + jump[0];
  const Eigen::Matrix3d obj_rot0 = static_object ? Eigen::Matrix3d::Identity()
                                                 : spec.object_motion.rotation_at(0);

  for (int t = 0; t < t_count; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    TrackedFrame& frame = ep.frames[ti];
    frame.frame_index = t;

    const Eigen::Matrix3d obj_rot =
        static_object ? Eigen::Matrix3d::Identity() : spec.object_motion.rotation_at(t);
    const Eigen::Vector3d obj_trans =
        static_object ? Eigen::Vector3d::Zero() : spec.object_motion.translation_at(t, t_count);

    // Object observed from the true camera pose.
    frame.object_points.resize(spec.n_object_points, 3);
    for (int i = 0; i < spec.n_object_points; ++i) {
      const Eigen::Vector3d world = obj_rot * object_base.row(i).transpose() + obj_trans;
      frame.object_points.row(i) =
          world_to_cam(t, Eigen::Vector3d::Zero(), world).transpose();
    }
    frame.object_colors = object_colors;

    // Scene observed from the (possibly jump-corrupted) camera pose.
    Eigen::Vector3d scene_shift = Eigen::Vector3d::Zero();
    if (spec.failure_mode == FailureMode::low_overlap) {
      scene_shift = Eigen::Vector3d(12.0 * t, 0.0, 0.0);
    }
    frame.scene_points.resize(spec.n_scene_points, 3);
    for (int i = 0; i < spec.n_scene_points; ++i) {
      const Eigen::Vector3d world = scene_world.row(i).transpose() + scene_shift;
      frame.scene_points.row(i) = world_to_cam(t, jump[ti], world).transpose();
    }
    frame.scene_colors = scene_colors;

    if (spec.noise_sigma_m > 0.0) {
      for (Eigen::Index i = 0; i < frame.object_points.rows(); ++i) {
        for (int c = 0; c < 3; ++c) frame.object_points(i, c) += spec.noise_sigma_m * rng.normal();
      }
      for (Eigen::Index i = 0; i < frame.scene_points.rows(); ++i) {
        for (int c = 0; c < 3; ++c) frame.scene_points(i, c) += spec.noise_sigma_m * rng.normal();
      }
    }

    frame.object_track_2d.resize(spec.n_object_points, 2);
    for (int i = 0; i < spec.n_object_points; ++i) {
      frame.object_track_2d.row(i) =
          project(frame.object_points.row(i).transpose()).transpose();
    }
    frame.background_tracks_2d.resize(static_cast<std::size_t>(spec.n_background_tracks));
    for (int l = 0; l < spec.n_background_tracks; ++l) {
      Points2 track(1, 2);
      track.row(0) = project(frame.scene_points.row(l).transpose()).transpose();
      frame.background_tracks_2d[static_cast<std::size_t>(l)] = track;
    }

    // Ground truth: what perfect registration of the scene observations
    // followed by centroid/SVD extraction would produce.
    RigidTransform to_start;
    to_start.rotation = start_rot.transpose() * cam_rot[ti];
    to_start.translation = start_rot.transpose() * ((cam_pos[ti] + jump[ti]) - start_pos);
    out.gt.cam_to_start[ti] = to_start;

    const Eigen::Vector3d centroid_world = obj_rot * object_centroid + obj_trans;
    Pose6DoF& pose = out.gt.poses.poses[ti];
    pose.timestamp_index = t + 1;
    pose.position = start_rot.transpose() * (centroid_world + jump[ti] - start_pos);
    pose.rotation = start_rot.transpose() * obj_rot * obj_rot0.transpose() * start_rot;
  }

  return out;
}

RecoveryMetrics evaluate_recovery(const GroundTruth& gt, const Trajectory& recovered) {
  if (gt.poses.poses.size() != recovered.poses.size()) {
    throw LengthMismatch("evaluate_recovery: trajectory lengths differ");
  }
  RecoveryMetrics m;
  if (recovered.poses.empty()) return m;
  double sq_sum = 0.0;
  double max_angle = 0.0;
  for (std::size_t t = 0; t < recovered.poses.size(); ++t) {
    sq_sum += (gt.poses.poses[t].position - recovered.poses[t].position).squaredNorm();
    max_angle =
        std::max(max_angle, geodesic_angle(gt.poses.poses[t].rotation, recovered.poses[t].rotation));
  }
  m.ate_rmse_m = std::sqrt(sq_sum / static_cast<double>(recovered.poses.size()));
  m.max_rot_geodesic_deg = max_angle * 180.0 / std::numbers::pi;
  return m;
}

}  // namespace egotraj
