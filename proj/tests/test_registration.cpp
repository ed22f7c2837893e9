#include <doctest.h>

#include <numbers>

#include "egotraj/errors.hpp"
#include "egotraj/registration.hpp"
#include "egotraj/synth.hpp"
#include "helpers.hpp"

using namespace egotraj;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

SceneSpec base_spec(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.frames = 5;
  spec.n_object_points = 60;
  spec.n_scene_points = 400;
  return spec;
}

}  // namespace

TEST_CASE("static scene registers to identity") {
  SceneSpec spec = base_spec(1);
  const SynthEpisode synth = generate_episode(spec);
  const auto transforms = register_to_start_frame(synth.episode.frames, RegistrationConfig{});
  REQUIRE(transforms.size() == 5);
  for (const RigidTransform& t : transforms) {
    CHECK((t.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-6);
    CHECK(t.translation.norm() < 1e-6);
  }
}

TEST_CASE("camera translating 1 cm per frame is recovered from the scene") {
  SceneSpec spec = base_spec(2);
  spec.camera_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d(-0.04, 0, 0)};
  const SynthEpisode synth = generate_episode(spec);
  const auto transforms = register_to_start_frame(synth.episode.frames, RegistrationConfig{});
  // Oracle: the generating transform chain.
  const RigidTransform expected = synth.gt.cam_to_start.back();
  CHECK((transforms.back().translation - expected.translation).norm() < 1e-4);
  CHECK((transforms.back().translation - Eigen::Vector3d(-0.04, 0, 0)).norm() < 1e-4);
}

TEST_CASE("disjoint scenes fail loudly") {
  SceneSpec spec = base_spec(3);
  spec.failure_mode = FailureMode::low_overlap;
  const SynthEpisode synth = generate_episode(spec);
  CHECK_THROWS_AS(register_to_start_frame(synth.episode.frames, RegistrationConfig{}),
                  RegistrationFailed);
}

TEST_CASE("small scene cloud fails the precondition") {
  SceneSpec spec = base_spec(4);
  spec.n_scene_points = 20;
  const SynthEpisode synth = generate_episode(spec);
  CHECK_THROWS_AS(register_to_start_frame(synth.episode.frames, RegistrationConfig{}),
                  RegistrationFailed);
}

TEST_CASE("composed chain agrees with direct registration on noiseless scenes") {
  SceneSpec spec = base_spec(5);
  spec.camera_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d(0.02, 0.01, -0.015)};
  spec.camera_motion.rotation_axis = Eigen::Vector3d(0, 1, 0);
  spec.camera_motion.rotation_rate_rad = 0.2 * kDeg;
  const SynthEpisode synth = generate_episode(spec);
  const RegistrationConfig config;
  const auto chained = register_to_start_frame(synth.episode.frames, config);
  const IcpResult direct =
      icp_align(synth.episode.frames[4].scene_points, synth.episode.frames[0].scene_points,
                config, synth.episode.frames[4].scene_colors,
                synth.episode.frames[0].scene_colors);
  CHECK((chained[4].translation - direct.transform.translation).norm() <
        2.0 * config.convergence_tol);
  CHECK(geodesic_angle(chained[4].rotation, direct.transform.rotation) < 1e-4);
}

TEST_CASE("static object and camera extract a constant trajectory") {
  SceneSpec spec = base_spec(6);
  spec.frames = 8;
  const SynthEpisode synth = generate_episode(spec);
  const auto transforms = register_to_start_frame(synth.episode.frames, RegistrationConfig{});
  const ExtractionResult res = extract_pose_sequence(synth.episode.frames, transforms);
  REQUIRE(res.trajectory.length() == 8);
  CHECK(!res.degenerate);
  for (const Pose6DoF& p : res.trajectory.poses) {
    CHECK((p.position - res.trajectory.poses[0].position).norm() < 1e-9);
    CHECK((p.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
  }
}

TEST_CASE("translating object yields an arithmetic position sequence") {
  SceneSpec spec = base_spec(7);
  spec.frames = 10;
  spec.object_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d(0.09, 0, 0)};
  const SynthEpisode synth = generate_episode(spec);
  const auto transforms = register_to_start_frame(synth.episode.frames, RegistrationConfig{});
  const ExtractionResult res = extract_pose_sequence(synth.episode.frames, transforms);
  REQUIRE(res.trajectory.length() == 10);
  double travel = 0.0;
  for (int t = 1; t < 10; ++t) {
    const Eigen::Vector3d gap = res.trajectory.poses[static_cast<std::size_t>(t)].position -
                                res.trajectory.poses[static_cast<std::size_t>(t - 1)].position;
    travel += gap.norm();
    CHECK((gap - Eigen::Vector3d(0.01, 0, 0)).norm() < 1e-9);
    CHECK((res.trajectory.poses[static_cast<std::size_t>(t)].rotation -
           Eigen::Matrix3d::Identity())
              .norm() < 1e-9);
  }
  CHECK(travel == doctest::Approx(0.09).epsilon(1e-9));
}

TEST_CASE("rotating object accumulates the generating rotation") {
  SceneSpec spec = base_spec(8);
  spec.frames = 10;
  spec.object_motion.rotation_axis = Eigen::Vector3d(0, 0, 1);
  spec.object_motion.rotation_rate_rad = 5.0 * kDeg;
  const SynthEpisode synth = generate_episode(spec);
  const auto transforms = register_to_start_frame(synth.episode.frames, RegistrationConfig{});
  const ExtractionResult res = extract_pose_sequence(synth.episode.frames, transforms);
  const double angle_deg =
      geodesic_angle(res.trajectory.poses.back().rotation, Eigen::Matrix3d::Identity()) / kDeg;
  CHECK(std::abs(angle_deg - 45.0) < 0.1);
}

TEST_CASE("extraction marks degenerate object clouds instead of aborting") {
  SceneSpec spec = base_spec(9);
  SynthEpisode synth = generate_episode(spec);
  // Collapse every object cloud onto a line: rotation becomes unobservable.
  for (TrackedFrame& f : synth.episode.frames) {
    for (Eigen::Index i = 0; i < f.object_points.rows(); ++i) {
      f.object_points.row(i) = Eigen::RowVector3d(0.001 * static_cast<double>(i), 0, 1.0);
    }
  }
  const auto transforms = register_to_start_frame(synth.episode.frames, RegistrationConfig{});
  const ExtractionResult res = extract_pose_sequence(synth.episode.frames, transforms);
  CHECK(res.degenerate);
  CHECK(res.trajectory.length() == spec.frames);
}

TEST_CASE("extract_pose_sequence positions are equivariant under a rigid change of frame") {
  SceneSpec spec = base_spec(10);
  spec.object_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d(0.05, 0.02, -0.01)};
  spec.object_motion.rotation_rate_rad = 2.0 * kDeg;
  spec.camera_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d(0.02, 0, 0.01)};
  SynthEpisode synth = generate_episode(spec);
  const auto base_transforms = synth.gt.cam_to_start;
  const ExtractionResult base = extract_pose_sequence(synth.episode.frames, base_transforms);

  Rng rng(77);
  const RigidTransform g{egotraj::test::random_rotation(rng), Eigen::Vector3d(0.4, -1.2, 0.3)};
  SynthEpisode moved = synth;
  std::vector<RigidTransform> moved_transforms(base_transforms.size());
  for (std::size_t t = 0; t < moved.episode.frames.size(); ++t) {
    moved.episode.frames[t].object_points = g.apply(moved.episode.frames[t].object_points);
    moved_transforms[t] = g.compose(base_transforms[t]).compose(g.inverse());
  }
  const ExtractionResult res = extract_pose_sequence(moved.episode.frames, moved_transforms);
  for (std::size_t t = 0; t < res.trajectory.poses.size(); ++t) {
    CHECK((res.trajectory.poses[t].position - g.apply(base.trajectory.poses[t].position)).norm() <
          1e-9);
    CHECK((res.trajectory.poses[t].rotation -
           g.rotation * base.trajectory.poses[t].rotation * g.rotation.transpose())
              .norm() < 1e-9);
  }
}

TEST_CASE("length mismatch between frames and transforms throws") {
  SceneSpec spec = base_spec(11);
  const SynthEpisode synth = generate_episode(spec);
  std::vector<RigidTransform> transforms(3);
  CHECK_THROWS_AS(extract_pose_sequence(synth.episode.frames, transforms), LengthMismatch);
}
