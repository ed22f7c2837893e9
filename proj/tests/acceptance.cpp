// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "egotraj/actions.hpp"
#include "egotraj/curation.hpp"
#include "egotraj/datastore.hpp"
#include "egotraj/errors.hpp"
#include "egotraj/geometry.hpp"
#include "egotraj/registration.hpp"
#include "egotraj/rng.hpp"
#include "egotraj/synth.hpp"

using namespace egotraj;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  const Eigen::Vector3d axis = rng.unit_vector();
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Eigen::Matrix3d k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

Points3 random_cloud(Rng& rng, int n) {
  Points3 pts(n, 3);
  for (int i = 0; i < n; ++i) {
    pts.row(i) =
        Eigen::RowVector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  }
  return pts;
}

SceneSpec ego_motion_spec(Rng& rng, std::uint64_t seed, int frames, double noise_sigma) {
  SceneSpec spec;
  spec.seed = seed;
  spec.frames = frames;
  spec.n_object_points = 120;
  spec.n_scene_points = 500;
  spec.noise_sigma_m = noise_sigma;
  // Camera motion within 2 cm and 2 deg per frame.
  const double step_m = rng.uniform(0.005, 0.018);
  spec.camera_motion.translation_knots = {
      Eigen::Vector3d::Zero(), rng.unit_vector() * step_m * (frames - 1)};
  spec.camera_motion.rotation_axis = rng.unit_vector();
  spec.camera_motion.rotation_rate_rad = rng.uniform(0.1, 0.8) * kDeg;
  // A modest manipulation so the recovered trajectory is non-trivial.
  spec.object_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          rng.unit_vector() * 0.1};
  spec.object_motion.rotation_axis = rng.unit_vector();
  spec.object_motion.rotation_rate_rad = rng.uniform(0.0, 1.0) * kDeg;
  return spec;
}

SceneSpec manipulation_spec(Rng& rng, std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.frames = 20;
  spec.n_object_points = 80;
  spec.n_scene_points = 300;
  // Object path: a zigzag of three 13 cm segments (total 39 cm, under the
  // 0.5 m clean-episode envelope). Decorrelation from ego-motion is a
  // property of the population, so the segments must be visible in the
  // image plane (the similarity is 2D) and at an angle to the background
  // flow induced by the camera translation.
  auto mostly_lateral = [&rng]() {
    Eigen::Vector3d v = rng.unit_vector();
    v.z() *= 0.3;
    return v.normalized();
  };
  Eigen::Vector3d cam_dir;
  do {
    cam_dir = mostly_lateral();
  } while (cam_dir.head<2>().norm() < 0.5);
  spec.camera_motion.translation_knots = {Eigen::Vector3d::Zero(), cam_dir * 0.10};
  const Eigen::Vector2d bg_flow = Eigen::Vector2d(-cam_dir.x(), -cam_dir.y()).normalized();

  spec.object_motion.translation_knots.push_back(Eigen::Vector3d::Zero());
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d dir;
    Eigen::Vector2d img;
    do {
      dir = mostly_lateral();
      img = dir.head<2>();
    } while (img.norm() < 0.6 || img.normalized().dot(bg_flow) > 0.3);
    spec.object_motion.translation_knots.push_back(
        spec.object_motion.translation_knots.back() + 0.13 * dir);
  }
  return spec;
}

SceneSpec static_object_spec(Rng& rng, std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.frames = 20;
  spec.n_object_points = 80;
  spec.n_scene_points = 300;
  spec.failure_mode = FailureMode::static_object;
  spec.camera_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          rng.unit_vector() * 0.25};
  return spec;
}

Episode as_curation_input(const SynthEpisode& synth) {
  Episode ep = synth.episode;
  ep.trajectory = synth.gt.poses;
  return ep;
}

// --- criteria -----------------------------------------------------------------

bool criterion_kabsch(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst_rot = 0.0, worst_trans = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Matrix3d r = random_rotation(rng);
    const Eigen::Vector3d t(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Points3 src = random_cloud(rng, 10);
    Points3 dst = src * r.transpose();
    dst.rowwise() += t.transpose();
    const EstimateResult res = estimate_rigid_transform(src, dst);
    worst_rot = std::max(worst_rot, (res.transform.rotation - r).norm());
    worst_trans = std::max(worst_trans, (res.transform.translation - t).norm());
  }
  const double elapsed = seconds_since(start);
  std::ostringstream os;
  os << "worst rotation " << worst_rot << ", worst translation " << worst_trans << ", "
     << elapsed << " s";
  detail = os.str();
  return worst_rot < 1e-9 && worst_trans < 1e-9 && elapsed < 5.0;
}

bool criterion_registration(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2002);
  const RegistrationConfig config;
  double worst_trans = 0.0, worst_rot_deg = 0.0, worst_ate = 0.0;
  const double sigma = 0.002;
  for (int seed = 0; seed < 100; ++seed) {
    // Noiseless: the composed final transform must match the generating chain.
    SceneSpec clean = ego_motion_spec(rng, 40000 + static_cast<std::uint64_t>(seed), 20, 0.0);
    const SynthEpisode clean_ep = generate_episode(clean);
    const auto transforms = register_to_start_frame(clean_ep.episode.frames, config);
    const RigidTransform& expected = clean_ep.gt.cam_to_start.back();
    worst_trans =
        std::max(worst_trans, (transforms.back().translation - expected.translation).norm());
    worst_rot_deg = std::max(
        worst_rot_deg, geodesic_angle(transforms.back().rotation, expected.rotation) / kDeg);

    // Noisy: the recovered trajectory stays within 2 sigma.
    SceneSpec noisy = clean;
    noisy.noise_sigma_m = sigma;
    const SynthEpisode noisy_ep = generate_episode(noisy);
    const auto noisy_transforms = register_to_start_frame(noisy_ep.episode.frames, config);
    const ExtractionResult extracted =
        extract_pose_sequence(noisy_ep.episode.frames, noisy_transforms);
    const RecoveryMetrics metrics = evaluate_recovery(noisy_ep.gt, extracted.trajectory);
    worst_ate = std::max(worst_ate, metrics.ate_rmse_m);
  }
  const double elapsed = seconds_since(start);
  std::ostringstream os;
  os << "noiseless: worst translation " << worst_trans * 1e3 << " mm, worst rotation "
     << worst_rot_deg << " deg; noisy ATE-RMSE worst " << worst_ate * 1e3 << " mm (2 sigma = "
     << 2 * sigma * 1e3 << " mm); " << elapsed << " s";
  detail = os.str();
  return worst_trans < 1e-3 && worst_rot_deg < 0.1 && worst_ate < 2.0 * sigma &&
         elapsed < 60.0;
}

bool criterion_end_to_end(std::string& detail) {
  Rng rng(3003);
  const RegistrationConfig config;
  double worst_ate = 0.0, worst_rot_deg = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    const SceneSpec spec = ego_motion_spec(rng, 50000 + static_cast<std::uint64_t>(seed), 20, 0.0);
    const SynthEpisode synth = generate_episode(spec);
    const auto transforms = register_to_start_frame(synth.episode.frames, config);
    const ExtractionResult extracted =
        extract_pose_sequence(synth.episode.frames, transforms);
    const RecoveryMetrics metrics = evaluate_recovery(synth.gt, extracted.trajectory);
    worst_ate = std::max(worst_ate, metrics.ate_rmse_m);
    worst_rot_deg = std::max(worst_rot_deg, metrics.max_rot_geodesic_deg);
  }
  std::ostringstream os;
  os << "worst ATE-RMSE " << worst_ate << " m, worst rotation geodesic " << worst_rot_deg
     << " deg";
  detail = os.str();
  return worst_ate < 1e-4 && worst_rot_deg < 0.1;
}

bool criterion_bgts(std::string& detail) {
  Rng rng(4004);
  std::vector<Episode> population;
  std::vector<bool> is_static;
  for (int i = 0; i < 100; ++i) {
    population.push_back(as_curation_input(
        generate_episode(static_object_spec(rng, 60000 + static_cast<std::uint64_t>(i)))));
    is_static.push_back(true);
  }
  for (int i = 0; i < 100; ++i) {
    population.push_back(as_curation_input(
        generate_episode(manipulation_spec(rng, 61000 + static_cast<std::uint64_t>(i)))));
    is_static.push_back(false);
  }

  int correct = 0;
  CurationConfig config;
  for (std::size_t i = 0; i < population.size(); ++i) {
    const auto value = bgts(object_image_track(population[i].frames),
                            background_image_tracks(population[i].frames),
                            config.epsilon_motion);
    const bool flagged = value.has_value() && *value > 0.7;
    if (flagged == is_static[i]) ++correct;
  }

  // Kept-set monotonicity across thresholds (subset chain).
  auto kept_set = [&](double delta) {
    std::set<std::string> kept;
    CurationConfig c;
    c.delta_bgts = delta;
    for (const Episode& ep : population) {
      if (curate(ep, c).curation->verdict == Verdict::kept) kept.insert(ep.id);
    }
    return kept;
  };
  const auto at_05 = kept_set(0.5);
  const auto at_07 = kept_set(0.7);
  const auto at_10 = kept_set(1.0);
  const bool chain = std::includes(at_07.begin(), at_07.end(), at_05.begin(), at_05.end()) &&
                     std::includes(at_10.begin(), at_10.end(), at_07.begin(), at_07.end()) &&
                     at_05.size() <= at_07.size() && at_07.size() <= at_10.size();

  std::ostringstream os;
  os << correct << "/200 classified correctly at delta 0.7; kept sets " << at_05.size()
     << " <= " << at_07.size() << " <= " << at_10.size() << " form a subset chain: "
     << (chain ? "yes" : "no");
  detail = os.str();
  return correct >= 190 && chain;
}

bool criterion_travel_filter(std::string& detail) {
  Rng rng(5005);
  CurationConfig config;  // delta_td = 5.0
  int jump_rejected = 0, clean_kept = 0;
  double min_jump_d = 1e9, max_clean_d = 0.0, min_clean_d = 1e9;
  for (int i = 0; i < 100; ++i) {
    SceneSpec spec = manipulation_spec(rng, 70000 + static_cast<std::uint64_t>(i));
    spec.failure_mode = FailureMode::registration_jump;
    spec.failure_frame = 5;
    spec.failure_magnitude_m = 1.0;
    const Episode ep = as_curation_input(generate_episode(spec));
    min_jump_d = std::min(min_jump_d, travel_distance(*ep.trajectory));
    if (curate(ep, config).curation->verdict == Verdict::rejected_travel) ++jump_rejected;
  }
  for (int i = 0; i < 100; ++i) {
    const Episode ep = as_curation_input(
        generate_episode(manipulation_spec(rng, 71000 + static_cast<std::uint64_t>(i))));
    const double d = travel_distance(*ep.trajectory);
    max_clean_d = std::max(max_clean_d, d);
    min_clean_d = std::min(min_clean_d, d);
    const Verdict v = curate(ep, config).curation->verdict;
    if (v == Verdict::kept) ++clean_kept;
  }
  std::ostringstream os;
  os << "recall " << jump_rejected << "/100, clean kept " << clean_kept
     << "/100, min jump D " << min_jump_d << " m, clean D in [" << min_clean_d << ", "
     << max_clean_d << "] m";
  detail = os.str();
  return jump_rejected == 100 && clean_kept == 100 && max_clean_d < 0.5 &&
         (max_clean_d - min_clean_d) <= 2.0;
}

bool criterion_smoothing(std::string& detail) {
  Rng rng(6006);
  const int t_count = 100;
  const int trials = 1000;
  const double sigma = 0.005;
  const Eigen::Vector3d step(0.0002, 0, 0);

  double raw_interior = 0.0, smooth_interior = 0.0;
  double raw_edge = 0.0, smooth_edge = 0.0;       // t = 1, T
  double raw_near = 0.0, smooth_near = 0.0;       // t = 2, T-1
  for (int trial = 0; trial < trials; ++trial) {
    Trajectory clean;
    clean.poses.resize(t_count);
    for (int t = 0; t < t_count; ++t) {
      clean.poses[static_cast<std::size_t>(t)].position = static_cast<double>(t) * step;
      clean.poses[static_cast<std::size_t>(t)].timestamp_index = t + 1;
    }
    Trajectory noisy = clean;
    for (Pose6DoF& p : noisy.poses) {
      p.position += sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    }
    const Trajectory smoothed = smooth_translations(noisy);
    auto tally = [&](int t, double& raw_acc, double& smooth_acc) {
      const Eigen::Vector3d& truth = clean.poses[static_cast<std::size_t>(t)].position;
      raw_acc += (noisy.poses[static_cast<std::size_t>(t)].position - truth).squaredNorm();
      smooth_acc += (smoothed.poses[static_cast<std::size_t>(t)].position - truth).squaredNorm();
    };
    for (int t = 2; t < t_count - 2; ++t) tally(t, raw_interior, smooth_interior);
    tally(0, raw_edge, smooth_edge);
    tally(t_count - 1, raw_edge, smooth_edge);
    tally(1, raw_near, smooth_near);
    tally(t_count - 2, raw_near, smooth_near);
  }
  const double interior = raw_interior / smooth_interior;
  const double edge = raw_edge / smooth_edge;
  const double near = raw_near / smooth_near;
  std::ostringstream os;
  os << "MSE reduction: interior " << interior << " (target 5 +/- 30%), boundary " << edge
     << " (target 3 +/- 30%), near-boundary " << near << " (target 4 +/- 30%)";
  detail = os.str();
  return interior >= 3.5 && interior <= 6.5 && edge >= 2.1 && edge <= 3.9 && near >= 2.8 &&
         near <= 5.2;
}

bool criterion_rot6d(std::string& detail) {
  Rng rng(7007);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d r = random_rotation(rng);
    worst = std::max(worst, (rotation_from_rot6d(rot6d_from_rotation(r)) - r).norm());
  }

  Trajectory traj;
  const int t_count = 200;
  traj.poses.resize(t_count);
  for (int t = 0; t < t_count; ++t) {
    traj.poses[static_cast<std::size_t>(t)].position =
        Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    traj.poses[static_cast<std::size_t>(t)].rotation = random_rotation(rng);
    traj.poses[static_cast<std::size_t>(t)].timestamp_index = t + 1;
  }
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (const ActionRecord& r : to_actions(traj)) acc += r.raw_values.head<3>();
  const double tele_err =
      (acc - (traj.poses.back().position - traj.poses.front().position)).norm();

  std::ostringstream os;
  os << "worst rot6D round trip " << worst << ", telescoping error " << tele_err;
  detail = os.str();
  return worst < 1e-6 && tele_err < 1e-9 * t_count;
}

bool criterion_normalization(std::string& detail) {
  Rng rng(8008);
  DimStats stats;
  stats.q01 = Eigen::VectorXd::Constant(9, -0.4);
  stats.q99 = Eigen::VectorXd::Constant(9, 0.9);
  stats.mean = Eigen::VectorXd::Zero(9);
  stats.std = Eigen::VectorXd::Ones(9);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd v(9);
    for (int k = 0; k < 9; ++k) v(k) = rng.uniform(-0.4, 0.9);
    worst = std::max(worst, (denormalize(normalize(v, stats), stats) - v).norm());
  }

  SourceDataset ours;
  for (int i = 0; i < 8; ++i) {
    ActionRecord r;
    r.t = i + 1;
    r.raw_values = Eigen::VectorXd::Constant(9, 0.1 * i);
    r.raw_state = Eigen::VectorXd::Constant(9, 0.2 * i);
    ours.records.push_back(r);
  }
  ours.stats = compute_norm_stats(ours.records, "ours");
  SourceDataset robot;
  for (int i = 0; i < 5; ++i) {
    ActionRecord r;
    r.t = i + 1;
    r.raw_values = Eigen::VectorXd::Constant(7, 0.3 * i);
    r.raw_state = Eigen::VectorXd::Constant(7, 0.4 * i);
    robot.records.push_back(r);
  }
  robot.stats = compute_norm_stats(robot.records, "robot");
  const MergedDataset merged = merge_datasets({ours, robot});

  bool merge_ok = merged.action_dim == 9 && merged.records.size() == 13 &&
                  merged.per_source_counts.at("ours") == 8 &&
                  merged.per_source_counts.at("robot") == 5;
  for (std::size_t i = 8; i < 13 && merge_ok; ++i) {
    const ActionRecord& r = merged.records[i];
    merge_ok = r.values.size() == 9 && r.pad_mask.size() == 9 && r.pad_mask[6] &&
               !r.pad_mask[7] && !r.pad_mask[8] && r.values(7) == 0.0 && r.values(8) == 0.0;
  }
  std::ostringstream os;
  os << "round trip worst " << worst << ", merged 9+7 dims with correct pad masks: "
     << (merge_ok ? "yes" : "no");
  detail = os.str();
  return worst < 1e-9 && merge_ok;
}

bool criterion_action_mse(std::string& detail) {
  ActionChunk gt;
  gt.actions = Eigen::MatrixXd::Zero(2, 9);
  gt.valid = {true, true};
  ActionChunk pred = gt;
  pred.actions = Eigen::MatrixXd::Ones(2, 9);
  const double identical = action_mse(gt, gt);
  const double fixture = action_mse(pred, gt);
  ActionChunk masked_gt = gt;
  masked_gt.valid = {true, false};
  ActionChunk masked_pred = masked_gt;
  masked_pred.actions.row(1).setConstant(7.0);
  const double masked = action_mse(masked_pred, masked_gt);
  std::ostringstream os;
  os << "identical " << identical << ", fixture " << fixture << " (expect 9), masked "
     << masked;
  detail = os.str();
  return identical == 0.0 && std::abs(fixture - 9.0) < 1e-12 && masked == 0.0;
}

bool criterion_format(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const std::filesystem::path root =
      std::filesystem::temp_directory_path() / "egotraj-acceptance-corpus";
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);

  Rng rng(9009);
  int byte_identical = 0;
  for (int i = 0; i < 1000; ++i) {
    Episode ep;
    ep.id = "corpus-" + std::to_string(i);
    ep.instruction = "move the part";
    ep.verb = "verb-" + std::to_string(i % 17);
    ep.object = "object-" + std::to_string(i % 29);
    ep.source_dataset = "corpus";
    const int t_count = 2 + static_cast<int>(rng.below(6));
    Trajectory traj;
    traj.poses.resize(static_cast<std::size_t>(t_count));
    for (int t = 0; t < t_count; ++t) {
      Pose6DoF& p = traj.poses[static_cast<std::size_t>(t)];
      p.position = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      p.rotation = random_rotation(rng);
      p.timestamp_index = t + 1;
    }
    ep.trajectory = std::move(traj);
    if (rng.below(2) == 0) {
      const int n_points = 3 + static_cast<int>(rng.below(5));
      ep.frames.resize(static_cast<std::size_t>(t_count));
      for (int t = 0; t < t_count; ++t) {
        TrackedFrame& f = ep.frames[static_cast<std::size_t>(t)];
        f.frame_index = t;
        f.object_points = random_cloud(rng, n_points);
        f.object_track_2d.resize(1, 2);
        f.object_track_2d << rng.uniform(0, 640), rng.uniform(0, 480);
        Points2 bg(1, 2);
        bg << rng.uniform(0, 640), rng.uniform(0, 480);
        f.background_tracks_2d = {bg};
      }
    }
    const std::string rel = write_episode(ep, root);
    const Episode back = read_episode(root / rel);
    const std::string rel2 = write_episode(back, root / "second");
    std::ifstream a(root / rel, std::ios::binary), b(root / "second" / rel2, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    if (sa.str() == sb.str()) ++byte_identical;
  }

  // Error fixtures.
  bool bad_magic_ok = false, truncated_ok = false;
  {
    const std::filesystem::path p = root / "badmagic.egtr";
    std::ofstream(p, std::ios::binary) << "XXXX0000";
    try {
      read_episode(p);
    } catch (const BadMagic&) {
      bad_magic_ok = true;
    }
  }
  {
    Episode ep;
    ep.id = "trunc";
    ep.trajectory = Trajectory{};
    ep.trajectory->poses.resize(2);
    ep.trajectory->poses[0].timestamp_index = 1;
    ep.trajectory->poses[1].timestamp_index = 2;
    const std::string rel = write_episode(ep, root);
    std::ifstream in(root / rel, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string bytes = ss.str();
    bytes.resize(30);
    const std::filesystem::path p = root / "truncated.egtr";
    std::ofstream(p, std::ios::binary) << bytes;
    try {
      read_episode(p);
    } catch (const TruncatedFile& e) {
      truncated_ok = e.offset == 30;
    }
  }
  std::filesystem::remove_all(root);

  const double elapsed = seconds_since(start);
  std::ostringstream os;
  os << byte_identical << "/1000 byte-identical round trips, bad magic: "
     << (bad_magic_ok ? "ok" : "missed") << ", truncation offset: "
     << (truncated_ok ? "ok" : "missed") << ", " << elapsed << " s";
  detail = os.str();
  return byte_identical == 1000 && bad_magic_ok && truncated_ok;
}

}  // namespace

int main() {
  const auto suite_start = std::chrono::steady_clock::now();
  struct Criterion {
    int id;
    const char* label;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Kabsch exactness over 1000 random rigid motions", criterion_kabsch},
      {2, "registration under ego-motion (100 seeds, noiseless + 2 mm noise)", criterion_registration},
      {3, "end-to-end noiseless pipeline (synth -> register -> extract)", criterion_end_to_end},
      {4, "BGTS separation at delta 0.7 and threshold monotonicity", criterion_bgts},
      {5, "travel-distance filter: jump recall and clean false positives", criterion_travel_filter},
      {6, "five-frame smoothing variance reduction (interior and boundaries)", criterion_smoothing},
      {7, "rot6D round trip and action telescoping", criterion_rot6d},
      {8, "normalization round trip and dataset merging pad masks", criterion_normalization},
      {9, "action chunk MSE fixtures and mask exclusion", criterion_action_mse},
      {10, "format durability: corpus round trip and error fixtures", criterion_format},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string det;
    bool ok = false;
    try {
      ok = c.run(det);
    } catch (const std::exception& e) {
      det = std::string("exception: ") + e.what();
    }
    if (!ok) ++failures;
    std::printf("[%s] criterion %2d: %s :: %s\n", ok ? "PASS" : "FAIL", c.id, c.label,
                det.c_str());
    std::fflush(stdout);
  }
  const double total = seconds_since(suite_start);
  const bool runtime_ok = total < 300.0;
  if (!runtime_ok) ++failures;
  std::printf("[%s] suite runtime: %.1f s (budget 300 s)\n", runtime_ok ? "PASS" : "FAIL",
              total);
  return failures == 0 ? 0 : 1;
}
