#include <benchmark/benchmark.h>

#include "egotraj/geometry.hpp"
#include "egotraj/kdtree.hpp"
#include "egotraj/registration.hpp"
#include "egotraj/rng.hpp"
#include "egotraj/synth.hpp"

using namespace egotraj;

namespace {

Points3 cloud(int n, std::uint64_t seed) {
  Rng rng(seed);
  Points3 pts(n, 3);
  for (int i = 0; i < n; ++i) {
    pts.row(i) = Eigen::RowVector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  }
  return pts;
}

void BM_estimate_rigid_transform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(7);
  const Points3 src = cloud(n, 1);
  Points3 dst = src;
  dst.rowwise() += Eigen::RowVector3d(0.1, -0.05, 0.02);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_rigid_transform(src, dst));
  }
}
BENCHMARK(BM_estimate_rigid_transform)->Arg(10)->Arg(100)->Arg(1000)->Arg(10000);

void BM_kdtree_build_query(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Points3 pts = cloud(n, 2);
  const Points3 queries = cloud(256, 3);
  for (auto _ : state) {
    KdTree3 tree(pts);
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
      benchmark::DoNotOptimize(tree.nearest(queries.row(i).transpose(), 0.5));
    }
  }
}
BENCHMARK(BM_kdtree_build_query)->Arg(500)->Arg(5000);

void BM_icp_pairwise(benchmark::State& state) {
  SceneSpec spec;
  spec.seed = 11;
  spec.frames = 2;
  spec.n_scene_points = static_cast<int>(state.range(0));
  spec.camera_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d(0.01, 0.005, 0)};
  const SynthEpisode synth = generate_episode(spec);
  const RegistrationConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(icp_align(synth.episode.frames[1].scene_points,
                                       synth.episode.frames[0].scene_points, config));
  }
}
BENCHMARK(BM_icp_pairwise)->Arg(500)->Arg(2000);

void BM_register_episode(benchmark::State& state) {
  SceneSpec spec;
  spec.seed = 13;
  spec.frames = 20;
  spec.n_scene_points = 500;
  spec.camera_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d(0.2, 0.05, 0.05)};
  const SynthEpisode synth = generate_episode(spec);
  const RegistrationConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(register_to_start_frame(synth.episode.frames, config));
  }
}
BENCHMARK(BM_register_episode);

}  // namespace
