#include <benchmark/benchmark.h>

#include "egotraj/actions.hpp"
#include "egotraj/curation.hpp"
#include "egotraj/rng.hpp"

using namespace egotraj;

namespace {

Trajectory jittered_trajectory(int t_count, std::uint64_t seed) {
  Rng rng(seed);
  Trajectory traj;
  traj.poses.resize(static_cast<std::size_t>(t_count));
  for (int t = 0; t < t_count; ++t) {
    traj.poses[static_cast<std::size_t>(t)].position =
        Eigen::Vector3d(0.01 * t, 0, 0) +
        0.003 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    traj.poses[static_cast<std::size_t>(t)].timestamp_index = t + 1;
  }
  return traj;
}

void BM_travel_distance(benchmark::State& state) {
  const Trajectory traj = jittered_trajectory(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(travel_distance(traj));
}
BENCHMARK(BM_travel_distance)->Arg(100)->Arg(1000);

void BM_smooth_translations(benchmark::State& state) {
  const Trajectory traj = jittered_trajectory(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(smooth_translations(traj));
}
BENCHMARK(BM_smooth_translations)->Arg(100)->Arg(1000);

void BM_bgts(benchmark::State& state) {
  Rng rng(3);
  const int t_count = static_cast<int>(state.range(0));
  Points2 obj(t_count, 2);
  std::vector<Points2> bg(8, Points2(t_count, 2));
  for (int t = 0; t < t_count; ++t) {
    obj.row(t) = Eigen::RowVector2d(rng.uniform(0, 640), rng.uniform(0, 480));
    for (auto& track : bg) {
      track.row(t) = Eigen::RowVector2d(rng.uniform(0, 640), rng.uniform(0, 480));
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(bgts(obj, bg, 1e-8));
}
BENCHMARK(BM_bgts)->Arg(50)->Arg(500);

void BM_compute_norm_stats(benchmark::State& state) {
  Rng rng(4);
  std::vector<ActionRecord> records(static_cast<std::size_t>(state.range(0)));
  for (ActionRecord& r : records) {
    r.raw_values = Eigen::VectorXd::NullaryExpr(9, [&](Eigen::Index) { return rng.normal(); });
    r.raw_state = Eigen::VectorXd::NullaryExpr(9, [&](Eigen::Index) { return rng.normal(); });
  }
  for (auto _ : state) benchmark::DoNotOptimize(compute_norm_stats(records, "bench"));
}
BENCHMARK(BM_compute_norm_stats)->Arg(1000)->Arg(10000);

}  // namespace
