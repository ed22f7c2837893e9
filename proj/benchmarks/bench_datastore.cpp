#include <benchmark/benchmark.h>

#include <filesystem>

#include "egotraj/datastore.hpp"
#include "egotraj/synth.hpp"

using namespace egotraj;

namespace {

SynthEpisode bench_episode() {
  SceneSpec spec;
  spec.seed = 5;
  spec.frames = 20;
  spec.n_object_points = 120;
  spec.n_scene_points = 500;
  spec.object_motion.translation_knots = {Eigen::Vector3d::Zero(),
                                          Eigen::Vector3d(0.2, 0.1, 0)};
  return generate_episode(spec);
}

void BM_write_episode(benchmark::State& state) {
  const std::filesystem::path root =
      std::filesystem::temp_directory_path() / "egotraj-bench-ds";
  std::filesystem::create_directories(root);
  const SynthEpisode synth = bench_episode();
  for (auto _ : state) {
    benchmark::DoNotOptimize(write_episode(synth.episode, root));
  }
  std::filesystem::remove_all(root);
}
BENCHMARK(BM_write_episode);

void BM_read_episode(benchmark::State& state) {
  const std::filesystem::path root =
      std::filesystem::temp_directory_path() / "egotraj-bench-ds-read";
  std::filesystem::create_directories(root);
  const SynthEpisode synth = bench_episode();
  const std::string rel = write_episode(synth.episode, root);
  for (auto _ : state) {
    benchmark::DoNotOptimize(read_episode(root / rel));
  }
  std::filesystem::remove_all(root);
}
BENCHMARK(BM_read_episode);

void BM_generate_episode(benchmark::State& state) {
  SceneSpec spec;
  spec.seed = 6;
  spec.frames = 20;
  spec.n_scene_points = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_episode(spec));
  }
}
BENCHMARK(BM_generate_episode)->Arg(300)->Arg(1000);

}  // namespace
