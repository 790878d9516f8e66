#include <benchmark/benchmark.h>

#include "socialmotion/kinematics.h"
#include "socialmotion/relpose_bins.h"
#include "socialmotion/rng.h"
#include "socialmotion/scene_file.h"
#include "socialmotion/synth.h"
#include "socialmotion/xh3d.h"

namespace {

using namespace socialmotion;

SceneFile bench_scene(int persons, double seconds) {
  SynthSpec s;
  s.persons = persons;
  s.pattern = SynthPattern::CircleWalk;
  s.duration_s = seconds;
  s.seed = 1;
  return synth_scene(s);
}

void BM_ForwardKinematics(benchmark::State& state) {
  const SceneFile scene = bench_scene(1, 20.0);
  const RawMotion& m = scene.motion.persons[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_kinematics(m, default_skeleton()));
  }
  state.SetItemsProcessed(state.iterations() * m.frames());
}
BENCHMARK(BM_ForwardKinematics);

void BM_EncodeSocial(benchmark::State& state) {
  const SceneFile scene = bench_scene(static_cast<int>(state.range(0)), 20.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_social(scene.motion, default_skeleton()));
  }
  state.SetItemsProcessed(state.iterations() * scene.motion.frames() * state.range(0));
}
BENCHMARK(BM_EncodeSocial)->Arg(1)->Arg(3)->Arg(5);

void BM_DecodeSocial(benchmark::State& state) {
  const SceneFile scene = bench_scene(static_cast<int>(state.range(0)), 20.0);
  const SocialFeatures f = encode_social(scene.motion, default_skeleton());
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_social(f, default_skeleton()));
  }
  state.SetItemsProcessed(state.iterations() * scene.motion.frames() * state.range(0));
}
BENCHMARK(BM_DecodeSocial)->Arg(1)->Arg(3);

void BM_SceneFileRoundTrip(benchmark::State& state) {
  const SceneFile scene = bench_scene(3, 20.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_scene(encode_scene(scene)));
  }
}
BENCHMARK(BM_SceneFileRoundTrip);

void BM_BinEncode(benchmark::State& state) {
  BinSpec s;
  s.x = {-5, 5};
  s.z = {-5, 5};
  Rng rng(2);
  std::vector<RelPose> poses(1024);
  for (RelPose& p : poses) {
    p = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-3, 3)};
  }
  for (auto _ : state) {
    for (const RelPose& p : poses) {
      benchmark::DoNotOptimize(s.encode(p));
    }
  }
  state.SetItemsProcessed(state.iterations() * poses.size());
}
BENCHMARK(BM_BinEncode);

} // namespace
