#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "semtrack/embed.hpp"
#include "semtrack/eval.hpp"
#include "semtrack/search.hpp"
#include "semtrack/track.hpp"

using namespace semtrack;

namespace {

SentenceVector random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  SentenceVector vec(dim);
  double norm_sq = 0.0;
  for (double& c : vec) {
    c = gauss(rng);
    norm_sq += c * c;
  }
  for (double& c : vec) c /= std::sqrt(norm_sq);
  return vec;
}

struct Fixture {
  SentenceVectorSidecar sidecar;
  std::vector<FrameRecord> frames;
};

// Five box slots per frame whose captions rotate through a vector pool, so
// tracks periodically cut and restart like real footage.
Fixture make_stream(int num_frames, int dim) {
  constexpr int kSlots = 5;
  constexpr int kPool = 20;
  std::mt19937_64 rng(42);
  Fixture fixture;
  for (int slot = 0; slot < kSlots; ++slot) {
    for (int v = 0; v < kPool; ++v) {
      fixture.sidecar.entries.emplace(
          "slot " + std::to_string(slot) + " concept " + std::to_string(v),
          random_unit(rng, dim));
    }
  }
  fixture.sidecar.dim = dim;
  for (int f = 0; f < num_frames; ++f) {
    FrameRecord frame;
    frame.frame_index = f;
    for (int slot = 0; slot < kSlots; ++slot) {
      const int variant = (f / 100 + slot) % kPool;
      frame.boxes.push_back(
          {{100.0 * slot + f % 5, 50.0, 40.0, 40.0},
           "slot " + std::to_string(slot) + " concept " +
               std::to_string(variant),
           std::nullopt});
    }
    fixture.frames.push_back(std::move(frame));
  }
  return fixture;
}

void BM_CosineSimilarity(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int dim = static_cast<int>(state.range(0));
  const SentenceVector a = random_unit(rng, dim);
  const SentenceVector b = random_unit(rng, dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cosine_similarity(a, b));
  }
}
BENCHMARK(BM_CosineSimilarity)->Arg(50)->Arg(300)->Arg(1000);

void BM_SegmentIou(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(segment_iou({0, 1234}, {600, 2400}));
  }
}
BENCHMARK(BM_SegmentIou);

void BM_TrackStream(benchmark::State& state) {
  const int frames = static_cast<int>(state.range(0));
  const int dim = static_cast<int>(state.range(1));
  const Fixture fixture = make_stream(frames, dim);
  const Embedder embedder(fixture.sidecar);
  for (auto _ : state) {
    Tracker tracker({0.7, 5, 5, 0.3});
    for (const FrameRecord& frame : fixture.frames) {
      tracker.step(frame, embedder);
    }
    benchmark::DoNotOptimize(tracker.finalize());
  }
  state.SetItemsProcessed(state.iterations() * frames);
}
BENCHMARK(BM_TrackStream)
    ->Args({1000, 300})
    ->Args({10000, 300})
    ->Unit(benchmark::kMillisecond);

void BM_Search(benchmark::State& state) {
  const int num_tracks = static_cast<int>(state.range(0));
  std::mt19937_64 rng(9);
  std::vector<SemanticTrack> tracks;
  for (int i = 0; i < num_tracks; ++i) {
    SemanticTrack track;
    track.track_id = i;
    track.representative_caption = "track " + std::to_string(i);
    track.representative_vector = random_unit(rng, 300);
    track.start_frame = 10 * i;
    track.end_frame = 10 * i + 9;
    track.state = TrackState::kStored;
    tracks.push_back(std::move(track));
  }
  SentenceVectorSidecar sidecar;
  sidecar.dim = 300;
  sidecar.entries.emplace("the query", random_unit(rng, 300));
  const Embedder embedder(sidecar);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        search("the query", tracks, {0.2, std::nullopt}, embedder));
  }
}
BENCHMARK(BM_Search)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
