#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "semtrack/track_io.hpp"
#include "support/synthetic.hpp"

using namespace semtrack;

namespace {

TracksFile tracked_plant_corpus() {
  const auto corpus = testsupport::make_plant_corpus();
  const Embedder embedder(corpus.sidecar);
  TrackerConfig config{0.7, 5, 5, 0.3};
  Tracker tracker(config);
  for (const FrameRecord& frame : corpus.frames) {
    tracker.step(frame, embedder);
  }
  return {config, tracker.finalize()};
}

}  // namespace

TEST_SUITE("track_io") {

TEST_CASE("write then read reproduces the tracks exactly") {
  const TracksFile original = tracked_plant_corpus();
  REQUIRE(!original.tracks.empty());

  std::stringstream buffer;
  write_tracks(original, buffer);
  const TracksFile reloaded = read_tracks(buffer);

  CHECK(reloaded.tracks == original.tracks);
  CHECK(reloaded.config.track_sim_threshold ==
        original.config.track_sim_threshold);
  CHECK(reloaded.config.cutting_threshold == original.config.cutting_threshold);
  CHECK(reloaded.config.min_track_len == original.config.min_track_len);
  CHECK(reloaded.config.spatial_gate_iou == original.config.spatial_gate_iou);
}

TEST_CASE("disabled spatial gate round-trips as null") {
  TracksFile file;
  file.config.spatial_gate_iou = std::nullopt;
  std::stringstream buffer;
  write_tracks(file, buffer);
  CHECK(buffer.str().find("\"spatial_gate_iou\": null") != std::string::npos);
  CHECK_FALSE(read_tracks(buffer).config.spatial_gate_iou.has_value());
}

TEST_CASE("tracks file carries the documented keys") {
  const TracksFile file = tracked_plant_corpus();
  std::ostringstream buffer;
  write_tracks(file, buffer);
  const auto root = nlohmann::json::parse(buffer.str());
  REQUIRE(root.contains("config"));
  REQUIRE(root.contains("tracks"));
  const auto& track = root["tracks"][0];
  for (const char* key : {"id", "rep_caption", "rep_vec", "start", "end", "obs"}) {
    CHECK(track.contains(key));
  }
  const auto& obs = track["obs"][0];
  for (const char* key : {"frame", "x", "y", "w", "h", "caption", "sim", "kind"}) {
    CHECK(obs.contains(key));
  }
  const std::string kind = obs["kind"].get<std::string>();
  CHECK((kind == "matched" || kind == "carried"));
}

TEST_CASE("read rejects unknown observation kinds and bad spans") {
  std::istringstream bad_kind(R"({"config":{"t_sim":0.7,"cutting_threshold":5,"min_track_len":5,"spatial_gate_iou":0.3},
    "tracks":[{"id":0,"rep_caption":"c","rep_vec":[1],"start":0,"end":0,
               "obs":[{"frame":0,"x":0,"y":0,"w":1,"h":1,"caption":"c","sim":1.0,"kind":"teleported"}]}]})");
  CHECK_THROWS(read_tracks(bad_kind));

  std::istringstream bad_span(R"({"config":{"t_sim":0.7,"cutting_threshold":5,"min_track_len":5,"spatial_gate_iou":0.3},
    "tracks":[{"id":0,"rep_caption":"c","rep_vec":[1],"start":9,"end":1,"obs":[]}]})");
  CHECK_THROWS(read_tracks(bad_span));

  std::istringstream not_json("wat");
  CHECK_THROWS(read_tracks(not_json));
}

}  // TEST_SUITE
