#include "semtrack/track_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace semtrack {

namespace {

using nlohmann::json;

json config_to_json(const TrackerConfig& config) {
  json j = {{"t_sim", config.track_sim_threshold},
            {"cutting_threshold", config.cutting_threshold},
            {"min_track_len", config.min_track_len}};
  if (config.spatial_gate_iou.has_value()) {
    j["spatial_gate_iou"] = *config.spatial_gate_iou;
  } else {
    j["spatial_gate_iou"] = nullptr;
  }
  return j;
}

TrackerConfig config_from_json(const json& j) {
  if (!j.is_object()) {
    throw std::runtime_error("tracks file: 'config' must be an object");
  }
  TrackerConfig config;
  config.track_sim_threshold = j.at("t_sim").get<double>();
  config.cutting_threshold = j.at("cutting_threshold").get<int>();
  config.min_track_len = j.at("min_track_len").get<int>();
  if (j.contains("spatial_gate_iou") && !j["spatial_gate_iou"].is_null()) {
    config.spatial_gate_iou = j["spatial_gate_iou"].get<double>();
  } else {
    config.spatial_gate_iou = std::nullopt;
  }
  return config;
}

json observation_to_json(const TrackObservation& obs) {
  return {{"frame", obs.frame_index},
          {"x", obs.box.x},
          {"y", obs.box.y},
          {"w", obs.box.w},
          {"h", obs.box.h},
          {"caption", obs.caption},
          {"sim", obs.similarity_to_rep},
          {"kind", obs.kind == ObservationKind::kMatched ? "matched"
                                                         : "carried"}};
}

TrackObservation observation_from_json(const json& j, int track_id) {
  TrackObservation obs;
  obs.frame_index = j.at("frame").get<std::int64_t>();
  obs.box.x = j.at("x").get<double>();
  obs.box.y = j.at("y").get<double>();
  obs.box.w = j.at("w").get<double>();
  obs.box.h = j.at("h").get<double>();
  obs.caption = j.at("caption").get<std::string>();
  obs.similarity_to_rep = j.at("sim").get<double>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "matched") {
    obs.kind = ObservationKind::kMatched;
  } else if (kind == "carried") {
    obs.kind = ObservationKind::kCarried;
  } else {
    throw std::runtime_error("tracks file: track " + std::to_string(track_id) +
                             ": unknown observation kind '" + kind + "'");
  }
  return obs;
}

}  // namespace

void write_tracks(const TracksFile& file, std::ostream& out) {
  json tracks = json::array();
  for (const SemanticTrack& track : file.tracks) {
    json obs = json::array();
    for (const TrackObservation& o : track.observations) {
      obs.push_back(observation_to_json(o));
    }
    tracks.push_back({{"id", track.track_id},
                      {"rep_caption", track.representative_caption},
                      {"rep_vec", track.representative_vector},
                      {"start", track.start_frame},
                      {"end", track.end_frame},
                      {"obs", std::move(obs)}});
  }
  const json root = {{"config", config_to_json(file.config)},
                     {"tracks", std::move(tracks)}};
  out << root.dump(2) << '\n';
}

std::string tracks_to_json(const TracksFile& file) {
  std::ostringstream out;
  write_tracks(file, out);
  return out.str();
}

TracksFile read_tracks(std::istream& in) {
  json root = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded() || !root.is_object() || !root.contains("config") ||
      !root.contains("tracks") || !root["tracks"].is_array()) {
    throw std::runtime_error(
        "tracks file: expected {\"config\":{...},\"tracks\":[...]}");
  }

  TracksFile file;
  file.config = config_from_json(root["config"]);
  file.tracks.reserve(root["tracks"].size());
  for (const json& t : root["tracks"]) {
    SemanticTrack track;
    track.track_id = t.at("id").get<int>();
    track.representative_caption = t.at("rep_caption").get<std::string>();
    track.representative_vector = t.at("rep_vec").get<SentenceVector>();
    track.start_frame = t.at("start").get<std::int64_t>();
    track.end_frame = t.at("end").get<std::int64_t>();
    track.state = TrackState::kStored;
    if (track.start_frame > track.end_frame) {
      throw std::runtime_error("tracks file: track " +
                               std::to_string(track.track_id) +
                               ": start exceeds end");
    }
    for (double c : track.representative_vector) {
      if (!std::isfinite(c)) {
        throw std::runtime_error("tracks file: track " +
                                 std::to_string(track.track_id) +
                                 ": non-finite rep_vec component");
      }
    }
    if (!t.contains("obs") || !t["obs"].is_array()) {
      throw std::runtime_error("tracks file: track " +
                               std::to_string(track.track_id) +
                               ": missing 'obs' array");
    }
    for (const json& o : t["obs"]) {
      track.observations.push_back(observation_from_json(o, track.track_id));
    }
    file.tracks.push_back(std::move(track));
  }
  return file;
}

TracksFile load_tracks_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  return read_tracks(in);
}

}  // namespace semtrack
