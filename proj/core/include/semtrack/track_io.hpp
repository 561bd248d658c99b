#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "semtrack/track.hpp"

namespace semtrack {

// On-disk form of a finished tracking run: the configuration it was produced
// with plus the stored semantic tracks.
struct TracksFile {
  TrackerConfig config;
  std::vector<SemanticTrack> tracks;
};

void write_tracks(const TracksFile& file, std::ostream& out);
std::string tracks_to_json(const TracksFile& file);

TracksFile read_tracks(std::istream& in);
TracksFile load_tracks_file(const std::string& path);

}  // namespace semtrack
