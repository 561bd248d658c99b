#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semtrack/embed.hpp"
#include "semtrack/track.hpp"

namespace semtrack {

struct QueryConfig {
  // Minimum query-to-representative cosine for a track to be proposed.
  double search_sim_threshold = 0.0;
  // Keep at most this many proposals; nullopt means unlimited.
  std::optional<std::size_t> top_k;
};

struct Proposal {
  int track_id = 0;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  double score = 0.0;  // cosine to the query
  std::string rep_caption;

  FrameSpan span() const { return {start_frame, end_frame}; }

  bool operator==(const Proposal&) const = default;
};

// Tracks whose representative vector scores at least the search similarity
// threshold against the query, best first, ties by ascending track id.
// Overlapping proposals are not merged or suppressed. Throws when the query
// cannot be embedded.
std::vector<Proposal> search(std::string_view query_text,
                             std::span<const SemanticTrack> tracks,
                             const QueryConfig& config,
                             const Embedder& embedder);

// One operating point per distinct track score, descending; each point's
// proposals are all tracks scoring at least that value, so successive sets
// are nested.
struct SweepPoint {
  double threshold = 0.0;
  std::vector<Proposal> proposals;
};

std::vector<SweepPoint> score_sweep(std::string_view query_text,
                                    std::span<const SemanticTrack> tracks,
                                    const Embedder& embedder);

}  // namespace semtrack
