#include "semtrack/search.hpp"

#include <algorithm>
#include <stdexcept>

namespace semtrack {

namespace {

// All tracks scored against the query, sorted by (score desc, id asc).
std::vector<Proposal> scored_tracks(std::string_view query_text,
                                    std::span<const SemanticTrack> tracks,
                                    const Embedder& embedder) {
  const auto query_vec = embedder.embed(query_text);
  if (!query_vec.has_value()) {
    throw std::runtime_error("query not embeddable: '" +
                             std::string(query_text) + "'");
  }
  std::vector<Proposal> scored;
  scored.reserve(tracks.size());
  for (const SemanticTrack& track : tracks) {
    scored.push_back({track.track_id, track.start_frame, track.end_frame,
                      cosine_similarity(*query_vec, track.representative_vector),
                      track.representative_caption});
  }
  std::sort(scored.begin(), scored.end(),
            [](const Proposal& a, const Proposal& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.track_id < b.track_id;
            });
  return scored;
}

}  // namespace

std::vector<Proposal> search(std::string_view query_text,
                             std::span<const SemanticTrack> tracks,
                             const QueryConfig& config,
                             const Embedder& embedder) {
  std::vector<Proposal> proposals =
      scored_tracks(query_text, tracks, embedder);
  std::erase_if(proposals, [&](const Proposal& p) {
    return p.score < config.search_sim_threshold;
  });
  if (config.top_k.has_value() && proposals.size() > *config.top_k) {
    proposals.resize(*config.top_k);
  }
  return proposals;
}

std::vector<SweepPoint> score_sweep(std::string_view query_text,
                                    std::span<const SemanticTrack> tracks,
                                    const Embedder& embedder) {
  const std::vector<Proposal> scored =
      scored_tracks(query_text, tracks, embedder);
  std::vector<SweepPoint> sweep;
  std::size_t i = 0;
  while (i < scored.size()) {
    const double threshold = scored[i].score;
    while (i < scored.size() && scored[i].score == threshold) ++i;
    // Prefix of the sorted list: every track scoring >= threshold.
    sweep.push_back({threshold,
                     std::vector<Proposal>(scored.begin(), scored.begin() + i)});
  }
  return sweep;
}

}  // namespace semtrack
