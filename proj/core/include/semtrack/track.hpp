#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semtrack/embed.hpp"
#include "semtrack/types.hpp"

namespace semtrack {

// Axis-aligned intersection over union; 0 when disjoint.
double box_iou(const BoundingBox& a, const BoundingBox& b);

struct TrackerConfig {
  // Minimum caption-to-representative cosine for a box to join a track.
  double track_sim_threshold = 0.7;
  // Consecutive misses a track survives; it is cut when misses exceed this.
  int cutting_threshold = 5;
  // Minimum number of matched observations for a cut track to be stored.
  int min_track_len = 5;
  // Minimum box IoU against the track's last observation; nullopt disables
  // the spatial gate.
  std::optional<double> spatial_gate_iou = 0.3;
};

enum class ObservationKind { kMatched, kCarried };

struct TrackObservation {
  std::int64_t frame_index = 0;
  BoundingBox box;
  std::string caption;
  double similarity_to_rep = 0.0;
  ObservationKind kind = ObservationKind::kMatched;

  bool operator==(const TrackObservation&) const = default;
};

enum class TrackState { kActive, kStored, kDiscarded };

// A temporally contiguous chain of semantically matched caption boxes. The
// representative caption (and its vector) is the caption of the first box
// registered to the track and never changes.
struct SemanticTrack {
  int track_id = 0;
  std::string representative_caption;
  SentenceVector representative_vector;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;  // frame of the last matched observation
  std::vector<TrackObservation> observations;
  TrackState state = TrackState::kActive;
  int miss_count = 0;

  bool operator==(const SemanticTrack&) const = default;
};

int matched_observation_count(const SemanticTrack& track);

struct TrackerStats {
  std::int64_t frames_processed = 0;
  std::int64_t boxes_seen = 0;     // boxes that entered matching
  std::int64_t boxes_skipped = 0;  // boxes dropped for lack of a vector
  std::int64_t match_events = 0;   // boxes assigned to an existing track
  std::int64_t tracks_created = 0;
  std::int64_t tracks_stored = 0;
  std::int64_t tracks_discarded = 0;
};

// Sequential single-writer state machine. Frames must arrive in strictly
// increasing frame_index order; each processed frame advances the miss count
// of unmatched tracks by exactly one, whatever the index gap.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config);

  // Embeds each box caption with `embedder`; boxes without a vector are
  // excluded from matching with a logged warning.
  void step(const FrameRecord& frame, const Embedder& embedder);

  // Pre-embedded variant; vectors[i] belongs to frame.boxes[i].
  void step(const FrameRecord& frame,
            std::span<const std::optional<SentenceVector>> vectors);

  // Cuts every remaining active track and returns the stored tracks sorted
  // by (start_frame, track_id).
  std::vector<SemanticTrack> finalize();

  const TrackerConfig& config() const { return config_; }
  const std::vector<SemanticTrack>& active_tracks() const { return active_; }
  const std::vector<SemanticTrack>& stored_tracks() const { return stored_; }
  const TrackerStats& stats() const { return stats_; }

 private:
  void cut_track(SemanticTrack&& track);

  TrackerConfig config_;
  int next_track_id_ = 0;
  std::int64_t last_frame_seen_ = -1;
  bool finalized_ = false;
  std::vector<SemanticTrack> active_;
  std::vector<SemanticTrack> stored_;
  TrackerStats stats_;
};

}  // namespace semtrack
