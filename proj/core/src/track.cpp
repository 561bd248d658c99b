#include "semtrack/track.hpp"

#include <algorithm>
#include <stdexcept>

#include "semtrack/log.hpp"

namespace semtrack {

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double intersection = ix * iy;
  const double union_area = a.w * a.h + b.w * b.h - intersection;
  return intersection / union_area;
}

int matched_observation_count(const SemanticTrack& track) {
  int count = 0;
  for (const TrackObservation& obs : track.observations) {
    if (obs.kind == ObservationKind::kMatched) ++count;
  }
  return count;
}

Tracker::Tracker(TrackerConfig config) : config_(config) {
  if (config_.track_sim_threshold < -1.0 || config_.track_sim_threshold > 1.0) {
    throw std::invalid_argument(
        "track similarity threshold must lie in [-1,1]");
  }
  if (config_.cutting_threshold < 0) {
    throw std::invalid_argument("cutting threshold must be >= 0");
  }
  if (config_.min_track_len < 1) {
    throw std::invalid_argument("minimum track length must be >= 1");
  }
  if (config_.spatial_gate_iou.has_value() &&
      (*config_.spatial_gate_iou < 0.0 || *config_.spatial_gate_iou > 1.0)) {
    throw std::invalid_argument("spatial gate IoU must lie in [0,1]");
  }
}

void Tracker::step(const FrameRecord& frame, const Embedder& embedder) {
  std::vector<std::optional<SentenceVector>> vectors;
  vectors.reserve(frame.boxes.size());
  for (const CaptionBox& box : frame.boxes) {
    auto vec = embedder.embed(box.caption);
    if (!vec.has_value()) {
      log::warn("frame " + std::to_string(frame.frame_index) +
                ": no vector for caption '" + box.caption +
                "', box excluded from tracking");
    }
    vectors.push_back(std::move(vec));
  }
  step(frame, vectors);
}

void Tracker::step(const FrameRecord& frame,
                   std::span<const std::optional<SentenceVector>> vectors) {
  if (finalized_) {
    throw std::logic_error("Tracker::step called after finalize");
  }
  if (frame.frame_index <= last_frame_seen_) {
    throw std::invalid_argument(
        "out-of-order frame_index " + std::to_string(frame.frame_index) +
        " (last seen " + std::to_string(last_frame_seen_) + ")");
  }
  if (vectors.size() != frame.boxes.size()) {
    throw std::invalid_argument("one vector required per box");
  }
  last_frame_seen_ = frame.frame_index;
  ++stats_.frames_processed;

  struct IncomingBox {
    const CaptionBox* box;
    const SentenceVector* vector;
  };
  std::vector<IncomingBox> boxes;
  boxes.reserve(frame.boxes.size());
  for (std::size_t i = 0; i < frame.boxes.size(); ++i) {
    if (!vectors[i].has_value()) {
      ++stats_.boxes_skipped;
      continue;
    }
    boxes.push_back({&frame.boxes[i], &*vectors[i]});
  }
  stats_.boxes_seen += static_cast<std::int64_t>(boxes.size());

  // Candidate pairs that pass the spatial gate and the similarity threshold.
  struct Candidate {
    double similarity;
    int track_id;
    std::size_t track_pos;
    std::size_t box_pos;  // position within `boxes`
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < active_.size(); ++t) {
    const SemanticTrack& track = active_[t];
    const BoundingBox& last_box = track.observations.back().box;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (config_.spatial_gate_iou.has_value() &&
          box_iou(last_box, boxes[b].box->box) < *config_.spatial_gate_iou) {
        continue;
      }
      const double sim =
          cosine_similarity(track.representative_vector, *boxes[b].vector);
      if (sim >= config_.track_sim_threshold) {
        candidates.push_back({sim, track.track_id, t, b});
      }
    }
  }

  // Greedy one-to-one assignment, best similarity first; ties fall to the
  // older track, then to the earlier box in the frame.
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.similarity != b.similarity) return a.similarity > b.similarity;
              if (a.track_id != b.track_id) return a.track_id < b.track_id;
              return a.box_pos < b.box_pos;
            });

  std::vector<bool> track_matched(active_.size(), false);
  std::vector<bool> box_matched(boxes.size(), false);
  for (const Candidate& c : candidates) {
    if (track_matched[c.track_pos] || box_matched[c.box_pos]) continue;
    track_matched[c.track_pos] = true;
    box_matched[c.box_pos] = true;

    SemanticTrack& track = active_[c.track_pos];
    const IncomingBox& incoming = boxes[c.box_pos];
    track.observations.push_back({frame.frame_index, incoming.box->box,
                                  incoming.box->caption, c.similarity,
                                  ObservationKind::kMatched});
    track.end_frame = frame.frame_index;
    track.miss_count = 0;
    ++stats_.match_events;
  }

  // Unmatched tracks carry their previous state; a track that has now missed
  // more than cutting_threshold frames in a row is cut.
  std::vector<SemanticTrack> still_active;
  still_active.reserve(active_.size());
  for (std::size_t t = 0; t < active_.size(); ++t) {
    SemanticTrack& track = active_[t];
    if (!track_matched[t]) {
      const TrackObservation& prev = track.observations.back();
      track.observations.push_back({frame.frame_index, prev.box, prev.caption,
                                    prev.similarity_to_rep,
                                    ObservationKind::kCarried});
      ++track.miss_count;
      if (track.miss_count > config_.cutting_threshold) {
        cut_track(std::move(track));
        continue;
      }
    }
    still_active.push_back(std::move(track));
  }
  active_ = std::move(still_active);

  // Every unmatched box seeds a new track with itself as the first matched
  // observation and its caption as the representative.
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    if (box_matched[b]) continue;
    const IncomingBox& incoming = boxes[b];
    SemanticTrack track;
    track.track_id = next_track_id_++;
    track.representative_caption = incoming.box->caption;
    track.representative_vector = *incoming.vector;
    track.start_frame = frame.frame_index;
    track.end_frame = frame.frame_index;
    track.observations.push_back({frame.frame_index, incoming.box->box,
                                  incoming.box->caption, 1.0,
                                  ObservationKind::kMatched});
    active_.push_back(std::move(track));
    ++stats_.tracks_created;
  }
}

void Tracker::cut_track(SemanticTrack&& track) {
  while (!track.observations.empty() &&
         track.observations.back().kind == ObservationKind::kCarried) {
    track.observations.pop_back();
  }
  if (matched_observation_count(track) >= config_.min_track_len) {
    track.state = TrackState::kStored;
    track.miss_count = 0;
    stored_.push_back(std::move(track));
    ++stats_.tracks_stored;
  } else {
    ++stats_.tracks_discarded;
  }
}

std::vector<SemanticTrack> Tracker::finalize() {
  if (!finalized_) {
    finalized_ = true;
    for (SemanticTrack& track : active_) {
      cut_track(std::move(track));
    }
    active_.clear();
    std::sort(stored_.begin(), stored_.end(),
              [](const SemanticTrack& a, const SemanticTrack& b) {
                if (a.start_frame != b.start_frame) {
                  return a.start_frame < b.start_frame;
                }
                return a.track_id < b.track_id;
              });
  }
  return stored_;
}

}  // namespace semtrack
