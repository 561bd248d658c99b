#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "semtrack/ingest.hpp"
#include "semtrack/types.hpp"

// Deterministic fixtures shared by the unit tests and the acceptance suite.
// Structs returned here are plain data; construct an Embedder from a corpus
// only after the corpus has reached its final resting place.
namespace semtrack::testsupport {

SentenceVectorSidecar make_sidecar(
    std::vector<std::pair<std::string, SentenceVector>> entries);

CaptionBox make_box(double x, double y, double w, double h,
                    std::string caption);

FrameRecord make_frame(std::int64_t frame_index,
                       std::vector<CaptionBox> boxes);

// A 100-frame stream with three planted concepts, each appearing as two
// disjoint segments, plus moving distractor boxes. Concept captions map to
// one-hot vectors; distractors share a fourth axis.
struct PlantedSegment {
  std::string caption;
  FrameSpan span;
};

struct PlantCorpus {
  std::vector<FrameRecord> frames;
  SentenceVectorSidecar sidecar;
  GroundTruth ground_truth;  // one query per concept, segments == plants
  std::vector<PlantedSegment> plants;
};

PlantCorpus make_plant_corpus();

// Random clustered corpus: boxes draw a concept prototype plus Gaussian
// noise, captions are unique keys into the sidecar, positions are random.
// Also registers `num_queries` random query captions ("query0", ...).
struct RandomCorpusParams {
  int num_frames = 40;
  int dim = 8;
  int num_concepts = 4;
  double noise = 0.25;
  int min_boxes = 2;
  int max_boxes = 5;
  int num_queries = 3;
};

struct RandomCorpus {
  std::vector<FrameRecord> frames;
  SentenceVectorSidecar sidecar;
  std::vector<std::string> query_captions;
};

RandomCorpus make_random_corpus(std::mt19937_64& rng,
                                const RandomCorpusParams& params = {});

// Random corpus whose pairwise caption similarities all land outside
// (0.45, 0.92): concept vectors stay within an 11-degree cone of orthogonal
// prototypes (same-concept pairs >= cos 22deg ~= 0.927, cross-concept pairs
// <= 0.42) and junk boxes share one exact axis. Any track-similarity
// threshold inside [0.5, 0.9] therefore selects identical candidate pairs,
// which keeps the tracker's threshold response provably monotone.
RandomCorpus make_separated_corpus(std::mt19937_64& rng,
                                   const RandomCorpusParams& params = {});

}  // namespace semtrack::testsupport
