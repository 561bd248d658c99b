#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "semtrack/types.hpp"

namespace semtrack {

// Pretrained word embeddings keyed by lowercase token.
struct WordVectorTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, SentenceVector> entries;
};

// Externally precomputed sentence vectors keyed by normalized caption.
struct SentenceVectorSidecar {
  std::size_t dim = 0;
  std::unordered_map<std::string, SentenceVector> entries;
};

// Frames file: one JSON object per line,
//   {"frame": <int>, "boxes": [{"x":..,"y":..,"w":..,"h":..,
//                               "caption":"..","score":<optional>}]}
// Frame indices must be strictly increasing; gaps are allowed and are not
// filled in. Captions are normalized on the way in.
std::vector<FrameRecord> parse_frame_records(std::istream& in);

// Inverse of parse_frame_records; re-parsing the output yields records
// structurally equal to the input.
void serialize_frame_records(std::span<const FrameRecord> records,
                             std::ostream& out);

// Word-vector file: header "<vocab_size> <dim>", then one line per token,
// "<token> <c1> ... <c_dim>". Tokens are lowercased on load; duplicates
// (after lowercasing) are an error.
WordVectorTable load_word_vectors(std::istream& in);

// Sentence-vector sidecar: one {"caption":"..","vec":[..]} JSON object per
// line. Caption keys are normalized; duplicate keys are an error.
SentenceVectorSidecar load_sentence_vectors(std::istream& in);

// Ground-truth file:
//   {"queries":[{"id":"..","text":"..",
//                "segments":[{"start":<int>,"end":<int>}]}]}
// Frame bounds are inclusive.
GroundTruth load_ground_truth(std::istream& in);

// Path-based conveniences; failures to open are reported with the path name.
std::vector<FrameRecord> load_frame_records_file(const std::string& path);
WordVectorTable load_word_vectors_file(const std::string& path);
SentenceVectorSidecar load_sentence_vectors_file(const std::string& path);
GroundTruth load_ground_truth_file(const std::string& path);

}  // namespace semtrack
