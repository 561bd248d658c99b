#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semtrack {

// A sentence vector is a fixed-dimension real vector; the dimension is the
// element count. All components are finite for vectors produced by this
// library.
using SentenceVector = std::vector<double>;

// Axis-aligned box in pixel coordinates, (x, y) top-left, w/h > 0.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool operator==(const BoundingBox&) const = default;
};

struct CaptionBox {
  BoundingBox box;
  std::string caption;                 // non-empty after normalization
  std::optional<double> score;         // detector confidence in [0,1]

  bool operator==(const CaptionBox&) const = default;
};

struct FrameRecord {
  std::int64_t frame_index = 0;
  std::vector<CaptionBox> boxes;       // may be empty

  bool operator==(const FrameRecord&) const = default;
};

// Inclusive frame interval; a single-frame span has start == end.
struct FrameSpan {
  std::int64_t start = 0;
  std::int64_t end = 0;

  bool operator==(const FrameSpan&) const = default;
};

struct GroundTruthQuery {
  std::string id;
  std::string text;
  std::vector<FrameSpan> segments;     // at least one

  bool operator==(const GroundTruthQuery&) const = default;
};

struct GroundTruth {
  std::vector<GroundTruthQuery> queries;

  bool operator==(const GroundTruth&) const = default;
};

// Error raised by the stream parsers; the message always names the offending
// line (1-based).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : std::runtime_error(message + " at line " + std::to_string(line)),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Canonical caption form: leading/trailing whitespace trimmed, internal
// whitespace runs collapsed to single spaces. Captions are compared and keyed
// in this form everywhere.
std::string normalize_caption(std::string_view raw);

}  // namespace semtrack
