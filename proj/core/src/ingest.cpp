#include "semtrack/ingest.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace semtrack {

namespace {

using nlohmann::json;

// Reads the next line, stripping a trailing '\r' so CRLF input parses the
// same as LF input. Returns false at end of stream.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool is_blank(const std::string& line) {
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

json parse_json_line(const std::string& line, std::size_t line_no) {
  json value = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) {
    throw ParseError("malformed JSON", line_no);
  }
  return value;
}

double require_number(const json& obj, const char* key, std::size_t line_no) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ParseError(std::string("missing or non-numeric field '") + key + "'",
                     line_no);
  }
  const double v = obj[key].get<double>();
  if (!std::isfinite(v)) {
    throw ParseError(std::string("non-finite value for field '") + key + "'",
                     line_no);
  }
  return v;
}

CaptionBox parse_caption_box(const json& obj, std::size_t line_no) {
  if (!obj.is_object()) {
    throw ParseError("box entry is not an object", line_no);
  }
  CaptionBox cb;
  cb.box.x = require_number(obj, "x", line_no);
  cb.box.y = require_number(obj, "y", line_no);
  cb.box.w = require_number(obj, "w", line_no);
  cb.box.h = require_number(obj, "h", line_no);
  if (cb.box.w <= 0.0 || cb.box.h <= 0.0) {
    throw ParseError("non-positive box dimensions", line_no);
  }
  if (!obj.contains("caption") || !obj["caption"].is_string()) {
    throw ParseError("missing or non-string field 'caption'", line_no);
  }
  cb.caption = normalize_caption(obj["caption"].get<std::string>());
  if (cb.caption.empty()) {
    throw ParseError("empty caption", line_no);
  }
  if (obj.contains("score")) {
    const double score = require_number(obj, "score", line_no);
    if (score < 0.0 || score > 1.0) {
      throw ParseError("score outside [0,1]", line_no);
    }
    cb.score = score;
  }
  return cb;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  return in;
}

}  // namespace

std::vector<FrameRecord> parse_frame_records(std::istream& in) {
  std::vector<FrameRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json obj = parse_json_line(line, line_no);
    if (!obj.is_object()) {
      throw ParseError("record is not a JSON object", line_no);
    }
    if (!obj.contains("frame") || !obj["frame"].is_number_integer()) {
      throw ParseError("missing or non-integer field 'frame'", line_no);
    }
    FrameRecord record;
    record.frame_index = obj["frame"].get<std::int64_t>();
    if (record.frame_index < 0) {
      throw ParseError("negative frame_index", line_no);
    }
    if (!records.empty() && record.frame_index <= records.back().frame_index) {
      throw ParseError("non-increasing frame_index", line_no);
    }
    if (!obj.contains("boxes") || !obj["boxes"].is_array()) {
      throw ParseError("missing or non-array field 'boxes'", line_no);
    }
    for (const json& box : obj["boxes"]) {
      record.boxes.push_back(parse_caption_box(box, line_no));
    }
    records.push_back(std::move(record));
  }
  return records;
}

void serialize_frame_records(std::span<const FrameRecord> records,
                             std::ostream& out) {
  for (const FrameRecord& record : records) {
    json boxes = json::array();
    for (const CaptionBox& cb : record.boxes) {
      json box = {{"x", cb.box.x},
                  {"y", cb.box.y},
                  {"w", cb.box.w},
                  {"h", cb.box.h},
                  {"caption", cb.caption}};
      if (cb.score.has_value()) box["score"] = *cb.score;
      boxes.push_back(std::move(box));
    }
    const json obj = {{"frame", record.frame_index}, {"boxes", std::move(boxes)}};
    out << obj.dump() << '\n';
  }
}

WordVectorTable load_word_vectors(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!next_line(in, line)) {
    throw ParseError("missing header line", 1);
  }
  ++line_no;

  std::istringstream header(line);
  long long vocab_size = -1;
  long long dim = -1;
  if (!(header >> vocab_size >> dim) || vocab_size < 0 || dim <= 0) {
    throw ParseError("malformed header, expected '<vocab_size> <dim>'",
                     line_no);
  }
  std::string extra;
  if (header >> extra) {
    throw ParseError("malformed header, expected '<vocab_size> <dim>'",
                     line_no);
  }

  WordVectorTable table;
  table.dim = static_cast<std::size_t>(dim);
  table.entries.reserve(static_cast<std::size_t>(vocab_size));

  long long loaded = 0;
  while (loaded < vocab_size) {
    if (!next_line(in, line)) {
      throw ParseError("expected " + std::to_string(vocab_size) +
                           " entries, found " + std::to_string(loaded),
                       line_no);
    }
    ++line_no;
    if (is_blank(line)) continue;

    const std::size_t token_end = line.find(' ');
    if (token_end == std::string::npos || token_end == 0) {
      throw ParseError("malformed entry, expected '<token> <components>'",
                       line_no);
    }
    std::string token = line.substr(0, token_end);
    for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    SentenceVector vec;
    vec.reserve(table.dim);
    const char* cursor = line.data() + token_end;
    const char* end = line.data() + line.size();
    while (cursor != end) {
      if (*cursor == ' ') {
        ++cursor;
        continue;
      }
      double component = 0.0;
      const auto [next, ec] = std::from_chars(cursor, end, component);
      if (ec != std::errc() || (next != end && *next != ' ')) {
        throw ParseError("token '" + token + "': non-numeric component",
                         line_no);
      }
      if (!std::isfinite(component)) {
        throw ParseError("token '" + token + "': non-finite component",
                         line_no);
      }
      vec.push_back(component);
      cursor = next;
    }
    if (vec.size() != table.dim) {
      throw ParseError("token '" + token + "': expected " +
                           std::to_string(table.dim) + " components, found " +
                           std::to_string(vec.size()),
                       line_no);
    }
    if (!table.entries.emplace(std::move(token), std::move(vec)).second) {
      throw ParseError("duplicate token '" + line.substr(0, token_end) + "'",
                       line_no);
    }
    ++loaded;
  }

  while (next_line(in, line)) {
    ++line_no;
    if (!is_blank(line)) ++loaded;
  }
  if (loaded != vocab_size) {
    throw ParseError("expected " + std::to_string(vocab_size) +
                         " entries, found " + std::to_string(loaded),
                     line_no);
  }
  return table;
}

SentenceVectorSidecar load_sentence_vectors(std::istream& in) {
  SentenceVectorSidecar sidecar;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const json obj = parse_json_line(line, line_no);
    if (!obj.is_object() || !obj.contains("caption") ||
        !obj["caption"].is_string() || !obj.contains("vec") ||
        !obj["vec"].is_array()) {
      throw ParseError("expected {\"caption\":<string>,\"vec\":[<numbers>]}",
                       line_no);
    }
    std::string caption = normalize_caption(obj["caption"].get<std::string>());
    if (caption.empty()) {
      throw ParseError("empty caption", line_no);
    }
    SentenceVector vec;
    vec.reserve(obj["vec"].size());
    for (const json& component : obj["vec"]) {
      if (!component.is_number()) {
        throw ParseError("non-numeric vector component", line_no);
      }
      const double v = component.get<double>();
      if (!std::isfinite(v)) {
        throw ParseError("non-finite vector component", line_no);
      }
      vec.push_back(v);
    }
    if (vec.empty()) {
      throw ParseError("empty vector", line_no);
    }
    if (sidecar.dim == 0) {
      sidecar.dim = vec.size();
    } else if (vec.size() != sidecar.dim) {
      throw ParseError("dimension mismatch: expected " +
                           std::to_string(sidecar.dim) + " components, found " +
                           std::to_string(vec.size()),
                       line_no);
    }
    if (!sidecar.entries.emplace(std::move(caption), std::move(vec)).second) {
      throw ParseError("duplicate caption '" +
                           normalize_caption(obj["caption"].get<std::string>()) +
                           "'",
                       line_no);
    }
  }
  return sidecar;
}

GroundTruth load_ground_truth(std::istream& in) {
  json root = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded() || !root.is_object() || !root.contains("queries") ||
      !root["queries"].is_array()) {
    throw std::runtime_error(
        "ground truth: expected {\"queries\":[...]} JSON object");
  }

  GroundTruth gt;
  std::unordered_set<std::string> seen_ids;
  std::size_t index = 0;
  for (const json& q : root["queries"]) {
    const std::string where = "queries[" + std::to_string(index) + "]";
    if (!q.is_object() || !q.contains("id") || !q["id"].is_string() ||
        !q.contains("text") || !q["text"].is_string() ||
        !q.contains("segments") || !q["segments"].is_array()) {
      throw std::runtime_error("ground truth: " + where +
                               ": expected {id, text, segments}");
    }
    GroundTruthQuery query;
    query.id = q["id"].get<std::string>();
    query.text = q["text"].get<std::string>();
    if (query.id.empty()) {
      throw std::runtime_error("ground truth: " + where + ": empty query id");
    }
    if (!seen_ids.insert(query.id).second) {
      throw std::runtime_error("ground truth: duplicate query id '" +
                               query.id + "'");
    }
    if (q["segments"].empty()) {
      throw std::runtime_error("ground truth: query '" + query.id +
                               "' has an empty segment list");
    }
    for (const json& seg : q["segments"]) {
      if (!seg.is_object() || !seg.contains("start") ||
          !seg["start"].is_number_integer() || !seg.contains("end") ||
          !seg["end"].is_number_integer()) {
        throw std::runtime_error("ground truth: query '" + query.id +
                                 "': segment must be {start:<int>, end:<int>}");
      }
      FrameSpan span{seg["start"].get<std::int64_t>(),
                     seg["end"].get<std::int64_t>()};
      if (span.start < 0) {
        throw std::runtime_error("ground truth: query '" + query.id +
                                 "': negative start_frame");
      }
      if (span.end < span.start) {
        throw std::runtime_error(
            "ground truth: query '" + query.id + "': end_frame " +
            std::to_string(span.end) + " precedes start_frame " +
            std::to_string(span.start));
      }
      query.segments.push_back(span);
    }
    gt.queries.push_back(std::move(query));
    ++index;
  }
  return gt;
}

std::vector<FrameRecord> load_frame_records_file(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_frame_records(in);
}

WordVectorTable load_word_vectors_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_word_vectors(in);
}

SentenceVectorSidecar load_sentence_vectors_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_sentence_vectors(in);
}

GroundTruth load_ground_truth_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_ground_truth(in);
}

}  // namespace semtrack
