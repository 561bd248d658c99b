#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semtrack/embed.hpp"
#include "semtrack/search.hpp"
#include "semtrack/track.hpp"
#include "semtrack/types.hpp"

namespace semtrack {

// Per-query counting: n_t ground-truth segments, n_p proposals, n_d detected
// ground truths, n_g good proposals. n_d and n_g may differ (several
// proposals can hit one ground truth and vice versa).
struct EvalCounts {
  int n_t = 0;
  int n_p = 0;
  int n_d = 0;
  int n_g = 0;

  bool operator==(const EvalCounts&) const = default;
};

// IoU over inclusive frame sets of two intervals.
double segment_iou(FrameSpan a, FrameSpan b);

// Marks G_i detected if any proposal reaches the IoU threshold against it,
// and P_j good if it reaches the threshold against any ground truth. The two
// counts are independent. iou_threshold must lie in (0,1].
EvalCounts match_counts(std::span<const FrameSpan> gts,
                        std::span<const FrameSpan> proposals,
                        double iou_threshold);

// recall = n_d/n_t, precision = n_g/n_p (0 when there are no proposals).
// Requires n_t >= 1.
std::pair<double, double> recall_precision(const EvalCounts& counts);

struct RecallPrecisionPoint {
  double recall = 0.0;
  double precision = 0.0;
};

// One (recall, precision) pair per score_sweep operating point.
std::vector<RecallPrecisionPoint> operating_points(
    std::string_view query_text, std::span<const SemanticTrack> tracks,
    std::span<const FrameSpan> gts, double iou_threshold,
    const Embedder& embedder);

// The 11-point recall grid {0.0, 0.1, ..., 1.0}, or the sub-grid of levels
// >= min_level when given (min 0.5 keeps 6 levels).
std::vector<double> recall_levels(std::optional<double> min_level = {});

// Mean over the given recall levels of the interpolated precision
// max{precision at points with recall >= level}, 0 when no point reaches the
// level.
double interpolated_ap(std::span<const RecallPrecisionPoint> points,
                       std::span<const double> levels);

// 11-point interpolated average precision for one query.
double average_precision(std::string_view query_text,
                         std::span<const SemanticTrack> tracks,
                         std::span<const FrameSpan> gts, double iou_threshold,
                         const Embedder& embedder);

// Mean per-query AP. With restrict_recall_ge set, each query's AP averages
// interpolated precision only over recall levels >= that value.
double mean_ap(const GroundTruth& ground_truth,
               std::span<const SemanticTrack> tracks, double iou_threshold,
               const Embedder& embedder,
               std::optional<double> restrict_recall_ge = {});

struct QueryEval {
  EvalCounts counts;
  double recall = 0.0;
  double precision = 0.0;
  double ap = 0.0;
  double ap_recall_ge_05 = 0.0;
};

struct EvalReport {
  double iou_threshold = 0.0;
  double search_sim_threshold = 0.0;
  std::string backend;
  std::vector<std::pair<std::string, QueryEval>> per_query;  // in input order
  double map_all = 0.0;
  double map_recall_ge_05 = 0.0;
};

// Runs the full protocol: per query, proposals at the search similarity
// threshold are counted at the IoU threshold, and AP comes from the complete
// score sweep.
EvalReport evaluate(const GroundTruth& ground_truth,
                    std::span<const SemanticTrack> tracks,
                    const Embedder& embedder, double search_sim_threshold,
                    double iou_threshold);

void write_eval_report(const EvalReport& report, std::ostream& out);

// Means over queries of per-query recall and precision.
std::pair<double, double> macro_recall_precision(const EvalReport& report);

struct CaptionFrequency {
  std::string caption;
  std::int64_t count = 0;

  bool operator==(const CaptionFrequency&) const = default;
};

// Samples min(sample_size, |frames|) frames uniformly without replacement,
// counts exact caption frequencies over their boxes, and returns the top_n
// captions by descending count, ties by lexicographic caption order.
// Deterministic for a given seed.
std::vector<CaptionFrequency> suggest_query_candidates(
    std::span<const FrameRecord> frames, std::size_t sample_size,
    std::size_t top_n, std::uint64_t rng_seed);

// One grid cell of a Table-1-style threshold sweep.
struct SweepCell {
  double t_sim = 0.0;
  double s_sim = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

// CSV with header "metric,t_sim,s_sim,value"; all recall rows first, then
// all precision rows, in the given cell order.
void write_sweep_csv(std::span<const SweepCell> cells, std::ostream& out);

}  // namespace semtrack
