#include "semtrack/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace semtrack {

namespace {

constexpr double kLevelSlack = 1e-12;

void check_span(FrameSpan s) {
  if (s.end < s.start) {
    throw std::invalid_argument("invalid interval [" +
                                std::to_string(s.start) + "," +
                                std::to_string(s.end) + "]");
  }
}

std::vector<FrameSpan> proposal_spans(std::span<const Proposal> proposals) {
  std::vector<FrameSpan> spans;
  spans.reserve(proposals.size());
  for (const Proposal& p : proposals) spans.push_back(p.span());
  return spans;
}

// Uniform draw in [0, n) by rejection; avoids modulo bias and keeps results
// reproducible for a fixed engine state.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

}  // namespace

double segment_iou(FrameSpan a, FrameSpan b) {
  check_span(a);
  check_span(b);
  const std::int64_t overlap =
      std::min(a.end, b.end) - std::max(a.start, b.start) + 1;
  if (overlap <= 0) return 0.0;
  const std::int64_t len_a = a.end - a.start + 1;
  const std::int64_t len_b = b.end - b.start + 1;
  return static_cast<double>(overlap) /
         static_cast<double>(len_a + len_b - overlap);
}

EvalCounts match_counts(std::span<const FrameSpan> gts,
                        std::span<const FrameSpan> proposals,
                        double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("IoU threshold must lie in (0,1]");
  }
  EvalCounts counts;
  counts.n_t = static_cast<int>(gts.size());
  counts.n_p = static_cast<int>(proposals.size());
  std::vector<bool> gt_detected(gts.size(), false);
  std::vector<bool> proposal_good(proposals.size(), false);
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t p = 0; p < proposals.size(); ++p) {
      if (segment_iou(gts[g], proposals[p]) >= iou_threshold) {
        gt_detected[g] = true;
        proposal_good[p] = true;
      }
    }
  }
  counts.n_d = static_cast<int>(
      std::count(gt_detected.begin(), gt_detected.end(), true));
  counts.n_g = static_cast<int>(
      std::count(proposal_good.begin(), proposal_good.end(), true));
  return counts;
}

std::pair<double, double> recall_precision(const EvalCounts& counts) {
  if (counts.n_t < 1) {
    throw std::invalid_argument("recall undefined without ground truth");
  }
  const double recall =
      static_cast<double>(counts.n_d) / static_cast<double>(counts.n_t);
  const double precision =
      counts.n_p == 0 ? 0.0
                      : static_cast<double>(counts.n_g) /
                            static_cast<double>(counts.n_p);
  return {recall, precision};
}

std::vector<RecallPrecisionPoint> operating_points(
    std::string_view query_text, std::span<const SemanticTrack> tracks,
    std::span<const FrameSpan> gts, double iou_threshold,
    const Embedder& embedder) {
  if (gts.empty()) {
    throw std::invalid_argument("operating_points requires ground truth");
  }
  std::vector<RecallPrecisionPoint> points;
  for (const SweepPoint& sp : score_sweep(query_text, tracks, embedder)) {
    const EvalCounts counts =
        match_counts(gts, proposal_spans(sp.proposals), iou_threshold);
    const auto [recall, precision] = recall_precision(counts);
    points.push_back({recall, precision});
  }
  return points;
}

std::vector<double> recall_levels(std::optional<double> min_level) {
  std::vector<double> levels;
  for (int i = 0; i <= 10; ++i) {
    const double level = static_cast<double>(i) / 10.0;
    if (!min_level.has_value() || level >= *min_level - kLevelSlack) {
      levels.push_back(level);
    }
  }
  return levels;
}

double interpolated_ap(std::span<const RecallPrecisionPoint> points,
                       std::span<const double> levels) {
  if (levels.empty()) {
    throw std::invalid_argument("interpolated_ap requires recall levels");
  }
  double sum = 0.0;
  for (double level : levels) {
    double best = 0.0;
    for (const RecallPrecisionPoint& p : points) {
      if (p.recall >= level - kLevelSlack) best = std::max(best, p.precision);
    }
    sum += best;
  }
  return sum / static_cast<double>(levels.size());
}

double average_precision(std::string_view query_text,
                         std::span<const SemanticTrack> tracks,
                         std::span<const FrameSpan> gts, double iou_threshold,
                         const Embedder& embedder) {
  const auto points =
      operating_points(query_text, tracks, gts, iou_threshold, embedder);
  const auto levels = recall_levels();
  return interpolated_ap(points, levels);
}

double mean_ap(const GroundTruth& ground_truth,
               std::span<const SemanticTrack> tracks, double iou_threshold,
               const Embedder& embedder,
               std::optional<double> restrict_recall_ge) {
  if (ground_truth.queries.empty()) {
    throw std::invalid_argument("mean_ap requires at least one query");
  }
  const auto levels = recall_levels(restrict_recall_ge);
  double sum = 0.0;
  for (const GroundTruthQuery& query : ground_truth.queries) {
    const auto points = operating_points(query.text, tracks, query.segments,
                                         iou_threshold, embedder);
    sum += interpolated_ap(points, levels);
  }
  return sum / static_cast<double>(ground_truth.queries.size());
}

EvalReport evaluate(const GroundTruth& ground_truth,
                    std::span<const SemanticTrack> tracks,
                    const Embedder& embedder, double search_sim_threshold,
                    double iou_threshold) {
  if (ground_truth.queries.empty()) {
    throw std::invalid_argument("evaluate requires at least one query");
  }
  EvalReport report;
  report.iou_threshold = iou_threshold;
  report.search_sim_threshold = search_sim_threshold;
  report.backend = embedder.backend() == EmbedBackend::kAveragedWords
                       ? "averaged_words"
                       : "precomputed_sentence";

  const auto all_levels = recall_levels();
  const auto high_levels = recall_levels(0.5);

  double ap_sum = 0.0;
  double ap_high_sum = 0.0;
  for (const GroundTruthQuery& query : ground_truth.queries) {
    QueryEval qe;
    try {
      const std::vector<Proposal> proposals = search(
          query.text, tracks, {search_sim_threshold, std::nullopt}, embedder);
      qe.counts =
          match_counts(query.segments, proposal_spans(proposals), iou_threshold);
      std::tie(qe.recall, qe.precision) = recall_precision(qe.counts);
      const auto points = operating_points(query.text, tracks, query.segments,
                                           iou_threshold, embedder);
      qe.ap = interpolated_ap(points, all_levels);
      qe.ap_recall_ge_05 = interpolated_ap(points, high_levels);
    } catch (const std::exception& e) {
      throw std::runtime_error("query '" + query.id + "': " + e.what());
    }
    ap_sum += qe.ap;
    ap_high_sum += qe.ap_recall_ge_05;
    report.per_query.emplace_back(query.id, qe);
  }

  const double n = static_cast<double>(ground_truth.queries.size());
  report.map_all = ap_sum / n;
  report.map_recall_ge_05 = ap_high_sum / n;
  return report;
}

void write_eval_report(const EvalReport& report, std::ostream& out) {
  using nlohmann::json;
  json per_query = json::object();
  for (const auto& [id, qe] : report.per_query) {
    per_query[id] = {{"counts",
                      {{"n_t", qe.counts.n_t},
                       {"n_p", qe.counts.n_p},
                       {"n_d", qe.counts.n_d},
                       {"n_g", qe.counts.n_g}}},
                     {"recall", qe.recall},
                     {"precision", qe.precision},
                     {"ap", qe.ap}};
  }
  const json root = {
      {"config",
       {{"backend", report.backend}, {"s_sim", report.search_sim_threshold}}},
      {"iou_threshold", report.iou_threshold},
      {"per_query", std::move(per_query)},
      {"map_all", report.map_all},
      {"map_recall_ge_05", report.map_recall_ge_05}};
  out << root.dump(2) << '\n';
}

std::pair<double, double> macro_recall_precision(const EvalReport& report) {
  if (report.per_query.empty()) return {0.0, 0.0};
  double recall_sum = 0.0;
  double precision_sum = 0.0;
  for (const auto& [id, qe] : report.per_query) {
    recall_sum += qe.recall;
    precision_sum += qe.precision;
  }
  const double n = static_cast<double>(report.per_query.size());
  return {recall_sum / n, precision_sum / n};
}

std::vector<CaptionFrequency> suggest_query_candidates(
    std::span<const FrameRecord> frames, std::size_t sample_size,
    std::size_t top_n, std::uint64_t rng_seed) {
  const std::size_t take = std::min(sample_size, frames.size());

  // Partial Fisher-Yates over frame indices: the first `take` entries are a
  // uniform sample without replacement.
  std::vector<std::size_t> indices(frames.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  std::mt19937_64 rng(rng_seed);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(bounded_draw(rng, indices.size() - i));
    std::swap(indices[i], indices[j]);
  }

  std::unordered_map<std::string, std::int64_t> frequency;
  for (std::size_t i = 0; i < take; ++i) {
    for (const CaptionBox& box : frames[indices[i]].boxes) {
      ++frequency[box.caption];
    }
  }

  std::vector<CaptionFrequency> ranked;
  ranked.reserve(frequency.size());
  for (auto& [caption, count] : frequency) {
    ranked.push_back({caption, count});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const CaptionFrequency& a, const CaptionFrequency& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.caption < b.caption;
            });
  if (ranked.size() > top_n) ranked.resize(top_n);
  return ranked;
}

void write_sweep_csv(std::span<const SweepCell> cells, std::ostream& out) {
  out << "metric,t_sim,s_sim,value\n";
  char buf[160];
  const auto row = [&](const char* metric, const SweepCell& c, double value) {
    std::snprintf(buf, sizeof(buf), "%s,%g,%g,%.6f\n", metric, c.t_sim,
                  c.s_sim, value);
    out << buf;
  };
  for (const SweepCell& c : cells) row("recall", c, c.recall);
  for (const SweepCell& c : cells) row("precision", c, c.precision);
}

}  // namespace semtrack
