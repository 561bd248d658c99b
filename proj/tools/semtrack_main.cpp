// semtrack: turn per-frame caption detections into semantic tracks, search
// them with natural-language queries, and score retrieval quality.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "semtrack/embed.hpp"
#include "semtrack/eval.hpp"
#include "semtrack/ingest.hpp"
#include "semtrack/log.hpp"
#include "semtrack/search.hpp"
#include "semtrack/track.hpp"
#include "semtrack/track_io.hpp"

namespace {

using namespace semtrack;

// Output files are written to a sibling temp file and renamed into place, so
// an interrupted run never leaves a truncated file behind.
void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  const fs::path tmp =
      dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open output file: " + tmp.string());
    }
    out << contents;
    out.flush();
    if (!out) {
      throw std::runtime_error("failed writing output file: " + tmp.string());
    }
  }
  fs::rename(tmp, target);
}

void emit(const std::optional<std::string>& out_path,
          const std::string& contents) {
  if (out_path.has_value()) {
    write_file_atomic(*out_path, contents);
  } else {
    std::cout << contents;
  }
}

struct EmbedderOptions {
  std::string backend;  // "avg", "sent", or empty for auto
  std::string vectors_path;
  std::string sentence_vectors_path;
};

void add_embedder_options(CLI::App* cmd, EmbedderOptions& opts) {
  cmd->add_option("--backend", opts.backend,
                  "Embedding backend: 'avg' (averaged word vectors) or "
                  "'sent' (precomputed sentence vectors)")
      ->check(CLI::IsMember({"avg", "sent"}));
  cmd->add_option("--vectors", opts.vectors_path,
                  "Word-vector file for the 'avg' backend")
      ->check(CLI::ExistingFile);
  cmd->add_option("--sentence-vectors", opts.sentence_vectors_path,
                  "Sentence-vector sidecar for the 'sent' backend")
      ->check(CLI::ExistingFile);
}

// Owns whichever embedding inputs were loaded. The Embedder points into the
// heap-allocated table/sidecar, so moving this struct keeps it valid.
struct LoadedEmbedder {
  std::unique_ptr<WordVectorTable> table;
  std::unique_ptr<SentenceVectorSidecar> sidecar;
  std::optional<Embedder> embedder;

  const Embedder& get() const { return *embedder; }
};

LoadedEmbedder make_embedder(const EmbedderOptions& opts) {
  std::string backend = opts.backend;
  if (backend.empty()) {
    if (!opts.vectors_path.empty()) backend = "avg";
    if (!opts.sentence_vectors_path.empty()) backend = "sent";
  }
  LoadedEmbedder loaded;
  if (backend == "avg") {
    if (opts.vectors_path.empty()) {
      throw std::runtime_error("backend 'avg' requires --vectors");
    }
    loaded.table = std::make_unique<WordVectorTable>(
        load_word_vectors_file(opts.vectors_path));
    loaded.embedder.emplace(*loaded.table);
  } else if (backend == "sent") {
    if (opts.sentence_vectors_path.empty()) {
      throw std::runtime_error("backend 'sent' requires --sentence-vectors");
    }
    loaded.sidecar = std::make_unique<SentenceVectorSidecar>(
        load_sentence_vectors_file(opts.sentence_vectors_path));
    loaded.embedder.emplace(*loaded.sidecar);
  } else {
    throw std::runtime_error(
        "no embedding inputs given; pass --backend with --vectors or "
        "--sentence-vectors");
  }
  return loaded;
}

// Query/eval fall back to the vectors already cached in the tracks file:
// each representative caption maps to its representative vector, so any
// query that matches a track caption embeds without extra inputs.
LoadedEmbedder make_embedder_or_tracks_fallback(const EmbedderOptions& opts,
                                                const TracksFile& tracks) {
  if (!opts.backend.empty() || !opts.vectors_path.empty() ||
      !opts.sentence_vectors_path.empty()) {
    return make_embedder(opts);
  }
  LoadedEmbedder loaded;
  loaded.sidecar = std::make_unique<SentenceVectorSidecar>();
  for (const SemanticTrack& track : tracks.tracks) {
    if (loaded.sidecar->dim == 0) {
      loaded.sidecar->dim = track.representative_vector.size();
    }
    loaded.sidecar->entries.emplace(track.representative_caption,
                                    track.representative_vector);
  }
  log::info("no embedding inputs given; embedding queries against the " +
            std::to_string(loaded.sidecar->entries.size()) +
            " representative captions in the tracks file");
  loaded.embedder.emplace(*loaded.sidecar);
  return loaded;
}

void check_range(bool ok, const std::string& message) {
  if (!ok) throw std::runtime_error(message);
}

nlohmann::json proposals_to_json(const std::vector<Proposal>& proposals) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Proposal& p : proposals) {
    arr.push_back({{"track_id", p.track_id},
                   {"start", p.start_frame},
                   {"end", p.end_frame},
                   {"score", p.score},
                   {"rep_caption", p.rep_caption}});
  }
  return arr;
}

// --- track ---------------------------------------------------------------

struct TrackArgs {
  std::string frames_path;
  EmbedderOptions embedder;
  double t_sim = 0.7;
  int cutting = 5;
  int min_len = 5;
  double spatial_gate = 0.3;
  bool no_spatial_gate = false;
  std::string out_path;
};

int run_track(const TrackArgs& args) {
  check_range(args.t_sim >= -1.0 && args.t_sim <= 1.0,
              "track similarity threshold must lie in [-1,1]");
  check_range(args.cutting >= 0, "cutting threshold must be >= 0");
  check_range(args.min_len >= 1, "minimum track length must be >= 1");
  if (!args.no_spatial_gate) {
    check_range(args.spatial_gate >= 0.0 && args.spatial_gate <= 1.0,
                "spatial gate IoU must lie in [0,1]");
  }

  const std::vector<FrameRecord> frames =
      load_frame_records_file(args.frames_path);
  const LoadedEmbedder loaded = make_embedder(args.embedder);

  TrackerConfig config;
  config.track_sim_threshold = args.t_sim;
  config.cutting_threshold = args.cutting;
  config.min_track_len = args.min_len;
  config.spatial_gate_iou =
      args.no_spatial_gate ? std::nullopt : std::optional<double>(args.spatial_gate);

  Tracker tracker(config);
  for (const FrameRecord& frame : frames) {
    tracker.step(frame, loaded.get());
  }
  TracksFile out{config, tracker.finalize()};
  write_file_atomic(args.out_path, tracks_to_json(out));

  const TrackerStats& stats = tracker.stats();
  std::printf("frames processed: %lld\n",
              static_cast<long long>(stats.frames_processed));
  std::printf("tracks stored: %lld\n",
              static_cast<long long>(stats.tracks_stored));
  std::printf("tracks discarded: %lld\n",
              static_cast<long long>(stats.tracks_discarded));
  return 0;
}

// --- query ---------------------------------------------------------------

struct QueryArgs {
  std::string tracks_path;
  std::string text;
  EmbedderOptions embedder;
  double s_sim = 0.0;
  std::optional<std::size_t> top_k;
  std::optional<std::string> out_path;
};

int run_query(const QueryArgs& args) {
  check_range(args.s_sim >= -1.0 && args.s_sim <= 1.0,
              "search similarity threshold must lie in [-1,1]");
  check_range(!args.top_k.has_value() || *args.top_k >= 1,
              "--top-k must be >= 1");

  const TracksFile tracks = load_tracks_file(args.tracks_path);
  const LoadedEmbedder loaded =
      make_embedder_or_tracks_fallback(args.embedder, tracks);

  const std::vector<Proposal> proposals =
      search(args.text, tracks.tracks, {args.s_sim, args.top_k}, loaded.get());
  emit(args.out_path, proposals_to_json(proposals).dump(2) + "\n");
  return 0;
}

// --- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string tracks_path;
  std::string gt_path;
  EmbedderOptions embedder;
  double iou_thr = 0.3;
  double s_sim = 0.0;
  std::string out_path;
  std::vector<std::string> sweep_tracks;  // "<t_sim>=<path>"
  std::vector<double> sweep_s_sims;
  std::string sweep_csv_path;
};

int run_eval(const EvalArgs& args) {
  check_range(args.iou_thr > 0.0 && args.iou_thr <= 1.0,
              "IoU threshold must lie in (0,1]");
  check_range(args.s_sim >= -1.0 && args.s_sim <= 1.0,
              "search similarity threshold must lie in [-1,1]");

  const GroundTruth gt = load_ground_truth_file(args.gt_path);
  const TracksFile tracks = load_tracks_file(args.tracks_path);
  const LoadedEmbedder loaded =
      make_embedder_or_tracks_fallback(args.embedder, tracks);

  const EvalReport report =
      evaluate(gt, tracks.tracks, loaded.get(), args.s_sim, args.iou_thr);
  std::ostringstream report_json;
  write_eval_report(report, report_json);
  write_file_atomic(args.out_path, report_json.str());
  std::printf("mAP %.6f  mAP(Recall>=0.5) %.6f\n", report.map_all,
              report.map_recall_ge_05);

  if (!args.sweep_tracks.empty() || !args.sweep_s_sims.empty() ||
      !args.sweep_csv_path.empty()) {
    check_range(!args.sweep_tracks.empty() && !args.sweep_s_sims.empty() &&
                    !args.sweep_csv_path.empty(),
                "threshold sweep needs --sweep-tracks, --sweep-s-sim and "
                "--sweep-csv together");
    std::vector<SweepCell> cells;
    for (const std::string& entry : args.sweep_tracks) {
      const std::size_t eq = entry.find('=');
      check_range(eq != std::string::npos && eq > 0 && eq + 1 < entry.size(),
                  "--sweep-tracks entries must look like <t_sim>=<path>");
      const double t_sim = std::stod(entry.substr(0, eq));
      const std::string path = entry.substr(eq + 1);
      const TracksFile t_tracks = load_tracks_file(path);
      const LoadedEmbedder t_loaded =
          make_embedder_or_tracks_fallback(args.embedder, t_tracks);
      for (double s_sim : args.sweep_s_sims) {
        check_range(s_sim >= -1.0 && s_sim <= 1.0,
                    "search similarity threshold must lie in [-1,1]");
        const EvalReport cell_report = evaluate(gt, t_tracks.tracks,
                                                t_loaded.get(), s_sim,
                                                args.iou_thr);
        const auto [recall, precision] = macro_recall_precision(cell_report);
        cells.push_back({t_sim, s_sim, recall, precision});
      }
    }
    std::ostringstream csv;
    write_sweep_csv(cells, csv);
    write_file_atomic(args.sweep_csv_path, csv.str());
  }
  return 0;
}

// --- suggest-queries -----------------------------------------------------

struct SuggestArgs {
  std::string frames_path;
  std::size_t sample = 200;
  std::size_t top = 100;
  std::uint64_t seed = 0;
  std::optional<std::string> out_path;
};

int run_suggest(const SuggestArgs& args) {
  check_range(args.sample >= 1, "--sample must be >= 1");
  check_range(args.top >= 1, "--top must be >= 1");

  const std::vector<FrameRecord> frames =
      load_frame_records_file(args.frames_path);
  if (frames.empty()) {
    throw std::runtime_error("frames file is empty: " + args.frames_path);
  }

  const std::vector<CaptionFrequency> ranked =
      suggest_query_candidates(frames, args.sample, args.top, args.seed);
  std::ostringstream out;
  for (const CaptionFrequency& cf : ranked) {
    out << cf.count << '\t' << cf.caption << '\n';
  }
  emit(args.out_path, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "semtrack: semantic video-segment tracking, retrieval and evaluation"};
  app.require_subcommand(1);

  TrackArgs track_args;
  CLI::App* track_cmd = app.add_subcommand(
      "track", "Build semantic tracks from a frames file");
  track_cmd->add_option("--frames", track_args.frames_path, "Frames JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  add_embedder_options(track_cmd, track_args.embedder);
  track_cmd->add_option("--t-sim", track_args.t_sim,
                        "Track similarity threshold in [-1,1]");
  track_cmd->add_option("--cutting", track_args.cutting,
                        "Consecutive misses a track survives");
  track_cmd->add_option("--min-len", track_args.min_len,
                        "Minimum matched observations for a stored track");
  CLI::Option* gate_opt = track_cmd->add_option(
      "--spatial-gate", track_args.spatial_gate,
      "Box-IoU gate against the track's last box, in [0,1]");
  track_cmd
      ->add_flag("--no-spatial-gate", track_args.no_spatial_gate,
                 "Disable the spatial gate")
      ->excludes(gate_opt);
  track_cmd->add_option("--out", track_args.out_path, "Output tracks file")
      ->required();

  QueryArgs query_args;
  CLI::App* query_cmd = app.add_subcommand(
      "query", "Propose tracks matching a natural-language query");
  query_cmd->add_option("--tracks", query_args.tracks_path, "Tracks file")
      ->required()
      ->check(CLI::ExistingFile);
  query_cmd->add_option("--text", query_args.text, "Query text")->required();
  add_embedder_options(query_cmd, query_args.embedder);
  query_cmd->add_option("--s-sim", query_args.s_sim,
                        "Search similarity threshold in [-1,1]");
  query_cmd->add_option("--top-k", query_args.top_k,
                        "Keep at most this many proposals");
  query_cmd->add_option("--out", query_args.out_path,
                        "Write proposals here instead of stdout");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Score tracks against ground-truth segments");
  eval_cmd->add_option("--tracks", eval_args.tracks_path, "Tracks file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--gt", eval_args.gt_path, "Ground-truth JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  add_embedder_options(eval_cmd, eval_args.embedder);
  eval_cmd->add_option("--iou-thr", eval_args.iou_thr,
                       "Segment IoU threshold in (0,1]");
  eval_cmd->add_option("--s-sim", eval_args.s_sim,
                       "Search similarity threshold for the counts");
  eval_cmd->add_option("--out", eval_args.out_path, "Output report file")
      ->required();
  eval_cmd->add_option("--sweep-tracks", eval_args.sweep_tracks,
                       "Per-threshold tracks files as <t_sim>=<path>");
  eval_cmd->add_option("--sweep-s-sim", eval_args.sweep_s_sims,
                       "Search similarity thresholds for the sweep");
  eval_cmd->add_option("--sweep-csv", eval_args.sweep_csv_path,
                       "Output CSV for the threshold sweep");

  SuggestArgs suggest_args;
  CLI::App* suggest_cmd = app.add_subcommand(
      "suggest-queries", "Rank frequent captions as query candidates");
  suggest_cmd
      ->add_option("--frames", suggest_args.frames_path, "Frames JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  suggest_cmd->add_option("--sample", suggest_args.sample,
                          "Number of frames to sample");
  suggest_cmd->add_option("--top", suggest_args.top,
                          "Number of captions to keep");
  suggest_cmd->add_option("--seed", suggest_args.seed, "Sampling seed");
  suggest_cmd->add_option("--out", suggest_args.out_path,
                          "Write the ranking here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (track_cmd->parsed()) return run_track(track_args);
    if (query_cmd->parsed()) return run_query(query_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (suggest_cmd->parsed()) return run_suggest(suggest_args);
  } catch (const std::exception& e) {
    std::cerr << "semtrack: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
