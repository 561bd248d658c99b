#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "semtrack/track_io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
}

const std::string& cli_binary() {
  static const std::string path = [] {
    const char* env = std::getenv("SEMTRACK_CLI_BIN");
    REQUIRE_MESSAGE(env != nullptr,
                    "SEMTRACK_CLI_BIN must point at the semtrack binary");
    return std::string(env);
  }();
  return path;
}

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("semtrack_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path out_file = scratch_dir() / "stdout.txt";
  const fs::path err_file = scratch_dir() / "stderr.txt";
  const std::string command = "'" + cli_binary() + "' " + args + " > '" +
                              out_file.string() + "' 2> '" +
                              err_file.string() + "'";
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

// Five-concept fixture: two stable concepts tracked over six frames.
fs::path fixture_frames() {
  static const fs::path path = [] {
    const fs::path p = scratch_dir() / "frames.jsonl";
    std::ostringstream body;
    for (int f = 0; f < 6; ++f) {
      body << R"({"frame":)" << f
           << R"(,"boxes":[{"x":)" << 10 + f
           << R"(,"y":10,"w":20,"h":20,"caption":"a red car"},)"
           << R"({"x":100,"y":)" << 100 + f
           << R"(,"w":30,"h":30,"caption":"a tall tree"}]})" << "\n";
    }
    spit(p, body.str());
    return p;
  }();
  return path;
}

fs::path fixture_vectors() {
  static const fs::path path = [] {
    const fs::path p = scratch_dir() / "vectors.txt";
    spit(p,
         "6 3\n"
         "a 0.1 0.1 0.1\n"
         "red 1 0 0\n"
         "car 0.9 0.1 0\n"
         "tall 0 1 0\n"
         "tree 0 0.9 0.1\n"
         "green 0.5 0.5 0\n");
    return p;
  }();
  return path;
}

std::string q(const fs::path& path) { return "'" + path.string() + "'"; }

fs::path tracked_fixture() {
  static const fs::path tracks = [] {
    const fs::path p = scratch_dir() / "tracks.json";
    const auto result = run_cli("track --frames " + q(fixture_frames()) +
                                " --backend avg --vectors " +
                                q(fixture_vectors()) +
                                " --t-sim 0.7 --cutting 5 --min-len 5 "
                                "--spatial-gate 0.3 --out " + q(p));
    REQUIRE_MESSAGE(result.exit_code == 0, result.err);
    return p;
  }();
  return tracks;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("track writes a tracks file and prints a summary") {
  const fs::path tracks = tracked_fixture();
  CHECK(fs::exists(tracks));

  const auto result = run_cli("track --frames " + q(fixture_frames()) +
                              " --backend avg --vectors " +
                              q(fixture_vectors()) + " --out " +
                              q(scratch_dir() / "tracks2.json"));
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("frames processed: 6") != std::string::npos);
  CHECK(result.out.find("tracks stored: 2") != std::string::npos);
  CHECK(result.out.find("tracks discarded:") != std::string::npos);

  // The output parses back through the library reader.
  const semtrack::TracksFile parsed =
      semtrack::load_tracks_file(tracks.string());
  CHECK(parsed.tracks.size() == 2);
  CHECK(parsed.config.track_sim_threshold == 0.7);
}

TEST_CASE("track rejects a missing vectors file, naming the path") {
  const auto result = run_cli("track --frames " + q(fixture_frames()) +
                              " --backend avg --vectors /nope/missing.txt "
                              "--out " + q(scratch_dir() / "t.json"));
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("/nope/missing.txt") != std::string::npos);
}

TEST_CASE("track rejects an out-of-range similarity threshold") {
  const auto result = run_cli("track --frames " + q(fixture_frames()) +
                              " --backend avg --vectors " +
                              q(fixture_vectors()) + " --t-sim 1.5 --out " +
                              q(scratch_dir() / "t.json"));
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("track similarity threshold must lie in [-1,1]") !=
        std::string::npos);
}

TEST_CASE("track with the gate disabled records a null gate") {
  const fs::path out = scratch_dir() / "gateless.json";
  const auto result = run_cli("track --frames " + q(fixture_frames()) +
                              " --backend avg --vectors " +
                              q(fixture_vectors()) +
                              " --no-spatial-gate --out " + q(out));
  REQUIRE_MESSAGE(result.exit_code == 0, result.err);
  const auto parsed = semtrack::load_tracks_file(out.string());
  CHECK_FALSE(parsed.config.spatial_gate_iou.has_value());
}

TEST_CASE("query emits a JSON proposal array") {
  const auto result = run_cli("query --tracks " + q(tracked_fixture()) +
                              " --text 'a red car' --s-sim 0.6");
  REQUIRE_MESSAGE(result.exit_code == 0, result.err);
  const auto proposals = nlohmann::json::parse(result.out);
  REQUIRE(proposals.is_array());
  REQUIRE(proposals.size() == 1);
  CHECK(proposals[0]["rep_caption"] == "a red car");
  CHECK(proposals[0]["start"] == 0);
  CHECK(proposals[0]["end"] == 5);
  CHECK(proposals[0]["score"].get<double>() > 0.99);
}

TEST_CASE("query with a strict threshold returns an empty array") {
  const auto result = run_cli("query --tracks " + q(tracked_fixture()) +
                              " --text 'a tall tree' --s-sim 0.99 --top-k 3");
  CHECK(result.exit_code == 0);
  const auto proposals = nlohmann::json::parse(result.out);
  CHECK(proposals.is_array());
  CHECK(proposals.size() <= 1);  // only the tree track itself can pass
}

TEST_CASE("query respects top-k") {
  const auto result = run_cli("query --tracks " + q(tracked_fixture()) +
                              " --text 'a red car' --s-sim -1 --top-k 1");
  REQUIRE(result.exit_code == 0);
  CHECK(nlohmann::json::parse(result.out).size() == 1);
}

TEST_CASE("query writes to --out instead of stdout when asked") {
  const fs::path out = scratch_dir() / "proposals.json";
  const auto result = run_cli("query --tracks " + q(tracked_fixture()) +
                              " --text 'a red car' --s-sim 0.6 --out " +
                              q(out));
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.empty());
  CHECK(nlohmann::json::parse(slurp(out)).size() == 1);
}

TEST_CASE("query rejects an unembeddable query") {
  const auto result = run_cli("query --tracks " + q(tracked_fixture()) +
                              " --text 'nothing like this'");
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("query not embeddable") != std::string::npos);
}

TEST_CASE("eval reproduces the worked fixture through files") {
  // Four one-dimensional tracks realize the 3-ground-truth scenario.
  semtrack::TracksFile fixture;
  fixture.config = {0.7, 5, 5, std::nullopt};
  const std::vector<semtrack::FrameSpan> spans = {
      {15, 49}, {75, 94}, {200, 210}, {110, 139}};
  for (std::size_t i = 0; i < spans.size(); ++i) {
    semtrack::SemanticTrack track;
    track.track_id = static_cast<int>(i);
    track.representative_caption = "proposal " + std::to_string(i);
    track.representative_vector = {1.0};
    track.start_frame = spans[i].start;
    track.end_frame = spans[i].end;
    track.state = semtrack::TrackState::kStored;
    fixture.tracks.push_back(std::move(track));
  }
  const fs::path tracks_path = scratch_dir() / "counting_tracks.json";
  spit(tracks_path, semtrack::tracks_to_json(fixture));

  const fs::path sidecar_path = scratch_dir() / "counting_sidecar.jsonl";
  spit(sidecar_path, R"({"caption":"the scene","vec":[1.0]})" "\n");

  const fs::path gt_path = scratch_dir() / "counting_gt.json";
  spit(gt_path,
       R"({"queries":[{"id":"q1","text":"the scene","segments":)"
       R"([{"start":0,"end":34},{"start":60,"end":79},{"start":100,"end":129}]}]})");

  const fs::path report_path = scratch_dir() / "counting_report.json";
  const auto result = run_cli(
      "eval --tracks " + q(tracks_path) + " --gt " + q(gt_path) +
      " --backend sent --sentence-vectors " + q(sidecar_path) +
      " --iou-thr 0.3 --out " + q(report_path));
  REQUIRE_MESSAGE(result.exit_code == 0, result.err);
  CHECK(result.out.find("mAP") != std::string::npos);

  const auto report = nlohmann::json::parse(slurp(report_path));
  CHECK(report["per_query"]["q1"]["recall"].get<double>() ==
        doctest::Approx(2.0 / 3.0));
  CHECK(report["per_query"]["q1"]["precision"].get<double>() ==
        doctest::Approx(0.5));
  CHECK(report["per_query"]["q1"]["counts"]["n_d"] == 2);
  CHECK(report["per_query"]["q1"]["counts"]["n_g"] == 2);

  SUBCASE("the tracks-file fallback embedder gives the same numbers") {
    const fs::path report2 = scratch_dir() / "counting_report2.json";
    const fs::path gt2 = scratch_dir() / "counting_gt2.json";
    spit(gt2,
         R"({"queries":[{"id":"q1","text":"proposal 0","segments":)"
         R"([{"start":0,"end":34},{"start":60,"end":79},{"start":100,"end":129}]}]})");
    const auto fallback = run_cli("eval --tracks " + q(tracks_path) +
                                  " --gt " + q(gt2) + " --iou-thr 0.3 --out " +
                                  q(report2));
    REQUIRE_MESSAGE(fallback.exit_code == 0, fallback.err);
    const auto parsed = nlohmann::json::parse(slurp(report2));
    CHECK(parsed["per_query"]["q1"]["recall"].get<double>() ==
          doctest::Approx(2.0 / 3.0));
  }

  SUBCASE("sweep CSV is emitted for per-threshold track files") {
    const fs::path csv_path = scratch_dir() / "sweep.csv";
    const auto sweep = run_cli(
        "eval --tracks " + q(tracks_path) + " --gt " + q(gt_path) +
        " --backend sent --sentence-vectors " + q(sidecar_path) +
        " --iou-thr 0.3 --out " + q(scratch_dir() / "r.json") +
        " --sweep-tracks 0.7=" + tracks_path.string() +
        " --sweep-s-sim 0.6 0.8 --sweep-csv " + q(csv_path));
    REQUIRE_MESSAGE(sweep.exit_code == 0, sweep.err);
    const std::string csv = slurp(csv_path);
    CHECK(csv.find("metric,t_sim,s_sim,value") == 0);
    CHECK(csv.find("recall,0.7,0.6,0.666667") != std::string::npos);
    CHECK(csv.find("precision,0.7,0.8,0.500000") != std::string::npos);
  }
}

TEST_CASE("eval rejects an out-of-range IoU threshold") {
  const auto result =
      run_cli("eval --tracks " + q(tracked_fixture()) + " --gt " +
              q(tracked_fixture()) + " --iou-thr 0 --out " +
              q(scratch_dir() / "r.json"));
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("IoU threshold must lie in (0,1]") !=
        std::string::npos);
}

TEST_CASE("eval rejects ground truth with an empty segment list") {
  const fs::path gt_path = scratch_dir() / "empty_gt.json";
  spit(gt_path, R"({"queries":[{"id":"q1","text":"t","segments":[]}]})");
  const auto result = run_cli("eval --tracks " + q(tracked_fixture()) +
                              " --gt " + q(gt_path) + " --iou-thr 0.3 --out " +
                              q(scratch_dir() / "r.json"));
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("empty segment list") != std::string::npos);
}

TEST_CASE("suggest-queries prints count-tab-caption lines") {
  const auto result = run_cli("suggest-queries --frames " +
                              q(fixture_frames()) +
                              " --sample 200 --top 100 --seed 7");
  REQUIRE(result.exit_code == 0);
  CHECK(result.out == "6\ta red car\n6\ta tall tree\n");

  const auto top1 = run_cli("suggest-queries --frames " + q(fixture_frames()) +
                            " --sample 200 --top 1 --seed 7");
  CHECK(top1.out == "6\ta red car\n");
}

TEST_CASE("suggest-queries is byte-identical for a fixed seed") {
  const std::string args = "suggest-queries --frames " + q(fixture_frames()) +
                           " --sample 3 --top 100 --seed 11";
  const auto first = run_cli(args);
  const auto second = run_cli(args);
  CHECK(first.exit_code == 0);
  CHECK(first.out == second.out);
}

TEST_CASE("suggest-queries rejects an empty frames file") {
  const fs::path empty = scratch_dir() / "empty.jsonl";
  spit(empty, "");
  const auto result = run_cli("suggest-queries --frames " + q(empty));
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("empty") != std::string::npos);
}

TEST_CASE("unknown subcommands and missing flags fail with exit 1") {
  CHECK(run_cli("warp --speed 9").exit_code == 1);
  CHECK(run_cli("track").exit_code == 1);
}

}  // TEST_SUITE
