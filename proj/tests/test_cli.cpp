#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "touchreg/commands.hpp"
#include "touchreg/dataset_io.hpp"
#include "touchreg/synth.hpp"

using namespace touchreg;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "touchreg");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("touchreg_cli_" + name);
  fs::remove_all(p);
  return p;
}

// All regular files under a directory with their contents.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_text_file(e.path());
  return out;
}

std::vector<std::string> calibrate_args(const fs::path& d) {
  return {"calibrate", "--poses", (d / "poses.txt").string(), "--annotations", (d / "annotations.jsonl").string(),
          "--depth-dir", (d / "depth").string(), "--intrinsics", (d / "intrinsics.txt").string(),
          "--frames", (d / "frames.txt").string(), "--out", (d / "rig.json").string()};
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"nonsense"}).code == cli::kExitUsage);
  CHECK(invoke({"calibrate"}).code == cli::kExitUsage);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
}

TEST_CASE("exit codes are distinct per error family") {
  std::set<int> codes;
  for (ErrorKind k : {ErrorKind::InvalidArgument, ErrorKind::Precondition, ErrorKind::Parse, ErrorKind::Io,
                      ErrorKind::NotFound, ErrorKind::Degenerate})
    codes.insert(cli::exit_code_for(k));
  CHECK(codes.size() == 6);
  CHECK(codes.count(cli::kExitOk) == 0);
  CHECK(codes.count(cli::kExitUsage) == 0);
}

TEST_CASE("synth is byte-identical for the same seed") {
  const fs::path a = fresh("synth_a"), b = fresh("synth_b");
  REQUIRE(invoke({"--seed", "7", "synth", "--out", a.string()}).code == 0);
  REQUIRE(invoke({"--seed", "7", "synth", "--out", b.string()}).code == 0);
  CHECK(tree(a) == tree(b));
  CHECK(tree(a).count("ground_truth/rig.json") == 1);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("calibrate: synthetic fixture") {
  const fs::path d = fresh("calibrate");
  REQUIRE(invoke({"synth", "--out", d.string()}).code == 0);
  const Run r = invoke(calibrate_args(d));
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("mean_l1_error_px") != std::string::npos);
  const RigCalibration rig = load_rig(d / "rig.json");
  CHECK(rig.mean_l1_error < 1e-6);
  CHECK(rig.correspondence_count == 12);

  SUBCASE("report is a pure function of library results") {
    const auto annotations = load_annotations(d / "annotations.jsonl");
    CHECK(r.out == cli::format_calibration_report(rig, annotations));
  }
  SUBCASE("report file option") {
    auto args = calibrate_args(d);
    args.push_back("--report");
    args.push_back((d / "report.txt").string());
    const Run r2 = invoke(args);
    CHECK(r2.code == 0);
    CHECK(read_text_file(d / "report.txt") == r.out);
  }
  fs::remove_all(d);
}

TEST_CASE("calibrate: error exits") {
  const fs::path d = fresh("calibrate_errors");
  REQUIRE(invoke({"synth", "--out", d.string()}).code == 0);

  SUBCASE("five pairs -> precondition") {
    auto anns = load_annotations(d / "annotations.jsonl");
    std::size_t keep = 5;
    for (auto& a : anns) {
      const std::size_t n = std::min(keep, a.pairs.size());
      a.pairs.resize(n);
      keep -= n;
    }
    std::ostringstream s;
    write_annotations(s, anns);
    write_text_file(d / "annotations.jsonl", s.str());
    const Run r = invoke(calibrate_args(d));
    CHECK(r.code == cli::kExitPrecondition);
    const auto j = nlohmann::json::parse(r.err.substr(0, r.err.find('\n')));
    CHECK(j.at("code") == "precondition");
  }
  SUBCASE("missing depth file -> io, naming the path") {
    const fs::path depth = d / "depth" / "f0000.depth";
    fs::remove(depth);
    const Run r = invoke(calibrate_args(d));
    CHECK(r.code == cli::kExitIo);
    CHECK(r.err.find(depth.string()) != std::string::npos);
  }
  SUBCASE("malformed pose file -> parse") {
    write_text_file(d / "poses.txt", "f0000 2 0 0 0 0 0 0 cam\n");
    CHECK(invoke(calibrate_args(d)).code == cli::kExitParse);
  }
  SUBCASE("bad config -> parse") {
    write_text_file(d / "bad.cfg", "nope = 1\n");
    auto args = calibrate_args(d);
    args.insert(args.begin(), {"--config", (d / "bad.cfg").string()});
    CHECK(invoke(args).code == cli::kExitParse);
  }
  fs::remove_all(d);
}

TEST_CASE("pipeline: propagate, split, eval-map, heatmap, metrics") {
  const fs::path d = fresh("pipeline");
  REQUIRE(invoke({"synth", "--out", d.string(), "--frames", "500"}).code == 0);
  REQUIRE(invoke(calibrate_args(d)).code == 0);

  const Run p = invoke({"propagate", "--poses", (d / "poses.txt").string(), "--frames", (d / "frames.txt").string(),
                     "--intrinsics", (d / "intrinsics.txt").string(), "--rig", (d / "rig.json").string(), "--out",
                     (d / "touch_poses.txt").string(), "--conditioning-out", (d / "cond.txt").string()});
  REQUIRE(p.code == 0);
  const auto est = load_poses(d / "touch_poses.txt");
  const auto gt = load_poses(d / "ground_truth" / "touch_poses.txt");
  REQUIRE(est.size() == gt.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    CHECK(est[i].frame_id == gt[i].frame_id);
    CHECK((est[i].pose().translation() - gt[i].pose().translation()).norm() < 1e-4);
  }
  const auto cond = load_poses(d / "cond.txt");
  REQUIRE(cond.size() == est.size());
  CHECK((cond[0].pose().translation() - est[0].pose().translation()).norm() == doctest::Approx(0.4));

  const Run s = invoke({"split", "--frames", (d / "frames.txt").string(), "--out", (d / "splits.txt").string()});
  CHECK(s.code == 0);
  CHECK(s.out == "sequences 10 train 8 val 1 test 1\n");
  const std::string splits = read_text_file(d / "splits.txt");
  CHECK(std::count(splits.begin(), splits.end(), '\n') >= 500);
  CHECK(splits.find("t0400 8 val") != std::string::npos);
  CHECK(splits.find("t0499 9 test") != std::string::npos);

  const Run m = invoke({"eval-map", "--queries", (d / "embeddings" / "tactile.emb").string(), "--gallery",
                     (d / "embeddings" / "visual.emb").string(), "--positions", (d / "touch_poses.txt").string(),
                     "--dataset", "synthetic", "--out", (d / "map.txt").string()});
  CHECK(m.code == 0);
  CHECK(read_text_file(d / "map.txt").find("synthetic\t100.00\t100.00\t100.00\t100.00\t100.00") != std::string::npos);

  const Run h = invoke({"heatmap", "--image", (d / "images" / "visual" / "f0000.raster").string(), "--tactile",
                     (d / "images" / "tactile" / "t0000.raster").string(), "--patch", "64", "--stride", "64", "--out",
                     (d / "heat.csv").string()});
  CHECK(h.code == 0);
  CHECK(h.out == "heatmap 7x10\n");

  const Run mt = invoke({"metrics", "--a", (d / "images" / "visual" / "f0000.raster").string(), "--b",
                      (d / "images" / "visual" / "f0000.raster").string()});
  CHECK(mt.code == 0);
  const auto j = nlohmann::json::parse(mt.out);
  CHECK(j.at("psnr_db").is_null());
  CHECK(j.at("ssim").get<double>() == doctest::Approx(1.0));

  const Run missing = invoke({"eval-map", "--queries", (d / "embeddings" / "tactile.emb").string(), "--gallery",
                           (d / "embeddings" / "visual.emb").string(), "--positions", (d / "cond_missing.txt").string()});
  CHECK(missing.code == cli::kExitIo);
  fs::remove_all(d);
}
