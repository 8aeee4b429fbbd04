// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and must not be loosened.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "oracles.hpp"
#include "touchreg/commands.hpp"
#include "touchreg/dataset_io.hpp"
#include "touchreg/error.hpp"
#include "touchreg/image_metrics.hpp"
#include "touchreg/resection.hpp"
#include "touchreg/retrieval.hpp"
#include "touchreg/rig.hpp"
#include "touchreg/synth.hpp"

using namespace touchreg;
namespace fs = std::filesystem;

namespace {

constexpr double kNoiselessRotDeg = 0.1;
constexpr double kNoiselessTransM = 1e-4;
constexpr double kNoiselessL1Px = 1e-6;
constexpr double kNoiselessSeconds = 1.0;

constexpr double kRobustSigmaPx = 1.0;
constexpr std::size_t kRobustPoints = 15;
constexpr int kRobustTrials = 100;
constexpr double kRobustRotP95Deg = 1.0;
constexpr double kRobustTransP95Fraction = 0.01;

constexpr int kJacobianConfigs = 100;
constexpr double kJacobianRelErr = 1e-4;

constexpr int kMonotoneSolves = 1000;

constexpr int kGeometryCases = 1000;
constexpr double kGeometryTol = 1e-9;

constexpr int kApCases = 500;
constexpr int kApMaxItems = 200;
constexpr double kApTol = 1e-12;
constexpr int kChancePermutations = 10000;
constexpr double kChanceTolPoints = 2.0;

constexpr std::size_t kSplitMaxN = 10000;

constexpr double kPsnrTol = 1e-9;
constexpr double kSsimSelfTol = 1e-9;
constexpr double kSymmetryTol = 1e-12;

constexpr double kEndToEndSeconds = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& fn) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %-28s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

double percentile95(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  // Nearest-rank definition.
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

struct Fixture {
  synth::SyntheticScene scene;
  CaptureSession session;
  std::vector<FrameAnnotation> annotations;
  std::map<std::string, DepthMap> depth;
};

Fixture fixture(const synth::SynthConfig& cfg) {
  synth::SyntheticScene scene = synth::generate(cfg);
  CaptureSession session = synchronize(scene.raw_streams());
  auto annotations = synth::annotate(scene);
  Fixture f{std::move(scene), std::move(session), std::move(annotations), {}};
  for (std::size_t k : f.scene.calibration_frames) f.depth.emplace(f.scene.trajectory[k].id, synth::render_depth(f.scene, k));
  return f;
}

double rot_deg(const Pose& a, const Pose& b) { return rotation_angle_between(a, b) * 180.0 / M_PI; }

// ---------------------------------------------------------------------------

Outcome calibration_noiseless() {
  double worst_rot = 0, worst_trans = 0, worst_l1 = 0, worst_time = 0;
  for (std::uint64_t seed = 7; seed < 17; ++seed) {
    synth::SynthConfig cfg;
    cfg.seed = seed;
    cfg.point_count = 12;
    cfg.calibration_frames = 2;
    const Fixture f = fixture(cfg);
    const auto t0 = Clock::now();
    const RigCalibration rig = calibrate(f.session, f.annotations, f.depth, SolverConfig{});
    worst_time = std::max(worst_time, seconds_since(t0));
    worst_rot = std::max(worst_rot, rot_deg(rig.cam_to_touch, f.scene.true_rig));
    worst_trans = std::max(worst_trans, (rig.cam_to_touch.translation() - f.scene.true_rig.translation()).norm());
    worst_l1 = std::max(worst_l1, rig.mean_l1_error);
  }
  const bool pass = worst_rot < kNoiselessRotDeg && worst_trans < kNoiselessTransM && worst_l1 < kNoiselessL1Px &&
                    worst_time < kNoiselessSeconds;
  return {pass, "10 scenes, worst: rot " + fmt("%.2e", worst_rot) + " deg, trans " + fmt("%.2e", worst_trans) +
                    " m, L1 " + fmt("%.2e", worst_l1) + " px, solve " + fmt("%.3f", worst_time) + " s"};
}

Outcome calibration_robustness() {
  std::vector<double> rot, trans_frac;
  for (int trial = 0; trial < kRobustTrials; ++trial) {
    synth::SynthConfig cfg;
    cfg.seed = 1000 + static_cast<std::uint64_t>(trial);
    cfg.noise_px = kRobustSigmaPx;
    cfg.point_count = kRobustPoints;
    const Fixture f = fixture(cfg);
    const RigCalibration rig = calibrate(f.session, f.annotations, f.depth, SolverConfig{});
    // Mean depth of the annotated points seen from the touch sensor.
    double depth = 0.0;
    for (const auto& o : f.scene.observations)
      depth += inverse(f.scene.true_touch_pose(o.frame_index)).transform(f.scene.points[o.point_index]).z();
    depth /= static_cast<double>(f.scene.observations.size());
    rot.push_back(rot_deg(rig.cam_to_touch, f.scene.true_rig));
    trans_frac.push_back((rig.cam_to_touch.translation() - f.scene.true_rig.translation()).norm() / depth);
  }
  const double p_rot = percentile95(rot), p_trans = percentile95(trans_frac);
  return {p_rot < kRobustRotP95Deg && p_trans < kRobustTransP95Fraction,
          "p95 rot " + fmt("%.3f", p_rot) + " deg (<1), p95 trans " + fmt("%.3f", 100 * p_trans) +
              "% of mean depth (<1%)"};
}

Outcome jacobian_correctness() {
  SplitMix64 rng(2024);
  const Intrinsics intr(600, 600, 320, 240, 640, 480);
  double worst = 0.0;
  for (int c = 0; c < kJacobianConfigs; ++c) {
    const Pose pose = oracle::random_pose(rng, 1.0);
    const Pose cam_to_world = inverse(pose);
    std::vector<Correspondence> corrs;
    for (int k = 0; k < 10; ++k) {
      const Vec2 px(rng.uniform(0, 639), rng.uniform(0, 479));
      const Vec3 x = lift_pixel(intr, cam_to_world, px, rng.uniform(0.3, 3.0));
      corrs.push_back({x, px + Vec2(rng.normal(), rng.normal())});
    }
    const Eigen::MatrixXd j = residual_jacobian(pose, intr, corrs);
    const Quaternion& q = pose.rotation();
    const Eigen::Matrix<double, 7, 1> x0 =
        (Eigen::Matrix<double, 7, 1>() << q.w(), q.x(), q.y(), q.z(), pose.translation()).finished();
    auto residuals_at = [&](const Eigen::Matrix<double, 7, 1>& x) {
      return reprojection_residuals(Pose(Quaternion(x[0], x[1], x[2], x[3]), x.tail<3>()), intr, corrs);
    };
    const double h = 1e-6;
    for (int p = 0; p < 7; ++p) {
      Eigen::Matrix<double, 7, 1> xp = x0, xm = x0;
      xp[p] += h;
      xm[p] -= h;
      const Eigen::VectorXd fd = (residuals_at(xp) - residuals_at(xm)) / (2 * h);
      for (Eigen::Index r = 0; r < fd.size(); ++r) {
        // Relative error with a floor of 1 px per unit so near-zero entries
        // are compared absolutely.
        const double rel = std::abs(j(r, p) - fd[r]) / std::max(std::abs(fd[r]), 1.0);
        worst = std::max(worst, rel);
      }
    }
  }
  return {worst < kJacobianRelErr, std::to_string(kJacobianConfigs) + " configs, max rel err " + fmt("%.2e", worst)};
}

Outcome lm_monotonicity() {
  SplitMix64 rng(77);
  const Intrinsics intr(600, 600, 320, 240, 640, 480);
  int monotone = 0;
  std::size_t sequences = 0;
  for (int s = 0; s < kMonotoneSolves; ++s) {
    const Pose pose = oracle::random_pose(rng, 1.0);
    const int n = 4 + static_cast<int>(rng.next() % 12);
    const double noise = (s % 4) * 0.75;
    std::vector<Correspondence> corrs;
    for (int k = 0; k < n; ++k) {
      const Vec2 px(rng.uniform(0, 639), rng.uniform(0, 479));
      const Vec3 x = lift_pixel(intr, inverse(pose), px, rng.uniform(0.3, 3.0));
      corrs.push_back({x, px + noise * Vec2(rng.normal(), rng.normal())});
    }
    SolverConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(s);
    bool ok = true;
    const ResectionResult r = solve(intr, corrs, cfg);
    auto non_increasing = [](const std::vector<double>& h) {
      for (std::size_t k = 1; k < h.size(); ++k)
        if (h[k] > h[k - 1]) return false;
      return true;
    };
    ok = ok && non_increasing(r.objective_history);
    ++sequences;
    // Every start, not just the winner.
    for (const Pose& start : initial_poses(corrs, cfg)) {
      ok = ok && non_increasing(refine(intr, corrs, start, cfg).objective_history);
      ++sequences;
    }
    monotone += ok ? 1 : 0;
  }
  return {monotone == kMonotoneSolves, std::to_string(monotone) + "/" + std::to_string(kMonotoneSolves) +
                                           " solves non-increasing (" + std::to_string(sequences) + " sequences)"};
}

Outcome geometry_roundtrips() {
  SplitMix64 rng(31);
  const Intrinsics intr(520, 515, 321.5, 239.25, 640, 480);
  double worst_px = 0.0, worst_pose = 0.0;
  for (int i = 0; i < kGeometryCases; ++i) {
    const Pose cam_to_world = oracle::random_pose(rng);
    const Vec2 px(rng.uniform(-0.5, 639.49), rng.uniform(-0.5, 479.49));
    const Vec3 x = lift_pixel(intr, cam_to_world, px, rng.uniform(0.05, 50.0));
    const auto back = project(intr, inverse(cam_to_world), x);
    worst_px = std::max(worst_px, back ? (*back - px).norm() : 1e300);

    const Pose a = oracle::random_pose(rng), b = oracle::random_pose(rng);
    auto gap = [](const Pose& p, const Pose& q) {
      return std::max((p.rotation_matrix() - q.rotation_matrix()).cwiseAbs().maxCoeff(),
                      (p.translation() - q.translation()).cwiseAbs().maxCoeff());
    };
    worst_pose = std::max({worst_pose, gap(compose(a, inverse(a)), Pose::identity()),
                           gap(compose(inverse(a), a), Pose::identity()),
                           gap(compose(compose(a, b), inverse(b)), a)});
  }
  return {worst_px <= kGeometryTol && worst_pose <= kGeometryTol,
          std::to_string(kGeometryCases) + " cases, project(lift) " + fmt("%.1e", worst_px) +
              " px, compose/inverse " + fmt("%.1e", worst_pose)};
}

// Expected AP of a uniformly random ranking with m relevant among n, sampled.
double sampled_chance_ap(std::size_t n, std::size_t m, SplitMix64& rng) {
  std::vector<std::size_t> slots(n);
  double total = 0.0;
  for (int p = 0; p < kChancePermutations; ++p) {
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next() % (n - i));
      std::swap(slots[i], slots[j]);
    }
    std::vector<std::size_t> pos(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(pos.begin(), pos.end());
    double ap = 0.0;
    for (std::size_t i = 0; i < m; ++i) ap += static_cast<double>(i + 1) / static_cast<double>(pos[i] + 1);
    total += ap / static_cast<double>(m);
  }
  return total / kChancePermutations;
}

Outcome map_oracles() {
  SplitMix64 rng(404);
  // (a) AP on random rankings and through the scoring pipeline.
  double worst_ap = 0.0;
  for (int c = 0; c < kApCases; ++c) {
    const int n = 1 + static_cast<int>(rng.next() % kApMaxItems);
    std::vector<Vec3> gpos;
    std::vector<GalleryItem> items;
    for (int i = 0; i < n; ++i) {
      gpos.emplace_back(rng.uniform(0, 0.2), rng.uniform(0, 0.2), rng.uniform(0, 0.2));
      items.push_back({"item" + std::to_string(i), EmbeddingVector({1.0}), gpos.back()});
    }
    const Vec3 qpos(rng.uniform(0, 0.2), rng.uniform(0, 0.2), rng.uniform(0, 0.2));
    Eigen::MatrixXd scores(1, n);
    for (int i = 0; i < n; ++i) scores(0, i) = std::floor(rng.uniform(0, 20));  // plenty of ties
    const double radius = rng.uniform(0.0, 0.2);
    const MapReport rep = map_from_scores(scores, std::vector<Vec3>{qpos}, RetrievalGallery(items), std::vector<double>{radius});

    // Oracle ranking: descending score, ascending id.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (scores(0, a) != scores(0, b)) return scores(0, a) > scores(0, b);
      return items[a].id < items[b].id;
    });
    std::vector<std::string> ranked;
    std::set<std::string> relevant;
    for (int i : order) ranked.push_back(items[i].id);
    for (int i = 0; i < n; ++i)
      if ((gpos[i] - qpos).norm() <= radius) relevant.insert(items[i].id);
    const double ref = oracle::brute_force_ap(ranked, relevant);
    worst_ap = std::max(worst_ap, std::abs(average_precision(ranked, relevant) - ref));
    const auto& ap = rep.per_query_ap.at(0).at(0);
    if (relevant.empty()) {
      if (ap.has_value() || rep.excluded_queries.at(0) != 1) worst_ap = 1e300;
    } else {
      worst_ap = std::max(worst_ap, ap ? std::abs(*ap - ref) : 1e300);
    }
  }

  // (b) Positional embeddings on a synthetic trajectory.
  const synth::SyntheticScene scene = synth::generate({});
  std::vector<Vec3> pos;
  for (std::size_t i = 0; i < scene.touch_frames.size(); ++i) pos.push_back(scene.true_touch_pose(i).translation());
  const auto emb = synth::positional_embeddings(pos, pos);
  std::vector<GalleryItem> items;
  std::vector<LocalizationQuery> queries;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    items.push_back({scene.touch_frames[i].id, emb.gallery[i], pos[i]});
    queries.push_back({emb.queries[i], pos[i]});
  }
  const RetrievalGallery gallery(items);
  const std::vector<double> radii(kStandardRadii.begin(), kStandardRadii.end());
  const MapReport perfect = map_at_radii(queries, gallery, radii);
  bool all_100 = true;
  for (double v : perfect.map_values) all_100 = all_100 && v == 100.0;

  // (c) Random embeddings vs the permutation oracle.
  const int n = 400;
  std::vector<Vec3> rpos;
  for (int i = 0; i < n; ++i) rpos.emplace_back(rng.uniform(0, 0.4), rng.uniform(0, 0.4), rng.uniform(0, 0.4));
  auto random_unit = [&]() {
    std::vector<double> v(32);
    for (auto& x : v) x = rng.normal();
    return EmbeddingVector::normalized(v);
  };
  std::vector<GalleryItem> ritems;
  std::vector<LocalizationQuery> rq;
  for (int i = 0; i < n; ++i) {
    ritems.push_back({"r" + std::to_string(1000 + i), random_unit(), rpos[i]});
    rq.push_back({random_unit(), rpos[i]});
  }
  const MapReport chance = map_at_radii(rq, RetrievalGallery(ritems), radii);
  double worst_gap = 0.0;
  std::string chance_str;
  std::map<std::size_t, double> cache;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    double expected = 0.0;
    std::size_t included = 0;
    for (int q = 0; q < n; ++q) {
      std::size_t m = 0;
      for (int i = 0; i < n; ++i) m += (rpos[i] - rpos[q]).norm() <= radii[j];
      if (m == 0) continue;
      if (!cache.count(m)) cache[m] = sampled_chance_ap(n, m, rng);
      expected += cache[m];
      ++included;
    }
    expected = 100.0 * expected / static_cast<double>(included);
    worst_gap = std::max(worst_gap, std::abs(chance.map_values[j] - expected));
    chance_str += (j ? "/" : "") + fmt("%.2f", chance.map_values[j]) + "~" + fmt("%.2f", expected);
  }

  return {worst_ap <= kApTol && all_100 && worst_gap <= kChanceTolPoints,
          "AP max err " + fmt("%.1e", worst_ap) + " over " + std::to_string(kApCases) + " cases; positional mAP " +
              (all_100 ? "100 at all radii" : "NOT 100") + "; chance " + chance_str + " (gap " +
              fmt("%.2f", worst_gap) + " pts)"};
}

Outcome split_exactness() {
  const auto s500 = make_splits(500);
  bool ok = s500.size() == 10;
  for (std::size_t i = 0; i < s500.size() && ok; ++i) {
    const SplitRole want = i < 8 ? SplitRole::Train : (i == 8 ? SplitRole::Validation : SplitRole::Test);
    ok = s500[i].role == want && s500[i].frame_count == 50 && s500[i].first_frame == 50 * i;
  }
  std::size_t bad = 0;
  for (std::size_t n = 1; n <= kSplitMaxN; ++n) {
    oracle::SplitCounts got;
    std::size_t covered = 0;
    for (const auto& s : make_splits(n)) {
      if (s.first_frame != covered) ++bad;
      covered += s.frame_count;
      if (s.role == SplitRole::Train) ++got.train;
      if (s.role == SplitRole::Validation) ++got.val;
      if (s.role == SplitRole::Test) ++got.test;
    }
    const auto want = oracle::split_counts(n);
    if (covered != n || got.train != want.train || got.val != want.val || got.test != want.test) ++bad;
  }
  return {ok && bad == 0, std::string("500 frames -> ") + (ok ? "8/1/1" : "WRONG") + "; N=1.." +
                              std::to_string(kSplitMaxN) + " mismatches " + std::to_string(bad)};
}

Outcome metrics() {
  ImageBuffer a(32, 32, 3), b(32, 32, 3);
  SplitMix64 rng(5);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = rng.uniform(0.0, 0.9);
        a.set(x, y, c, v);
        b.set(x, y, c, v + 0.1);
      }
  const double p = psnr(a, b).value();
  double worst_self = 0.0, worst_sym = 0.0;
  for (int t = 0; t < 50; ++t) {
    ImageBuffer x(24, 20, 3), y(24, 20, 3);
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 24; ++c)
        for (int k = 0; k < 3; ++k) {
          x.set(c, r, k, rng.uniform());
          y.set(c, r, k, rng.uniform());
        }
    worst_self = std::max(worst_self, std::abs(ssim(x, x) - 1.0));
    worst_sym = std::max({worst_sym, std::abs(ssim(x, y) - ssim(y, x)), std::abs(*psnr(x, y) - *psnr(y, x))});
  }
  return {std::abs(p - 20.0) <= kPsnrTol && worst_self <= kSsimSelfTol && worst_sym <= kSymmetryTol,
          "psnr " + fmt("%.12f", p) + " dB, |ssim(x,x)-1| " + fmt("%.1e", worst_self) + ", asymmetry " +
              fmt("%.1e", worst_sym)};
}

int run_cli(const std::vector<std::string>& args, std::string& err_text) {
#ifdef TOUCHREG_CLI_PATH
  std::string cmd = TOUCHREG_CLI_PATH;
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  err_text = cmd;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
  std::vector<std::string> full = {"touchreg"};
  full.insert(full.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int rc = cli::run(full, out, err);
  err_text = err.str();
  return rc;
#endif
}

Outcome end_to_end_cli() {
  const fs::path d = fs::temp_directory_path() / "touchreg_acceptance_e2e";
  fs::remove_all(d);
  const auto t0 = Clock::now();
  std::string err;
  auto step = [&](const std::vector<std::string>& args) {
    const int rc = run_cli(args, err);
    if (rc != 0) throw std::runtime_error(args[0] + " exited " + std::to_string(rc) + ": " + err);
  };
  const std::string s = d.string();
  step({"synth", "--out", s});
  step({"calibrate", "--poses", s + "/poses.txt", "--annotations", s + "/annotations.jsonl", "--depth-dir",
        s + "/depth", "--intrinsics", s + "/intrinsics.txt", "--frames", s + "/frames.txt", "--out",
        s + "/rig.json", "--report", s + "/report.txt"});
  step({"propagate", "--poses", s + "/poses.txt", "--frames", s + "/frames.txt", "--intrinsics",
        s + "/intrinsics.txt", "--rig", s + "/rig.json", "--out", s + "/touch_poses.txt"});
  step({"eval-map", "--queries", s + "/embeddings/tactile.emb", "--gallery", s + "/embeddings/visual.emb",
        "--positions", s + "/touch_poses.txt", "--dataset", "synthetic", "--out", s + "/map.txt"});
  const double elapsed = seconds_since(t0);

  const RigCalibration rig = load_rig(d / "rig.json");
  const auto truth = nlohmann::json::parse(read_text_file(d / "ground_truth" / "rig.json"));
  const Pose true_rig = pose_from_json(truth.at("cam_to_touch"));
  const double rot = rot_deg(rig.cam_to_touch, true_rig);
  const double trans = (rig.cam_to_touch.translation() - true_rig.translation()).norm();

  const auto est = load_poses(d / "touch_poses.txt");
  const auto gt = load_poses(d / "ground_truth" / "touch_poses.txt");
  double worst_pose = est.size() == gt.size() ? 0.0 : 1e300;
  for (std::size_t i = 0; i < std::min(est.size(), gt.size()); ++i)
    worst_pose = std::max(worst_pose, (est[i].pose().translation() - gt[i].pose().translation()).norm());

  const std::string table = read_text_file(d / "map.txt");
  const bool map100 = table.find("synthetic\t100.00\t100.00\t100.00\t100.00\t100.00") != std::string::npos;
  fs::remove_all(d);

  const bool pass = elapsed < kEndToEndSeconds && rig.mean_l1_error < kNoiselessL1Px && rot < kNoiselessRotDeg &&
                    trans < kNoiselessTransM && worst_pose < kNoiselessTransM && map100;
  return {pass, "synth->calibrate->propagate->eval-map in " + fmt("%.2f", elapsed) + " s; L1 " +
                    fmt("%.1e", rig.mean_l1_error) + " px; touch poses within " + fmt("%.1e", worst_pose) +
                    " m; mAP " + (map100 ? "100 at all radii" : "NOT 100")};
}

}  // namespace

int main() {
  report("calibration-noiseless", calibration_noiseless);
  report("calibration-robustness", calibration_robustness);
  report("jacobian-finite-difference", jacobian_correctness);
  report("lm-monotonicity", lm_monotonicity);
  report("geometry-roundtrips", geometry_roundtrips);
  report("ap-map-oracles", map_oracles);
  report("split-exactness", split_exactness);
  report("image-metrics", metrics);
  report("end-to-end-cli", end_to_end_cli);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
