#include "touchreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "touchreg/dataset_io.hpp"
#include "touchreg/error.hpp"
#include "touchreg/rng.hpp"

namespace touchreg::synth {

namespace {

constexpr int kPlacementAttempts = 1000;
constexpr double kPixelMargin = 20.0;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

std::string frame_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "f%04zu", i);
  return buf;
}

std::string touch_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%04zu", i);
  return buf;
}

Quaternion small_rotation(SplitMix64& rng, double max_deg) {
  const double angle = deg2rad(rng.uniform(0.0, max_deg));
  return Quaternion(Eigen::AngleAxisd(angle, random_unit_vector(rng)));
}

Vec3 ray(const Intrinsics& k, const Vec2& px) {
  return {(px.x() - k.cx()) / k.fx(), (px.y() - k.cy()) / k.fy(), 1.0};
}

Vec2 random_pixel(SplitMix64& rng, const Intrinsics& k) {
  const double u = rng.uniform(kPixelMargin, k.width() - 1 - kPixelMargin);
  const double v = rng.uniform(kPixelMargin, k.height() - 1 - kPixelMargin);
  return {u, v};
}

void validate(const SynthConfig& cfg) {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "synth config: " + what); };
  if (cfg.trajectory_length == 0) bad("trajectory_length must be positive");
  if (cfg.calibration_frames == 0 || cfg.calibration_frames > cfg.trajectory_length)
    bad("calibration_frames must lie in [1, trajectory_length]");
  if (cfg.point_count < cfg.calibration_frames) bad("point_count must cover every calibration frame");
  if (!(cfg.noise_px >= 0.0)) bad("noise_px must be non-negative");
  if (!(cfg.scene_extent > 0.0)) bad("scene_extent must be positive");
  if (!(cfg.min_depth > 0.0 && cfg.max_depth > cfg.min_depth)) bad("depth range must be positive and ordered");
  if (!(cfg.frame_rate > 0.0)) bad("frame_rate must be positive");
  if (!(cfg.touch_jitter >= 0.0 && cfg.touch_jitter < 0.5 / cfg.frame_rate))
    bad("touch_jitter must be below half a frame interval");
}

void splat(ImageBuffer& img, const Vec2& px, double value) {
  const long cx = std::lround(px.x());
  const long cy = std::lround(px.y());
  for (long y = cy - 2; y <= cy + 2; ++y)
    for (long x = cx - 2; x <= cx + 2; ++x)
      if (x >= 0 && y >= 0 && x < img.width() && y < img.height() &&
          (x - cx) * (x - cx) + (y - cy) * (y - cy) <= 4)
        img.set(static_cast<int>(x), static_cast<int>(y), 0, value);
}

}  // namespace

RawStreams SyntheticScene::raw_streams() const {
  return {trajectory, touch_frames, intrinsics_cam, intrinsics_touch};
}

SyntheticScene generate(const SynthConfig& cfg) {
  validate(cfg);
  SplitMix64 root(cfg.seed);
  SplitMix64 rig_rng = root.split();
  SplitMix64 traj_rng = root.split();
  SplitMix64 point_rng = root.split();
  SplitMix64 noise_rng = root.split();

  SyntheticScene scene;
  scene.rng_seed = cfg.seed;
  scene.noise_px = cfg.noise_px;
  scene.intrinsics_cam = cfg.intrinsics_cam;
  scene.intrinsics_touch = cfg.intrinsics_touch;

  // The sensor looks roughly where the camera's calibration view looks.
  const Quaternion view_turn(Eigen::AngleAxisd(deg2rad(kCalibrationViewAngleDegrees), Vec3::UnitX()));
  const Quaternion rig_rot = view_turn * small_rotation(rig_rng, cfg.max_rig_rotation_deg);
  const Vec3 rig_t(rig_rng.uniform(-cfg.max_rig_offset, cfg.max_rig_offset),
                   rig_rng.uniform(-cfg.max_rig_offset, cfg.max_rig_offset),
                   rig_rng.uniform(-cfg.max_rig_offset, cfg.max_rig_offset));
  scene.true_rig = Pose(rig_rot, rig_t);

  // Random walk inside the scene cube.
  const double half = 0.5 * cfg.scene_extent;
  Vec3 pos(traj_rng.uniform(-0.5 * half, 0.5 * half), traj_rng.uniform(-0.5 * half, 0.5 * half),
           traj_rng.uniform(-0.5 * half, 0.5 * half));
  Quaternion rot = random_rotation(traj_rng);
  for (std::size_t i = 0; i < cfg.trajectory_length; ++i) {
    if (i > 0) {
      pos += random_unit_vector(traj_rng) * traj_rng.uniform(0.005, 0.02);
      for (int a = 0; a < 3; ++a) pos[a] = std::clamp(pos[a], -half, half);
      rot = (rot * small_rotation(traj_rng, 2.0)).normalized();
    }
    const double t = static_cast<double>(i) / cfg.frame_rate;
    scene.trajectory.push_back({frame_id(i), t, Pose(rot, pos)});
    scene.touch_frames.push_back(
        {touch_id(i), t + traj_rng.uniform(-cfg.touch_jitter, cfg.touch_jitter), ""});
  }

  const std::size_t k = cfg.calibration_frames;
  for (std::size_t c = 0; c < k; ++c) scene.calibration_frames.push_back(c * cfg.trajectory_length / k);

  const Intrinsics& kt = cfg.intrinsics_touch;
  const Intrinsics& kc = cfg.intrinsics_cam;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t f = scene.calibration_frames[c];
    const std::size_t count = cfg.point_count / k + (c < cfg.point_count % k ? 1 : 0);
    const Pose touch_pose = scene.true_touch_pose(f);
    const Pose world_to_touch = inverse(touch_pose);
    const Pose world_to_view = inverse(make_calibration_view_pose(scene.trajectory[f].pose));

    // Plane through a point in front of the sensor, tilted up to 50 degrees.
    const double plane_depth = point_rng.uniform(cfg.min_depth, cfg.max_depth);
    const Vec3 plane_point = ray(kt, random_pixel(point_rng, kt)) * plane_depth;
    Vec3 axis = random_unit_vector(point_rng);
    axis.z() = 0.0;
    if (axis.norm() < 1e-6) axis = Vec3::UnitX();
    const Vec3 normal = Eigen::AngleAxisd(deg2rad(point_rng.uniform(0.0, 50.0)), axis.normalized()) * Vec3::UnitZ();

    int attempts = 0;
    std::size_t placed = 0;
    while (placed < count) {
      if (++attempts > kPlacementAttempts)
        throw Error(ErrorKind::Precondition, "synth: cannot place points in view of calibration frame " +
                                                 frame_id(f) + " after 1000 attempts");
      const Vec3 r = ray(kt, random_pixel(point_rng, kt));
      double depth;
      if (cfg.general_position) {
        depth = point_rng.uniform(cfg.min_depth, cfg.max_depth);
      } else {
        const double denom = normal.dot(r);
        if (std::abs(denom) < 1e-9) continue;
        depth = normal.dot(plane_point) / denom;
      }
      if (!(depth >= cfg.min_depth && depth <= cfg.max_depth)) continue;
      const Vec3 world = touch_pose.transform(r * depth);

      const auto view_px = project(kc, world_to_view, world);
      if (!view_px || !kc.contains(*view_px)) continue;
      const double view_depth = world_to_view.transform(world).z();
      if (!(view_depth > 0.05)) continue;
      const auto exact = project(kt, world_to_touch, world);
      if (!exact || !kt.contains(*exact)) continue;

      Vec2 noisy;
      do {
        const double nu = noise_rng.normal();
        const double nv = noise_rng.normal();
        noisy = *exact + cfg.noise_px * Vec2(nu, nv);
      } while (!kt.contains(noisy));

      scene.observations.push_back({f, scene.points.size(), noisy, *exact, *view_px, view_depth});
      scene.points.push_back(world);
      ++placed;
    }
  }
  return scene;
}

DepthMap render_depth(const SyntheticScene& scene, std::size_t frame_index) {
  if (frame_index >= scene.trajectory.size())
    throw Error(ErrorKind::InvalidArgument, "synth: frame index outside the trajectory");
  const Intrinsics& kc = scene.intrinsics_cam;
  const Pose world_to_view = inverse(make_calibration_view_pose(scene.trajectory[frame_index].pose));
  DepthMap depth(kc.width(), kc.height());
  for (const Vec3& p : scene.points) {
    const auto px = project(kc, world_to_view, p);
    if (!px || !kc.contains(*px)) continue;
    const double z = world_to_view.transform(p).z();
    const int x = static_cast<int>(std::lround(px->x()));
    const int y = static_cast<int>(std::lround(px->y()));
    const double cur = depth.at(x, y);
    if (cur == 0.0 || z < cur) depth.set(x, y, z);
  }
  return depth;
}

std::vector<FrameAnnotation> annotate(const SyntheticScene& scene) {
  std::vector<FrameAnnotation> out;
  for (std::size_t f : scene.calibration_frames) {
    FrameAnnotation ann{scene.trajectory[f].id, scene.touch_frames[f].id, {}};
    for (const auto& o : scene.observations)
      if (o.frame_index == f) ann.pairs.push_back({o.touch_px, o.view_px, o.view_depth});
    out.push_back(std::move(ann));
  }
  return out;
}

std::vector<Correspondence> world_correspondences(const SyntheticScene& scene, std::size_t frame_index) {
  std::vector<Correspondence> out;
  for (const auto& o : scene.observations)
    if (o.frame_index == frame_index) out.push_back({scene.points[o.point_index], o.touch_px});
  return out;
}

PositionalEmbeddings positional_embeddings(std::span<const Vec3> query_positions,
                                           std::span<const Vec3> gallery_positions, std::size_t dim) {
  if (dim < 5) throw Error(ErrorKind::InvalidArgument, "positional embeddings need dimension >= 5");
  if (gallery_positions.empty()) throw Error(ErrorKind::Precondition, "positional embeddings need a gallery");

  Vec3 center = Vec3::Zero();
  for (const auto& p : gallery_positions) center += p;
  center /= static_cast<double>(gallery_positions.size());

  // Gallery item g(p) = (p, -|p|^2/2, pad) with pad making every |g| equal;
  // query a(q) = (q, 1, 0). Then a.g = (|q|^2 - |p - q|^2) / 2.
  double c = 0.0;
  for (const auto& p : gallery_positions) {
    const double s = (p - center).squaredNorm();
    c = std::max(c, s + 0.25 * s * s);
  }
  c += 1.0;

  PositionalEmbeddings out;
  for (const auto& p : gallery_positions) {
    const Vec3 d = p - center;
    const double s = d.squaredNorm();
    std::vector<double> v(dim, 0.0);
    v[0] = d.x();
    v[1] = d.y();
    v[2] = d.z();
    v[3] = -0.5 * s;
    v[4] = std::sqrt(std::max(0.0, c - s - 0.25 * s * s));
    out.gallery.push_back(EmbeddingVector::normalized(std::move(v)));
  }
  for (const auto& q : query_positions) {
    const Vec3 d = q - center;
    std::vector<double> v(dim, 0.0);
    v[0] = d.x();
    v[1] = d.y();
    v[2] = d.z();
    v[3] = 1.0;
    out.queries.push_back(EmbeddingVector::normalized(std::move(v)));
  }
  return out;
}

void export_capture(const SyntheticScene& scene, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ostringstream s;
    write_intrinsics(s, {{"cam", scene.intrinsics_cam}, {"touch", scene.intrinsics_touch}});
    write_text_file(dir / "intrinsics.txt", s.str());
  }

  std::vector<PoseFileRecord> poses;
  for (const auto& v : scene.trajectory) poses.push_back(PoseFileRecord::from_pose(v.id, v.pose, "cam"));
  save_poses(dir / "poses.txt", poses);

  FrameIndex index;
  for (const auto& v : scene.trajectory) index.visual.push_back({v.id, v.timestamp, ""});
  for (std::size_t i = 0; i < scene.touch_frames.size(); ++i) {
    const auto& t = scene.touch_frames[i];
    const bool calib =
        std::find(scene.calibration_frames.begin(), scene.calibration_frames.end(), i) != scene.calibration_frames.end();
    index.touch.push_back({t.id, t.timestamp, calib ? "images/tactile/" + t.id + ".raster" : ""});
  }
  {
    std::ostringstream s;
    write_frame_index(s, index);
    write_text_file(dir / "frames.txt", s.str());
  }

  const auto annotations = annotate(scene);
  {
    std::ostringstream s;
    write_annotations(s, annotations);
    write_text_file(dir / "annotations.jsonl", s.str());
  }

  for (std::size_t f : scene.calibration_frames) {
    const auto& fid = scene.trajectory[f].id;
    const auto& tid = scene.touch_frames[f].id;
    save_depth(dir / "depth" / (fid + ".depth"), render_depth(scene, f));

    ImageBuffer visual(scene.intrinsics_cam.width(), scene.intrinsics_cam.height(), 1);
    ImageBuffer tactile(scene.intrinsics_touch.width(), scene.intrinsics_touch.height(), 1);
    for (int y = 0; y < visual.height(); ++y)
      for (int x = 0; x < visual.width(); ++x) visual.set(x, y, 0, 0.1 + 0.2 * y / visual.height());
    for (int y = 0; y < tactile.height(); ++y)
      for (int x = 0; x < tactile.width(); ++x) tactile.set(x, y, 0, 0.5);
    for (const auto& o : scene.observations) {
      if (o.frame_index != f) continue;
      splat(visual, o.view_px, 0.9);
      splat(tactile, o.touch_px, 1.0);
    }
    save_raster(dir / "images" / "visual" / (fid + ".raster"), visual);
    save_raster(dir / "images" / "tactile" / (tid + ".raster"), tactile);
  }

  std::vector<Vec3> positions;
  std::vector<PoseFileRecord> touch_poses;
  EmbeddingSet tactile_set, visual_set;
  for (std::size_t i = 0; i < scene.touch_frames.size(); ++i) {
    const Pose p = scene.true_touch_pose(i);
    positions.push_back(p.translation());
    touch_poses.push_back(PoseFileRecord::from_pose(scene.touch_frames[i].id, p, "touch"));
    tactile_set.ids.push_back(scene.touch_frames[i].id);
    visual_set.ids.push_back(scene.touch_frames[i].id);
  }
  auto emb = positional_embeddings(positions, positions);
  tactile_set.vectors = std::move(emb.queries);
  visual_set.vectors = std::move(emb.gallery);
  save_embeddings(dir / "embeddings" / "tactile.emb", tactile_set);
  save_embeddings(dir / "embeddings" / "visual.emb", visual_set);

  save_poses(dir / "ground_truth" / "touch_poses.txt", touch_poses);
  nlohmann::json gt = {{"cam_to_touch", pose_to_json(scene.true_rig)},
                       {"seed", scene.rng_seed},
                       {"noise_px", scene.noise_px},
                       {"rng_stream_version", kRngStreamVersion}};
  write_text_file(dir / "ground_truth" / "rig.json", gt.dump(2) + "\n");
}

}  // namespace touchreg::synth
