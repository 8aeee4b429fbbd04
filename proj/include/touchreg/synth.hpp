#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "touchreg/embedding.hpp"
#include "touchreg/geometry.hpp"
#include "touchreg/rig.hpp"

namespace touchreg::synth {

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t trajectory_length = 200;  // visual frames, one touch frame each
  std::size_t calibration_frames = 2;
  std::size_t point_count = 12;  // annotated points, spread over the calibration frames
  double noise_px = 0.0;         // sigma of touch-pixel noise
  double scene_extent = 2.0;     // side of the cube holding the trajectory, meters
  double min_depth = 0.3;        // point depth range seen from the touch sensor, meters
  double max_depth = 1.5;
  bool general_position = false;  // false: each frame's points lie on one random plane
  double max_rig_rotation_deg = 10.0;
  double max_rig_offset = 0.1;  // meters, per axis
  double frame_rate = 30.0;
  double touch_jitter = 0.004;  // seconds
  Intrinsics intrinsics_cam{500.0, 500.0, 320.0, 240.0, 640, 480};
  Intrinsics intrinsics_touch{600.0, 600.0, 320.0, 240.0, 640, 480};
};

struct Observation {
  std::size_t frame_index = 0;  // trajectory index of the calibration frame
  std::size_t point_index = 0;
  Vec2 touch_px;        // with noise
  Vec2 touch_px_exact;  // projection through the true touch pose
  Vec2 view_px;         // projection into the calibration view
  double view_depth = 0.0;
};

struct SyntheticScene {
  std::uint64_t rng_seed = 0;
  Pose true_rig;  // touch -> camera
  std::vector<VisualFrame> trajectory;
  std::vector<TouchFrame> touch_frames;  // touch_frames[i] was captured with trajectory[i]
  std::vector<std::size_t> calibration_frames;
  std::vector<Vec3> points;
  std::vector<Observation> observations;
  double noise_px = 0.0;
  Intrinsics intrinsics_cam{500.0, 500.0, 320.0, 240.0, 640, 480};
  Intrinsics intrinsics_touch{600.0, 600.0, 320.0, 240.0, 640, 480};

  Pose true_touch_pose(std::size_t i) const { return compose(trajectory[i].pose, true_rig); }
  RawStreams raw_streams() const;
};

// Throws Error(Precondition) when points cannot be placed in view of a
// calibration frame within 1000 attempts.
SyntheticScene generate(const SynthConfig& cfg);

// Calibration-view depth of every scene point visible from that frame (nearest
// point wins per pixel); 0 elsewhere.
DepthMap render_depth(const SyntheticScene& scene, std::size_t frame_index);

// Correspondence annotations as an annotator would record them.
std::vector<FrameAnnotation> annotate(const SyntheticScene& scene);

// Correspondences of one calibration frame in world coordinates, paired with
// the noisy touch pixels.
std::vector<Correspondence> world_correspondences(const SyntheticScene& scene, std::size_t frame_index);

struct PositionalEmbeddings {
  std::vector<EmbeddingVector> queries;
  std::vector<EmbeddingVector> gallery;
};

// Cross-modal embeddings whose query-gallery similarity strictly decreases
// with 3D distance between their positions: a perfect retrieval oracle.
PositionalEmbeddings positional_embeddings(std::span<const Vec3> query_positions,
                                           std::span<const Vec3> gallery_positions,
                                           std::size_t dim = kDefaultEmbeddingDim);

// Writes a complete capture in the on-disk formats:
//   intrinsics.txt, poses.txt, frames.txt, annotations.jsonl,
//   depth/<frame>.depth, images/visual/<frame>.raster, images/tactile/<touch>.raster,
//   embeddings/{tactile,visual}.emb(.ids), ground_truth/{rig.json,touch_poses.txt}
void export_capture(const SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace touchreg::synth
