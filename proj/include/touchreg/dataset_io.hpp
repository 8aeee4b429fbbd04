#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "touchreg/embedding.hpp"
#include "touchreg/geometry.hpp"
#include "touchreg/image.hpp"
#include "touchreg/rig.hpp"

namespace touchreg {

// ---------------------------------------------------------------------------
// Pose files. One record per line:
//
//   frame_id qw qx qy qz tx ty tz camera_id
//
// Whitespace separated; lines whose first non-blank character is '#' and
// blank lines are ignored. The quaternion maps the frame into the scene and
// must have unit norm within 1e-6. Writers emit 17 significant digits.
// ---------------------------------------------------------------------------

struct PoseFileRecord {
  std::string frame_id;
  double qw = 1.0, qx = 0.0, qy = 0.0, qz = 0.0;
  double tx = 0.0, ty = 0.0, tz = 0.0;
  std::string camera_id;

  Pose pose() const;
  static PoseFileRecord from_pose(std::string frame_id, const Pose& pose, std::string camera_id);

  bool operator==(const PoseFileRecord&) const = default;
};

std::vector<PoseFileRecord> read_poses(std::istream& in);
void write_poses(std::ostream& out, std::span<const PoseFileRecord> records);

// ---------------------------------------------------------------------------
// Frame index ("frames.txt"). One record per line:
//
//   visual <frame_id> <timestamp_s>
//   touch  <touch_id> <timestamp_s> [<image_ref>]
// ---------------------------------------------------------------------------

struct FrameIndexEntry {
  std::string id;
  double timestamp = 0.0;
  std::string image_ref;
  bool operator==(const FrameIndexEntry&) const = default;
};

struct FrameIndex {
  std::vector<FrameIndexEntry> visual;
  std::vector<FrameIndexEntry> touch;
};

FrameIndex read_frame_index(std::istream& in);
void write_frame_index(std::ostream& out, const FrameIndex& index);

// ---------------------------------------------------------------------------
// Intrinsics file ("intrinsics.txt"). One camera per line:
//
//   <name> fx fy cx cy width height
//
// The pipeline expects the names "cam" (synthesized views) and "touch".
// ---------------------------------------------------------------------------

std::map<std::string, Intrinsics> read_intrinsics(std::istream& in);
void write_intrinsics(std::ostream& out, const std::map<std::string, Intrinsics>& cams);

// ---------------------------------------------------------------------------
// Dataset splits: consecutive blocks of `sequence_length` frames; full blocks
// cycle through 8 train, 1 validation, 1 test; a final partial block is train.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultSequenceLength = 50;

enum class SplitRole { Train, Validation, Test };
const char* to_string(SplitRole role);

struct SplitAssignment {
  std::size_t sequence_index = 0;
  SplitRole role = SplitRole::Train;
  std::size_t first_frame = 0;
  std::size_t frame_count = 0;
  bool operator==(const SplitAssignment&) const = default;
};

std::vector<SplitAssignment> make_splits(std::size_t frame_count,
                                         std::size_t sequence_length = kDefaultSequenceLength);

// Per-frame listing: "<touch_id> <sequence_index> <role>".
void write_splits(std::ostream& out, std::span<const std::string> frame_ids,
                  std::span<const SplitAssignment> splits);

// ---------------------------------------------------------------------------
// Depth maps: uint32 width, uint32 height, then width*height float32 depths in
// meters, row-major, all little-endian. 0 marks invalid pixels.
// ---------------------------------------------------------------------------

DepthMap read_depth(std::istream& in);
// Also checks the size against the camera that rendered it.
DepthMap read_depth(std::istream& in, const Intrinsics& expected);
void write_depth(std::ostream& out, const DepthMap& depth);

// ---------------------------------------------------------------------------
// Raster images: uint32 width, height, channels, then float32 values in [0, 1]
// (row-major, channel-last), little-endian.
// ---------------------------------------------------------------------------

ImageBuffer read_raster(std::istream& in);
void write_raster(std::ostream& out, const ImageBuffer& image);

// ---------------------------------------------------------------------------
// Embeddings: uint32 count, uint32 dim, then count*dim float32 values,
// little-endian. Ids live in a sidecar text file, one per line, same order.
// ---------------------------------------------------------------------------

struct EmbeddingSet {
  std::vector<std::string> ids;
  std::vector<EmbeddingVector> vectors;
};

EmbeddingSet read_embeddings(std::istream& binary, std::istream& ids);
void write_embeddings(std::ostream& binary, std::ostream& ids, const EmbeddingSet& set);

// ---------------------------------------------------------------------------
// Correspondence annotations, one JSON record per line:
//
//   {"frame_id": "...", "touch_id": "...",
//    "pairs": [{"touch_px": [u, v], "view_px": [u, v], "depth_m": d}, ...]}
//
// depth_m may be omitted (or null) to take the depth from the frame's map.
// A file holding a single top-level JSON array of records is also accepted.
// ---------------------------------------------------------------------------

nlohmann::json to_json(const FrameAnnotation& ann);
FrameAnnotation annotation_from_json(const nlohmann::json& j);

std::vector<FrameAnnotation> read_annotations(std::istream& in);
void write_annotations(std::ostream& out, std::span<const FrameAnnotation> annotations);

// ---------------------------------------------------------------------------
// Rig calibration files (JSON).
// ---------------------------------------------------------------------------

nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RigCalibration& rig);
RigCalibration rig_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Path-based loaders/savers. I/O failures raise Error(Io) naming the path;
// format errors are re-raised with the path prefixed.
// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

std::vector<PoseFileRecord> load_poses(const std::filesystem::path& path);
void save_poses(const std::filesystem::path& path, std::span<const PoseFileRecord> records);
FrameIndex load_frame_index(const std::filesystem::path& path);
std::map<std::string, Intrinsics> load_intrinsics(const std::filesystem::path& path);
DepthMap load_depth(const std::filesystem::path& path, const Intrinsics& expected);
void save_depth(const std::filesystem::path& path, const DepthMap& depth);
ImageBuffer load_raster(const std::filesystem::path& path);
void save_raster(const std::filesystem::path& path, const ImageBuffer& image);
// Ids are read from "<path>.ids".
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set);
std::vector<FrameAnnotation> load_annotations(const std::filesystem::path& path);
RigCalibration load_rig(const std::filesystem::path& path);
void save_rig(const std::filesystem::path& path, const RigCalibration& rig);

}  // namespace touchreg
