#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "touchreg/geometry.hpp"
#include "touchreg/resection.hpp"

namespace touchreg {

struct VisualFrame {
  std::string id;
  double timestamp = 0.0;  // seconds
  Pose pose;               // camera -> scene (p^v)
};

struct TouchFrame {
  std::string id;
  double timestamp = 0.0;  // seconds
  std::string image_ref;
};

// Unsynchronized capture streams as recorded.
struct RawStreams {
  std::vector<VisualFrame> visual;
  std::vector<TouchFrame> touch;
  Intrinsics intrinsics_cam;
  Intrinsics intrinsics_touch;
};

struct PairedTouchFrame {
  TouchFrame frame;
  std::optional<std::size_t> visual_index;  // index into CaptureSession::visual_frames
};

struct CaptureSession {
  std::vector<VisualFrame> visual_frames;  // strictly increasing timestamps
  std::vector<PairedTouchFrame> touch_frames;
  Intrinsics intrinsics_cam;
  Intrinsics intrinsics_touch;
  std::vector<std::string> dropped_touch_ids;  // exceeded max_skew during synchronization

  const VisualFrame* find_visual(const std::string& id) const;
  const PairedTouchFrame* find_touch(const std::string& id) const;
};

// One annotated pixel pair: a touch-image pixel and the matching pixel in the
// synthesized calibration view. depth_m is the calibration-view depth at
// view_px; when absent the frame's depth map supplies it.
struct AnnotatedPair {
  Vec2 touch_px = Vec2::Zero();
  Vec2 view_px = Vec2::Zero();
  std::optional<double> depth_m;
};

struct FrameAnnotation {
  std::string frame_id;  // visual frame whose calibration view was annotated
  std::string touch_id;  // touch image annotated against it
  std::vector<AnnotatedPair> pairs;
};

struct RigCalibration {
  Pose cam_to_touch;  // touch-sensor frame -> capture-camera frame
  double mean_l1_error = 0.0;
  std::size_t correspondence_count = 0;
  ResectionResult solve;  // pose is calibration-view -> touch camera
};

inline constexpr double kCalibrationViewAngleDegrees = 90.0;
inline constexpr std::size_t kMinCalibrationCorrespondences = 6;
inline constexpr double kDefaultMaxSkewSeconds = 0.05;
inline constexpr double kConditioningOffsetMeters = 0.4;
inline constexpr double kConditioningFovDegrees = 50.0;

// Calibration view: the capture pose turned 90 degrees about its local x axis.
Pose make_calibration_view_pose(const Pose& p_v);

// Pairs every touch frame with the nearest visual frame by timestamp (ties go
// to the earlier visual frame); pairs further apart than max_skew are dropped
// and recorded. Streams are sorted first; duplicate timestamps within a stream
// and empty streams are errors.
CaptureSession synchronize(const RawStreams& raw, double max_skew = kDefaultMaxSkewSeconds);

// Correspondences for one joint solve: every annotated view pixel lifted into
// its calibration view's local frame. All calibration views relate to the
// touch sensor by the same fixed transform, so the local frames are
// interchangeable.
std::vector<Correspondence> lift_annotations(const CaptureSession& session,
                                             const std::vector<FrameAnnotation>& annotations,
                                             const std::map<std::string, DepthMap>& depth_maps);

// Joint resectioning over all annotated frames, then the fixed camera->touch
// transform. Throws Error(Precondition) for fewer than 6 pairs and
// Error(InvalidArgument) for any annotation pixel without valid depth.
RigCalibration calibrate(const CaptureSession& session,
                         const std::vector<FrameAnnotation>& annotations,
                         const std::map<std::string, DepthMap>& depth_maps,
                         const SolverConfig& cfg);

// Rig transform implied by a calibration-view -> touch camera pose.
Pose rig_from_view_solution(const Pose& view_to_touch_cam);

struct TouchPose {
  std::string touch_id;
  Pose pose;  // touch sensor -> scene (p^t)
};

// p^t_i = p^v_i * cam_to_touch for the visual frame paired with each touch
// frame. Throws Error(Precondition) for an unpaired touch frame.
std::vector<TouchPose> propagate_touch_poses(const CaptureSession& session, const RigCalibration& rig);
std::vector<TouchPose> propagate_touch_poses(const CaptureSession& session, const Pose& cam_to_touch);

enum class ConditioningOffset {
  LocalBackward,  // along the sensor's local -z, away from the touched surface
  WorldUp,        // along scene -y (up under the y-down convention)
};

struct ConditioningView {
  Pose pose;
  double fov_degrees = kConditioningFovDegrees;
};

// Viewpoint for the RGB-D render paired with a touch: the touch pose moved
// 0.4 m back, rotation unchanged, 50 degree field of view.
ConditioningView make_conditioning_pose(const Pose& p_t,
                                        ConditioningOffset mode = ConditioningOffset::LocalBackward);

}  // namespace touchreg
