#include "touchreg/rig.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "touchreg/error.hpp"

namespace touchreg {

namespace {

template <typename Frame>
std::vector<Frame> sorted_stream(const std::vector<Frame>& frames, const char* name) {
  if (frames.empty())
    throw Error(ErrorKind::Precondition, std::string(name) + " stream is empty");
  std::vector<Frame> out = frames;
  std::stable_sort(out.begin(), out.end(),
                   [](const Frame& a, const Frame& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i].timestamp))
      throw Error(ErrorKind::InvalidArgument,
                  std::string(name) + " frame '" + out[i].id + "' has a non-finite timestamp");
    if (i > 0 && !(out[i].timestamp > out[i - 1].timestamp))
      throw Error(ErrorKind::InvalidArgument,
                  std::string(name) + " timestamps are not strictly increasing at frame '" +
                      out[i].id + "'");
  }
  return out;
}

}  // namespace

const VisualFrame* CaptureSession::find_visual(const std::string& id) const {
  for (const auto& f : visual_frames)
    if (f.id == id) return &f;
  return nullptr;
}

const PairedTouchFrame* CaptureSession::find_touch(const std::string& id) const {
  for (const auto& f : touch_frames)
    if (f.frame.id == id) return &f;
  return nullptr;
}

Pose make_calibration_view_pose(const Pose& p_v) {
  return rotate_about_x(p_v, kCalibrationViewAngleDegrees);
}

CaptureSession synchronize(const RawStreams& raw, double max_skew) {
  if (!(max_skew >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "max_skew must be non-negative");
  CaptureSession session{sorted_stream(raw.visual, "visual"), {}, raw.intrinsics_cam,
                         raw.intrinsics_touch, {}};
  const auto touch = sorted_stream(raw.touch, "touch");
  const auto& vis = session.visual_frames;

  for (const auto& t : touch) {
    auto it = std::lower_bound(vis.begin(), vis.end(), t.timestamp,
                               [](const VisualFrame& v, double ts) { return v.timestamp < ts; });
    std::size_t best;
    if (it == vis.begin()) {
      best = 0;
    } else if (it == vis.end()) {
      best = vis.size() - 1;
    } else {
      const auto after = static_cast<std::size_t>(it - vis.begin());
      const std::size_t before = after - 1;
      // Equidistant: the earlier frame wins.
      best = (t.timestamp - vis[before].timestamp <= vis[after].timestamp - t.timestamp) ? before
                                                                                          : after;
    }
    if (std::abs(vis[best].timestamp - t.timestamp) > max_skew) {
      session.dropped_touch_ids.push_back(t.id);
      continue;
    }
    session.touch_frames.push_back({t, best});
  }
  return session;
}

std::vector<Correspondence> lift_annotations(const CaptureSession& session,
                                             const std::vector<FrameAnnotation>& annotations,
                                             const std::map<std::string, DepthMap>& depth_maps) {
  const Intrinsics& cam = session.intrinsics_cam;
  const Intrinsics& touch = session.intrinsics_touch;
  const Pose view_local = Pose::identity();

  std::vector<Correspondence> corrs;
  for (const auto& ann : annotations) {
    if (!session.find_visual(ann.frame_id))
      throw Error(ErrorKind::NotFound, "annotation references unknown visual frame '" +
                                           ann.frame_id + "'");
    if (!session.touch_frames.empty()) {
      const PairedTouchFrame* tf = session.find_touch(ann.touch_id);
      if (!tf || !tf->visual_index)
        throw Error(ErrorKind::NotFound, "annotation references unpaired touch frame '" +
                                             ann.touch_id + "'");
      if (session.visual_frames[*tf->visual_index].id != ann.frame_id)
        throw Error(ErrorKind::InvalidArgument,
                    "touch frame '" + ann.touch_id + "' is synchronized with visual frame '" +
                        session.visual_frames[*tf->visual_index].id + "', not '" + ann.frame_id +
                        "'");
    }
    const auto dm = depth_maps.find(ann.frame_id);
    if (dm == depth_maps.end())
      throw Error(ErrorKind::NotFound, "no depth map for frame '" + ann.frame_id + "'");
    if (!dm->second.matches(cam))
      throw Error(ErrorKind::InvalidArgument,
                  "depth map for frame '" + ann.frame_id + "' does not match the camera size");

    for (std::size_t k = 0; k < ann.pairs.size(); ++k) {
      const AnnotatedPair& pair = ann.pairs[k];
      const std::string where = "frame '" + ann.frame_id + "' pair " + std::to_string(k);
      if (!touch.contains(pair.touch_px))
        throw Error(ErrorKind::InvalidArgument, where + ": touch pixel outside the touch image");
      if (!cam.contains(pair.view_px))
        throw Error(ErrorKind::InvalidArgument, where + ": view pixel outside the calibration view");
      const double map_depth = dm->second.lookup(pair.view_px);
      if (!(map_depth > 0.0))
        throw Error(ErrorKind::InvalidArgument, where + ": invalid depth at view pixel");
      const double depth = pair.depth_m.value_or(map_depth);
      if (!(depth > 0.0) || !std::isfinite(depth))
        throw Error(ErrorKind::InvalidArgument, where + ": annotated depth is not positive");
      corrs.push_back({lift_pixel(cam, view_local, pair.view_px, depth), pair.touch_px});
    }
  }
  return corrs;
}

Pose rig_from_view_solution(const Pose& view_to_touch_cam) {
  // view_to_touch_cam maps calibration-view coordinates into the touch camera;
  // its inverse is the touch pose inside the calibration view.
  return compose(make_calibration_view_pose(Pose::identity()), inverse(view_to_touch_cam));
}

RigCalibration calibrate(const CaptureSession& session,
                         const std::vector<FrameAnnotation>& annotations,
                         const std::map<std::string, DepthMap>& depth_maps,
                         const SolverConfig& cfg) {
  std::size_t total = 0;
  for (const auto& a : annotations) total += a.pairs.size();
  if (total < kMinCalibrationCorrespondences)
    throw Error(ErrorKind::Precondition,
                "calibration needs at least " + std::to_string(kMinCalibrationCorrespondences) +
                    " correspondences, got " + std::to_string(total));

  const std::vector<Correspondence> corrs = lift_annotations(session, annotations, depth_maps);
  RigCalibration rig;
  rig.solve = solve(session.intrinsics_touch, corrs, cfg);
  rig.cam_to_touch = rig_from_view_solution(rig.solve.pose);
  rig.mean_l1_error = rig.solve.mean_l1_error;
  rig.correspondence_count = corrs.size();
  return rig;
}

std::vector<TouchPose> propagate_touch_poses(const CaptureSession& session, const Pose& cam_to_touch) {
  std::vector<TouchPose> out;
  out.reserve(session.touch_frames.size());
  for (const auto& t : session.touch_frames) {
    if (!t.visual_index || *t.visual_index >= session.visual_frames.size())
      throw Error(ErrorKind::Precondition, "touch frame '" + t.frame.id + "' is not paired");
    out.push_back({t.frame.id, compose(session.visual_frames[*t.visual_index].pose, cam_to_touch)});
  }
  return out;
}

std::vector<TouchPose> propagate_touch_poses(const CaptureSession& session, const RigCalibration& rig) {
  return propagate_touch_poses(session, rig.cam_to_touch);
}

ConditioningView make_conditioning_pose(const Pose& p_t, ConditioningOffset mode) {
  const Vec3 offset = mode == ConditioningOffset::LocalBackward
                          ? Vec3(p_t.rotation() * Vec3(0.0, 0.0, -kConditioningOffsetMeters))
                          : Vec3(0.0, -kConditioningOffsetMeters, 0.0);
  return {Pose(p_t.rotation(), p_t.translation() + offset), kConditioningFovDegrees};
}

}  // namespace touchreg
