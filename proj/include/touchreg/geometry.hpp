#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace touchreg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quaternion = Eigen::Quaterniond;

// Frame convention used throughout: right-handed, camera looks along +z,
// +x to the right and +y down in the image.

// Rigid transform mapping points from a local frame into its parent frame:
// x_parent = R * x_local + t. The rotation is always stored as a unit
// quaternion; the constructor normalizes.
class Pose {
 public:
  Pose() : rotation_(Quaternion::Identity()), translation_(Vec3::Zero()) {}
  Pose(const Quaternion& rotation, const Vec3& translation);

  static Pose identity() { return Pose(); }
  static Pose from_rotation(const Quaternion& rotation) { return Pose(rotation, Vec3::Zero()); }
  static Pose from_translation(const Vec3& translation) {
    return Pose(Quaternion::Identity(), translation);
  }

  const Quaternion& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Vec3 transform(const Vec3& point) const { return rotation_ * point + translation_; }

 private:
  Quaternion rotation_;
  Vec3 translation_;
};

// compose(a, b) applies b first, then a.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

// Rotates the pose about its own (local) x axis: R' = R * Rx(angle).
Pose rotate_about_x(const Pose& p, double degrees);

// Geodesic angle (radians) between the rotations of two poses.
double rotation_angle_between(const Pose& a, const Pose& b);
// Angle (radians) of a single rotation.
double rotation_angle(const Quaternion& q);

class Intrinsics {
 public:
  // Throws Error(InvalidArgument) unless fx, fy > 0, 0 <= cx < width and
  // 0 <= cy < height.
  Intrinsics(double fx, double fy, double cx, double cy, int width, int height);

  // Square pixels, principal point at the image center, horizontal field of view in degrees.
  static Intrinsics from_horizontal_fov(double fov_degrees, int width, int height);

  double fx() const { return fx_; }
  double fy() const { return fy_; }
  double cx() const { return cx_; }
  double cy() const { return cy_; }
  int width() const { return width_; }
  int height() const { return height_; }

  Mat3 matrix() const;

  // Pixel centers sit at integer coordinates, so a pixel is inside when it
  // rounds to a valid row/column.
  bool contains(const Vec2& pixel) const;

  bool operator==(const Intrinsics&) const = default;

 private:
  double fx_, fy_, cx_, cy_;
  int width_, height_;
};

// Per-pixel depth in meters; 0 marks an invalid pixel.
class DepthMap {
 public:
  DepthMap(int width, int height);
  DepthMap(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<double>& values() const { return values_; }

  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  void set(int x, int y, double depth);

  // Depth at the pixel nearest to a sub-pixel location; 0 when outside the map.
  double lookup(const Vec2& pixel) const;

  bool matches(const Intrinsics& intr) const {
    return intr.width() == width_ && intr.height() == height_;
  }

 private:
  int width_, height_;
  std::vector<double> values_;
};

inline constexpr double kMinCameraDepth = 1e-9;

// Pinhole projection of a world point. Returns nullopt when the point is at or
// behind the camera plane (camera-frame z <= 1e-9).
std::optional<Vec2> project(const Intrinsics& intr, const Pose& world_to_cam, const Vec3& point);

// Back-projects a pixel at the given depth (camera-frame z) into the parent
// frame of `cam_to_world`. Throws Error(InvalidArgument) for non-positive
// depth or a pixel outside the image.
Vec3 lift_pixel(const Intrinsics& intr, const Pose& cam_to_world, const Vec2& pixel, double depth);

}  // namespace touchreg
