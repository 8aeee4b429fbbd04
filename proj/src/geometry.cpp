#include "touchreg/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "touchreg/error.hpp"

namespace touchreg {

namespace {

double deg2rad(double degrees) { return degrees * std::numbers::pi / 180.0; }

}  // namespace

Pose::Pose(const Quaternion& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double n = rotation_.norm();
  if (!std::isfinite(n) || n < 1e-12)
    throw Error(ErrorKind::InvalidArgument, "pose rotation quaternion has zero or non-finite norm");
  if (!translation_.allFinite())
    throw Error(ErrorKind::InvalidArgument, "pose translation is not finite");
  // Already-unit quaternions are kept bit-exact.
  if (std::abs(n - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) rotation_.coeffs() /= n;
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

Pose inverse(const Pose& p) {
  const Quaternion q_inv = p.rotation().conjugate();
  return Pose(q_inv, -(q_inv * p.translation()));
}

Pose rotate_about_x(const Pose& p, double degrees) {
  const Quaternion rx(Eigen::AngleAxisd(deg2rad(degrees), Vec3::UnitX()));
  return Pose(p.rotation() * rx, p.translation());
}

double rotation_angle(const Quaternion& q) {
  // Sign-insensitive: q and -q describe the same rotation.
  const double v = q.vec().norm();
  return 2.0 * std::atan2(v, std::abs(q.w()));
}

double rotation_angle_between(const Pose& a, const Pose& b) {
  return rotation_angle(a.rotation().conjugate() * b.rotation());
}

Intrinsics::Intrinsics(double fx, double fy, double cx, double cy, int width, int height)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy), width_(width), height_(height) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorKind::InvalidArgument, "intrinsics: image size must be positive");
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
    throw Error(ErrorKind::InvalidArgument, "intrinsics: focal lengths must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw Error(ErrorKind::InvalidArgument, "intrinsics: principal point outside the image");
}

Intrinsics Intrinsics::from_horizontal_fov(double fov_degrees, int width, int height) {
  if (!(fov_degrees > 0.0 && fov_degrees < 180.0))
    throw Error(ErrorKind::InvalidArgument, "field of view must lie in (0, 180) degrees");
  const double f = 0.5 * width / std::tan(0.5 * deg2rad(fov_degrees));
  return Intrinsics(f, f, 0.5 * width, 0.5 * height, width, height);
}

Mat3 Intrinsics::matrix() const {
  Mat3 k;
  k << fx_, 0.0, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
  return k;
}

bool Intrinsics::contains(const Vec2& pixel) const {
  return pixel.allFinite() && pixel.x() >= -0.5 && pixel.x() < width_ - 0.5 &&
         pixel.y() >= -0.5 && pixel.y() < height_ - 0.5;
}

DepthMap::DepthMap(int width, int height)
    : DepthMap(width, height,
               std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                   static_cast<std::size_t>(std::max(height, 0)), 0.0)) {}

DepthMap::DepthMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorKind::InvalidArgument, "depth map size must be positive");
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error(ErrorKind::InvalidArgument, "depth map value count does not match its size");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0)
      throw Error(ErrorKind::InvalidArgument,
                  "depth map value " + std::to_string(i) + " is negative or not finite");
  }
}

void DepthMap::set(int x, int y, double depth) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_)
    throw Error(ErrorKind::InvalidArgument, "depth map pixel out of range");
  if (!std::isfinite(depth) || depth < 0.0)
    throw Error(ErrorKind::InvalidArgument, "depth must be finite and non-negative");
  values_[static_cast<std::size_t>(y) * width_ + x] = depth;
}

double DepthMap::lookup(const Vec2& pixel) const {
  if (!pixel.allFinite()) return 0.0;
  const long x = std::lround(pixel.x());
  const long y = std::lround(pixel.y());
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return 0.0;
  return at(static_cast<int>(x), static_cast<int>(y));
}

std::optional<Vec2> project(const Intrinsics& intr, const Pose& world_to_cam, const Vec3& point) {
  const Vec3 pc = world_to_cam.transform(point);
  if (!(pc.z() > kMinCameraDepth)) return std::nullopt;
  return Vec2(intr.fx() * pc.x() / pc.z() + intr.cx(), intr.fy() * pc.y() / pc.z() + intr.cy());
}

Vec3 lift_pixel(const Intrinsics& intr, const Pose& cam_to_world, const Vec2& pixel, double depth) {
  if (!(depth > 0.0) || !std::isfinite(depth))
    throw Error(ErrorKind::InvalidArgument,
                "cannot lift pixel: depth " + std::to_string(depth) + " is not positive");
  if (!intr.contains(pixel))
    throw Error(ErrorKind::InvalidArgument, "cannot lift pixel: (" + std::to_string(pixel.x()) +
                                                ", " + std::to_string(pixel.y()) +
                                                ") is outside the image");
  const Vec3 pc((pixel.x() - intr.cx()) * depth / intr.fx(),
                (pixel.y() - intr.cy()) * depth / intr.fy(), depth);
  return cam_to_world.transform(pc);
}

}  // namespace touchreg
