#pragma once

#include <cstddef>
#include <vector>

namespace touchreg {

// Interleaved (row-major, channel-last) image with values in [0, 1].
class ImageBuffer {
 public:
  ImageBuffer(int width, int height, int channels);
  ImageBuffer(int width, int height, int channels, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  const std::vector<double>& values() const { return values_; }

  double at(int x, int y, int c = 0) const { return values_[index(x, y, c)]; }
  void set(int x, int y, int c, double v);

  // Channel mean at one pixel.
  double gray(int x, int y) const;

  ImageBuffer crop(int x0, int y0, int w, int h) const;
  // Quarter turn clockwise as displayed (x right, y down).
  ImageBuffer rotated_clockwise() const;

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_, height_, channels_;
  std::vector<double> values_;
};

}  // namespace touchreg
