#include "touchreg/image.hpp"

#include <cmath>
#include <string>

#include "touchreg/error.hpp"

namespace touchreg {

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : ImageBuffer(width, height, channels,
                  std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                      std::max(height, 0) * std::max(channels, 0), 0.0)) {}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<double> values)
    : width_(width), height_(height), channels_(channels), values_(std::move(values)) {
  if (width <= 0 || height <= 0 || channels <= 0)
    throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
  if (values_.size() != static_cast<std::size_t>(width) * height * channels)
    throw Error(ErrorKind::InvalidArgument, "image value count does not match its dimensions");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0 && values_[i] <= 1.0))
      throw Error(ErrorKind::InvalidArgument,
                  "image value " + std::to_string(i) + " lies outside [0, 1]");
  }
}

void ImageBuffer::set(int x, int y, int c, double v) {
  if (x < 0 || y < 0 || c < 0 || x >= width_ || y >= height_ || c >= channels_)
    throw Error(ErrorKind::InvalidArgument, "image index out of range");
  if (!(v >= 0.0 && v <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "image value outside [0, 1]");
  values_[index(x, y, c)] = v;
}

double ImageBuffer::gray(int x, int y) const {
  double s = 0.0;
  for (int c = 0; c < channels_; ++c) s += at(x, y, c);
  return s / channels_;
}

ImageBuffer ImageBuffer::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > width_ || y0 + h > height_)
    throw Error(ErrorKind::InvalidArgument, "crop window outside the image");
  ImageBuffer out(w, h, channels_);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels_; ++c) out.values_[out.index(x, y, c)] = at(x0 + x, y0 + y, c);
  return out;
}

ImageBuffer ImageBuffer::rotated_clockwise() const {
  ImageBuffer out(height_, width_, channels_);
  for (int y = 0; y < out.height_; ++y)
    for (int x = 0; x < out.width_; ++x)
      for (int c = 0; c < channels_; ++c)
        out.values_[out.index(x, y, c)] = at(y, height_ - 1 - x, c);
  return out;
}

}  // namespace touchreg
