#include "rda/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rda/error.hpp"

namespace rda {

namespace {

void check_shape(int height, int width, int channels) {
  if (height < 2 || width < 2) {
    throw DimensionError("image must be at least 2x2, got " + std::to_string(height) +
                         "x" + std::to_string(width));
  }
  if (channels != 1 && channels != 3) {
    throw DimensionError("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

}  // namespace

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  check_shape(height, width, channels);
  data_.assign(plane_size() * static_cast<std::size_t>(channels), fill);
}

Image::Image(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_shape(height, width, channels);
  if (data_.size() != plane_size() * static_cast<std::size_t>(channels)) {
    throw DimensionError("image buffer size does not match its dimensions");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw NumericError("image contains a non-finite value");
  }
}

std::span<double> Image::plane(int c) {
  return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * plane_size(),
                                          plane_size());
}

std::span<const double> Image::plane(int c) const {
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * plane_size(),
                                                plane_size());
}

Image resize_bilinear(const Image& image, int height, int width) {
  if (image.height() == height && image.width() == width) return image;
  Image out(height, width, image.channels());
  const double sy = static_cast<double>(image.height()) / height;
  const double sx = static_cast<double>(image.width()) / width;
  for (int c = 0; c < image.channels(); ++c) {
    for (int i = 0; i < height; ++i) {
      double fy = std::clamp((i + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
      int y0 = static_cast<int>(std::floor(fy));
      int y1 = std::min(y0 + 1, image.height() - 1);
      double wy = fy - y0;
      for (int j = 0; j < width; ++j) {
        double fx = std::clamp((j + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
        int x0 = static_cast<int>(std::floor(fx));
        int x1 = std::min(x0 + 1, image.width() - 1);
        double wx = fx - x0;
        double top = (1 - wx) * image.at(c, y0, x0) + wx * image.at(c, y0, x1);
        double bottom = (1 - wx) * image.at(c, y1, x0) + wx * image.at(c, y1, x1);
        out.at(c, i, j) = (1 - wy) * top + wy * bottom;
      }
    }
  }
  return out;
}

SquaredImage resize_to_square(const Image& image) {
  ImageDims dims{image.height(), image.width()};
  int side = std::max(image.height(), image.width());
  return {resize_bilinear(image, side, side), dims};
}

Image restore_size(const Image& image, ImageDims dims) {
  return resize_bilinear(image, dims.height, dims.width);
}

Image clamp01(const Image& image) {
  Image out = image;
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double max_abs_difference(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw DimensionError("max_abs_difference: shape mismatch");
  double m = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) m = std::max(m, std::abs(av[k] - bv[k]));
  return m;
}

}  // namespace rda
