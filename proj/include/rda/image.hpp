#ifndef RDA_IMAGE_HPP
#define RDA_IMAGE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace rda {

/// Real-valued raster stored planar: channel-major, then row-major.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);
  Image(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  bool square() const { return height_ == width_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int c, int i, int j) {
    return data_[static_cast<std::size_t>(c) * plane_size() +
                 static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(j)];
  }
  double at(int c, int i, int j) const {
    return data_[static_cast<std::size_t>(c) * plane_size() +
                 static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(j)];
  }

  std::span<double> plane(int c);
  std::span<const double> plane(int c) const;

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

struct ImageDims {
  int height = 0;
  int width = 0;
  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// Bilinear resampling with half-pixel centers.
Image resize_bilinear(const Image& image, int height, int width);

struct SquaredImage {
  Image image;
  ImageDims original;
};

/// Up-samples the short side to the long side. Square inputs pass through.
SquaredImage resize_to_square(const Image& image);
Image restore_size(const Image& image, ImageDims dims);

Image clamp01(const Image& image);

double max_abs_difference(const Image& a, const Image& b);

}  // namespace rda

#endif  // RDA_IMAGE_HPP
