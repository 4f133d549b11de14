#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "meshplace/error.hpp"

namespace meshplace {

/// Dense row-major single-channel image.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(checked(width)), height_(checked(height)),
        data_(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  template <typename U>
  bool same_size(const Image<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Image&) const = default;

 private:
  static int checked(int n) {
    if (n < 0) throw Error(ErrorCode::kInvalidParameter, "negative image size");
    return n;
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Depth in meters; 0 marks an invalid pixel.
using DepthImage = Image<float>;
/// Binary mask stored as 0 / 1.
using MaskImage = Image<std::uint8_t>;
/// Luminance in [0, 1].
using GrayImage = Image<float>;

struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  int x1() const { return x0 + width - 1; }
  int y1() const { return y0 + height - 1; }
  double center_x() const { return x0 + 0.5 * (width - 1); }
  double center_y() const { return y0 + 0.5 * (height - 1); }

  bool operator==(const BoundingBox&) const = default;
};

/// Tight box around the nonzero pixels, or nullopt for an empty mask.
std::optional<BoundingBox> mask_bounds(const MaskImage& mask);

std::size_t count_nonzero(const MaskImage& mask);

template <typename T>
Image<T> crop(const Image<T>& image, const BoundingBox& box) {
  if (box.x0 < 0 || box.y0 < 0 || box.x0 + box.width > image.width() ||
      box.y0 + box.height > image.height() || box.width < 0 || box.height < 0) {
    throw Error(ErrorCode::kInvalidParameter, "crop box outside the image");
  }
  Image<T> out(box.width, box.height);
  for (int y = 0; y < box.height; ++y) {
    for (int x = 0; x < box.width; ++x) out(x, y) = image(box.x0 + x, box.y0 + y);
  }
  return out;
}

/// Bilinear resampling with pixel-center alignment and clamped borders.
GrayImage resample_bilinear(const GrayImage& image, int width, int height);

/// Rec. 601 luminance of 8-bit RGB, scaled to [0, 1].
float luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b);

}  // namespace meshplace
