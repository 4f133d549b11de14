#include "meshplace/image.hpp"

#include <algorithm>
#include <cmath>

namespace meshplace {

std::optional<BoundingBox> mask_bounds(const MaskImage& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return std::nullopt;
  return BoundingBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

std::size_t count_nonzero(const MaskImage& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(), [](auto v) { return v != 0; }));
}

GrayImage resample_bilinear(const GrayImage& image, int width, int height) {
  if (image.empty()) throw Error(ErrorCode::kInvalidParameter, "cannot resample an empty image");
  GrayImage out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  const int max_x = image.width() - 1;
  const int max_y = image.height() - 1;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(max_y));
    const int y_lo = static_cast<int>(fy);
    const int y_hi = std::min(y_lo + 1, max_y);
    const double wy = fy - y_lo;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(max_x));
      const int x_lo = static_cast<int>(fx);
      const int x_hi = std::min(x_lo + 1, max_x);
      const double wx = fx - x_lo;
      const double top = (1 - wx) * image(x_lo, y_lo) + wx * image(x_hi, y_lo);
      const double bottom = (1 - wx) * image(x_lo, y_hi) + wx * image(x_hi, y_hi);
      out(x, y) = static_cast<float>((1 - wy) * top + wy * bottom);
    }
  }
  return out;
}

float luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<float>((0.299 * r + 0.587 * g + 0.114 * b) / 255.0);
}

}  // namespace meshplace
