#include "wysiwim/image.hpp"

#include <string>

#include "wysiwim/error.hpp"

namespace wysiwim {

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ConfigError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

std::vector<std::uint8_t> RasterImage::to_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(pixels_.size() * 3);
  for (const Rgb& p : pixels_) {
    out.push_back(p.r);
    out.push_back(p.g);
    out.push_back(p.b);
  }
  return out;
}

RasterImage RasterImage::from_bytes(int width, int height, std::span<const std::uint8_t> rgb) {
  RasterImage image(width, height);
  if (rgb.size() != image.pixels_.size() * 3) {
    throw ConfigError("expected " + std::to_string(image.pixels_.size() * 3) +
                      " RGB bytes, got " + std::to_string(rgb.size()));
  }
  for (std::size_t i = 0; i < image.pixels_.size(); ++i) {
    image.pixels_[i] = Rgb{rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]};
  }
  return image;
}

}  // namespace wysiwim
