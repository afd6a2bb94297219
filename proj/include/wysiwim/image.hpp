#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wysiwim {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend constexpr bool operator==(Rgb, Rgb) = default;
};

// Fixed-size RGB raster, row-major, 8 bits per channel.
class RasterImage {
 public:
  // Throws ConfigError unless width and height are positive.
  RasterImage(int width, int height, Rgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  Rgb pixel(int x, int y) const noexcept { return pixels_[index(x, y)]; }
  void set_pixel(int x, int y, Rgb color) noexcept { pixels_[index(x, y)] = color; }

  std::span<const Rgb> pixels() const noexcept { return pixels_; }

  // Interleaved R,G,B bytes, length 3 * width * height.
  std::vector<std::uint8_t> to_bytes() const;
  static RasterImage from_bytes(int width, int height, std::span<const std::uint8_t> rgb);

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<Rgb> pixels_;
};

}  // namespace wysiwim
