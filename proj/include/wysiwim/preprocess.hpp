#pragma once

#include <array>
#include <vector>

#include "wysiwim/image.hpp"

namespace wysiwim::preprocess {

// Channel-major (c, y, x) float input for a feature extractor; 3 channels.
struct InputTensor {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  static constexpr int kChannels = 3;

  InputTensor() = default;
  InputTensor(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<std::size_t>(kChannels) * h * w, fill) {}

  double& at(int c, int y, int x) { return values[offset(c, y, x)]; }
  double at(int c, int y, int x) const { return values[offset(c, y, x)]; }

  std::size_t offset(int c, int y, int x) const noexcept {
    return (static_cast<std::size_t>(c) * height + static_cast<std::size_t>(y)) * width +
           static_cast<std::size_t>(x);
  }

  friend bool operator==(const InputTensor&, const InputTensor&) = default;
};

using ChannelTriple = std::array<double, 3>;

// Half-pixel-centre bilinear resampling:
//   src = (dst + 0.5) * (src_size / dst_size) - 0.5, clamped to [0, src_size - 1]
// applied per axis and per channel, rounded half away from zero.
// Throws ConfigError for non-positive targets.
RasterImage resize_bilinear(const RasterImage& image, int target_width, int target_height);

// value(c, y, x) = (pixel(x, y)[c] / 255 - mean[c]) / std[c].
// Throws ConfigError when a std component is zero or not finite.
InputTensor normalize(const RasterImage& image, const ChannelTriple& mean,
                      const ChannelTriple& std);

}  // namespace wysiwim::preprocess
