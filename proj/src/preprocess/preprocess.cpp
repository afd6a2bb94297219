#include "wysiwim/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "wysiwim/error.hpp"

namespace wysiwim::preprocess {
namespace {

// Source sample position along one axis as the exact fraction
// lo + frac / denom, with hi the clamped right/bottom neighbour.
struct Tap {
  int lo;
  int hi;
  std::int64_t frac;
};

// Half-pixel-centre mapping src = ((2 d + 1) src_size - dst_size) / (2 dst_size),
// evaluated exactly in integers so tie rounding never depends on the FPU.
std::vector<Tap> axis_taps(int src_size, int dst_size, std::int64_t denom) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst_size));
  const std::int64_t max_num = static_cast<std::int64_t>(src_size - 1) * denom;
  for (int d = 0; d < dst_size; ++d) {
    std::int64_t num = static_cast<std::int64_t>(2 * d + 1) * src_size - dst_size;
    num = std::clamp<std::int64_t>(num, 0, max_num);
    const auto lo = static_cast<int>(num / denom);
    taps[static_cast<std::size_t>(d)] = Tap{lo, std::min(lo + 1, src_size - 1), num - lo * denom};
  }
  return taps;
}

std::int64_t channel_int(Rgb p, int c) {
  switch (c) {
    case 0: return p.r;
    case 1: return p.g;
    default: return p.b;
  }
}

double channel(Rgb p, int c) {
  switch (c) {
    case 0: return p.r;
    case 1: return p.g;
    default: return p.b;
  }
}

}  // namespace

RasterImage resize_bilinear(const RasterImage& image, int target_width, int target_height) {
  if (target_width <= 0 || target_height <= 0) {
    throw ConfigError("resize target must be positive, got " + std::to_string(target_width) +
                      "x" + std::to_string(target_height));
  }
  if (target_width == image.width() && target_height == image.height()) {
    return image;
  }
  const std::int64_t den_x = 2 * static_cast<std::int64_t>(target_width);
  const std::int64_t den_y = 2 * static_cast<std::int64_t>(target_height);
  const std::int64_t den = den_x * den_y;
  const auto xs = axis_taps(image.width(), target_width, den_x);
  const auto ys = axis_taps(image.height(), target_height, den_y);

  RasterImage out(target_width, target_height);
  for (int y = 0; y < target_height; ++y) {
    const Tap ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_width; ++x) {
      const Tap tx = xs[static_cast<std::size_t>(x)];
      const Rgb p00 = image.pixel(tx.lo, ty.lo);
      const Rgb p01 = image.pixel(tx.hi, ty.lo);
      const Rgb p10 = image.pixel(tx.lo, ty.hi);
      const Rgb p11 = image.pixel(tx.hi, ty.hi);
      std::array<std::uint8_t, 3> v{};
      for (int c = 0; c < 3; ++c) {
        const std::int64_t top =
            channel_int(p00, c) * (den_x - tx.frac) + channel_int(p01, c) * tx.frac;
        const std::int64_t bottom =
            channel_int(p10, c) * (den_x - tx.frac) + channel_int(p11, c) * tx.frac;
        const std::int64_t scaled = top * (den_y - ty.frac) + bottom * ty.frac;
        // Non-negative, so half-up is half-away-from-zero.
        v[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>((2 * scaled + den) / (2 * den));
      }
      out.set_pixel(x, y, Rgb{v[0], v[1], v[2]});
    }
  }
  return out;
}

InputTensor normalize(const RasterImage& image, const ChannelTriple& mean,
                      const ChannelTriple& std) {
  for (int c = 0; c < 3; ++c) {
    if (std[static_cast<std::size_t>(c)] == 0.0 || !std::isfinite(std[static_cast<std::size_t>(c)]) ||
        !std::isfinite(mean[static_cast<std::size_t>(c)])) {
      throw ConfigError("normalization constants must be finite with nonzero std (channel " +
                        std::to_string(c) + ")");
    }
  }
  InputTensor tensor(image.height(), image.width());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Rgb p = image.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        tensor.at(c, y, x) = (channel(p, c) / 255.0 - mean[ci]) / std[ci];
      }
    }
  }
  return tensor;
}

}  // namespace wysiwim::preprocess
