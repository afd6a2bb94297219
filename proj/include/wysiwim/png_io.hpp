#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wysiwim/image.hpp"

namespace wysiwim::render {

// Lossless 8-bit RGB PNG (no alpha).
std::vector<std::uint8_t> encode_png(const RasterImage& image);
RasterImage decode_png(std::span<const std::uint8_t> bytes);

// Throws IoError naming the path on failure.
void write_image(const RasterImage& image, const std::filesystem::path& path);
RasterImage read_image(const std::filesystem::path& path);

}  // namespace wysiwim::render
