#include "wysiwim/png_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <png.h>

#include "wysiwim/error.hpp"

namespace wysiwim::render {

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
  const auto rgb = image.to_bytes();

  png_image info;
  std::memset(&info, 0, sizeof(info));
  info.version = PNG_IMAGE_VERSION;
  info.width = static_cast<png_uint_32>(image.width());
  info.height = static_cast<png_uint_32>(image.height());
  info.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&info, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
    const std::string msg = info.message;
    png_image_free(&info);
    throw Error("PNG encoding failed: " + msg);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&info, out.data(), &size, 0, rgb.data(), 0, nullptr)) {
    const std::string msg = info.message;
    png_image_free(&info);
    throw Error("PNG encoding failed: " + msg);
  }
  out.resize(size);
  return out;
}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image info;
  std::memset(&info, 0, sizeof(info));
  info.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&info, bytes.data(), bytes.size())) {
    throw FormatError(std::string("not a readable PNG: ") + info.message);
  }
  info.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(info));
  if (!png_image_finish_read(&info, nullptr, rgb.data(), 0, nullptr)) {
    const std::string msg = info.message;
    png_image_free(&info);
    throw FormatError("PNG decoding failed: " + msg);
  }
  return RasterImage::from_bytes(static_cast<int>(info.width), static_cast<int>(info.height), rgb);
}

void write_image(const RasterImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

RasterImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace wysiwim::render
