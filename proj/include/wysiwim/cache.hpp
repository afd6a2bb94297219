#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wysiwim/error.hpp"

namespace wysiwim::embed {

struct EmbeddingVector {
  std::string id;
  std::vector<float> values;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

class CacheMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class CacheTruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Binary layout, all integers and floats little-endian:
//   "WEMB" | version u32 = 1 | dim u32 | count u64 |
//   count x { id_len u32 | id bytes | dim x f32 }
// Records are sorted by id; the dimension of an empty cache is 0.
inline constexpr std::uint32_t kCacheVersion = 1;

// Throws ShapeMismatchError if dimensions disagree and FormatError on
// duplicate ids or non-finite values.
std::vector<std::uint8_t> encode_cache(std::span<const EmbeddingVector> vectors);
// Throws CacheMagicError, CacheTruncatedError or FormatError.
std::vector<EmbeddingVector> decode_cache(std::span<const std::uint8_t> bytes);

void write_cache(std::span<const EmbeddingVector> vectors, const std::filesystem::path& path);
std::vector<EmbeddingVector> read_cache(const std::filesystem::path& path);

}  // namespace wysiwim::embed
