#include "wysiwim/cache.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

namespace wysiwim::embed {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'W', 'E', 'M', 'B'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFFU));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw CacheTruncatedError("embedding cache truncated while reading " + std::string(what) +
                                " at byte " + std::to_string(pos_));
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T le(const char* what) {
    const auto b = take(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_cache(std::span<const EmbeddingVector> vectors) {
  std::vector<const EmbeddingVector*> sorted;
  sorted.reserve(vectors.size());
  for (const auto& v : vectors) sorted.push_back(&v);
  std::sort(sorted.begin(), sorted.end(),
            [](const EmbeddingVector* a, const EmbeddingVector* b) { return a->id < b->id; });

  const std::size_t dim = sorted.empty() ? 0 : sorted.front()->values.size();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& v = *sorted[i];
    if (v.values.size() != dim) {
      throw ShapeMismatchError("embedding '" + v.id + "' has dimension " +
                               std::to_string(v.values.size()) + ", cache dimension is " +
                               std::to_string(dim));
    }
    if (i > 0 && sorted[i - 1]->id == v.id) {
      throw FormatError("duplicate embedding id '" + v.id + "'");
    }
    if (!std::all_of(v.values.begin(), v.values.end(), [](float x) { return std::isfinite(x); })) {
      throw FormatError("embedding '" + v.id + "' contains a non-finite value");
    }
  }

  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(out, kCacheVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  put_le<std::uint64_t>(out, sorted.size());
  for (const auto* v : sorted) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v->id.size()));
    out.insert(out.end(), v->id.begin(), v->id.end());
    for (float x : v->values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  }
  return out;
}

std::vector<EmbeddingVector> decode_cache(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  // A short prefix of the magic is a truncated cache, anything else is not a cache.
  const std::size_t shown = std::min(bytes.size(), kMagic.size());
  if (!std::equal(kMagic.begin(), kMagic.begin() + static_cast<std::ptrdiff_t>(shown), bytes.begin())) {
    throw CacheMagicError("not an embedding cache (bad magic)");
  }
  r.take(kMagic.size(), "magic");
  const auto version = r.le<std::uint32_t>("version");
  if (version != kCacheVersion) {
    throw FormatError("unsupported embedding cache version " + std::to_string(version));
  }
  const auto dim = r.le<std::uint32_t>("dimension");
  const auto count = r.le<std::uint64_t>("count");

  std::vector<EmbeddingVector> out;
  // Each record needs at least the id length and its values.
  if (count > r.remaining() / (4 + 4ULL * dim)) {
    throw CacheTruncatedError("embedding cache declares " + std::to_string(count) +
                              " records but holds only " + std::to_string(r.remaining()) +
                              " more bytes");
  }
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    EmbeddingVector v;
    const auto id_len = r.le<std::uint32_t>("id length");
    const auto id = r.take(id_len, "id");
    v.id.assign(id.begin(), id.end());
    v.values.resize(dim);
    for (auto& x : v.values) x = std::bit_cast<float>(r.le<std::uint32_t>("values"));
    if (!out.empty() && !(out.back().id < v.id)) {
      throw FormatError("embedding cache records are not sorted by unique id at '" + v.id + "'");
    }
    out.push_back(std::move(v));
  }
  if (r.remaining() != 0) {
    throw FormatError("embedding cache has " + std::to_string(r.remaining()) +
                      " trailing bytes; dimension or count disagrees with the payload");
  }
  return out;
}

void write_cache(std::span<const EmbeddingVector> vectors, const std::filesystem::path& path) {
  const auto bytes = encode_cache(vectors);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

std::vector<EmbeddingVector> read_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open embedding cache " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_cache(bytes);
  } catch (const CacheMagicError& e) {
    throw CacheMagicError(path.string() + ": " + e.what());
  } catch (const CacheTruncatedError& e) {
    throw CacheTruncatedError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace wysiwim::embed
