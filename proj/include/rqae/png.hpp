#pragma once

#include <zlib.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "rqae/common.hpp"

namespace rqae {

namespace detail {

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + crc_start, static_cast<uInt>(4 + data.size()));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

inline const std::uint8_t kPngSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

}  // namespace detail

// 8-bit grayscale PNG bytes: filter 0 on every scanline, zlib level 9.
// Output is deterministic, which the run-manifest hashing relies on.
inline std::vector<std::uint8_t> encode_png_gray8(const std::uint8_t* pixels, int width,
                                                  int height) {
  if (width < 1 || height < 1) throw ShapeError("png dimensions must be positive");

  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(height) * (static_cast<std::size_t>(width) + 1));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);  // per-row filter byte
    raw.insert(raw.end(), pixels + static_cast<std::size_t>(y) * width,
               pixels + (static_cast<std::size_t>(y) + 1) * width);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(bound);
  if (compress2(packed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw DataError("png deflate failed");
  packed.resize(bound);

  std::vector<std::uint8_t> ihdr;
  detail::put_be32(ihdr, static_cast<std::uint32_t>(width));
  detail::put_be32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // deflate
  ihdr.push_back(0);  // adaptive filtering
  ihdr.push_back(0);  // no interlace

  std::vector<std::uint8_t> out(detail::kPngSignature, detail::kPngSignature + 8);
  detail::png_chunk(out, "IHDR", ihdr);
  detail::png_chunk(out, "IDAT", packed);
  detail::png_chunk(out, "IEND", {});
  return out;
}

inline void write_png_gray8(const std::string& path, const std::uint8_t* pixels, int width,
                            int height) {
  const auto bytes = encode_png_gray8(pixels, width, height);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out.flush()) throw DataError("write to '" + path + "' failed");
}

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

// Reads back the encoder's own dialect: 8-bit grayscale, no interlace,
// filter 0 rows. Anything else is rejected rather than half-decoded.
inline GrayImage decode_png_gray8(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), detail::kPngSignature, 8) != 0)
    throw DataError("not a png file");

  GrayImage img;
  std::vector<std::uint8_t> idat;
  bool saw_ihdr = false, saw_iend = false;
  std::size_t pos = 8;
  while (pos + 8 <= bytes.size() && !saw_iend) {
    const std::uint32_t len = detail::get_be32(bytes.data() + pos);
    if (pos + 12 + len > bytes.size()) throw DataError("png chunk overruns the file");
    const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
    const std::uint8_t* data = bytes.data() + pos + 8;

    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, bytes.data() + pos + 4, 4 + len);
    if (static_cast<std::uint32_t>(crc) != detail::get_be32(data + len))
      throw DataError("png chunk crc mismatch");

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw DataError("png IHDR has wrong length");
      img.width = static_cast<int>(detail::get_be32(data));
      img.height = static_cast<int>(detail::get_be32(data + 4));
      if (data[8] != 8 || data[9] != 0 || data[12] != 0)
        throw DataError("unsupported png variant: reader handles 8-bit grayscale, no interlace");
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || !saw_iend || idat.empty()) throw DataError("png is missing required chunks");
  if (img.width < 1 || img.height < 1) throw DataError("png has empty dimensions");

  const std::size_t stride = static_cast<std::size_t>(img.width) + 1;
  std::vector<std::uint8_t> raw(stride * static_cast<std::size_t>(img.height));
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != raw.size())
    throw DataError("png pixel data is corrupt");

  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    const std::uint8_t* row = raw.data() + static_cast<std::size_t>(y) * stride;
    if (row[0] != 0)
      throw DataError("unsupported png variant: reader handles filter-0 scanlines only");
    std::memcpy(img.pixels.data() + static_cast<std::size_t>(y) * img.width, row + 1,
                static_cast<std::size_t>(img.width));
  }
  return img;
}

inline GrayImage read_png_gray8(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open png '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_png_gray8(bytes);
}

}  // namespace rqae
