#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "rqae/common.hpp"

namespace rqae {

// Weight checkpoint: magic "RQAE", version u32, then per blob a
// length-prefixed name, a u32 rank, u32 dims, and 32-bit LE floats.
// All multi-byte fields are little-endian.

struct CheckpointBlob {
  std::vector<uint32_t> dims;
  std::vector<float> values;
};

using Checkpoint = std::map<std::string, CheckpointBlob>;

namespace detail {

inline void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("checkpoint truncated");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void put_f32(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

inline float get_f32(std::istream& in) {
  uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace detail

inline constexpr uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write("RQAE", 4);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<uint32_t>(cp.size()));
  for (const auto& [name, blob] : cp) {
    detail::put_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put_u32(out, static_cast<uint32_t>(blob.dims.size()));
    uint64_t n = 1;
    for (uint32_t d : blob.dims) {
      detail::put_u32(out, d);
      n *= d;
    }
    if (n != blob.values.size())
      throw ShapeError("checkpoint blob '" + name + "' dims disagree with value count");
    for (float v : blob.values) detail::put_f32(out, v);
  }
  if (!out) throw DataError("checkpoint write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RQAE", 4) != 0)
    throw DataError("not a weight checkpoint: " + path);
  uint32_t version = detail::get_u32(in);
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  uint32_t count = detail::get_u32(in);
  Checkpoint cp;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = detail::get_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("checkpoint truncated in blob name");
    CheckpointBlob blob;
    uint32_t rank = detail::get_u32(in);
    uint64_t n = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      blob.dims.push_back(detail::get_u32(in));
      n *= blob.dims.back();
    }
    blob.values.resize(n);
    for (uint64_t j = 0; j < n; ++j) blob.values[j] = detail::get_f32(in);
    cp[name] = std::move(blob);
  }
  return cp;
}

}  // namespace rqae
