#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "rqae/png.hpp"
#include "rqae/rng.hpp"

using namespace rqae;

namespace {

std::vector<std::uint8_t> random_pixels(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return px;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("png round-trips random images of assorted sizes") {
  for (auto [w, h] : {std::pair<int, int>{1, 1}, {7, 3}, {16, 16}, {224, 224}, {31, 57}}) {
    auto px = random_pixels(w, h, 1000u * static_cast<unsigned>(w) + static_cast<unsigned>(h));
    auto bytes = encode_png_gray8(px.data(), w, h);
    GrayImage back = decode_png_gray8(bytes);
    REQUIRE(back.width == w);
    REQUIRE(back.height == h);
    REQUIRE(back.pixels == px);
  }
}

TEST_CASE("png encoding is deterministic") {
  auto px = random_pixels(64, 64, 7);
  auto a = encode_png_gray8(px.data(), 64, 64);
  auto b = encode_png_gray8(px.data(), 64, 64);
  REQUIRE(a == b);
}

TEST_CASE("png file writer round-trips through disk") {
  auto px = random_pixels(33, 9, 11);
  auto path = temp_file("rqae_png_roundtrip.png");
  write_png_gray8(path.string(), px.data(), 33, 9);
  GrayImage back = read_png_gray8(path.string());
  REQUIRE(back.width == 33);
  REQUIRE(back.height == 9);
  REQUIRE(back.pixels == px);
  std::filesystem::remove(path);
}

TEST_CASE("png signature starts the stream") {
  auto px = random_pixels(4, 4, 3);
  auto bytes = encode_png_gray8(px.data(), 4, 4);
  REQUIRE(bytes.size() >= 8);
  for (std::size_t i = 0; i < 8; ++i) REQUIRE(bytes[i] == detail::kPngSignature[i]);
}

TEST_CASE("corrupted chunk data fails the crc check") {
  auto px = random_pixels(12, 12, 5);
  auto bytes = encode_png_gray8(px.data(), 12, 12);
  // Flip one byte inside the IHDR payload (offset 8 header + 8 chunk head).
  bytes[18] ^= 0x40;
  REQUIRE_THROWS_AS(decode_png_gray8(bytes), DataError);
}

TEST_CASE("truncated stream is rejected") {
  auto px = random_pixels(12, 12, 6);
  auto bytes = encode_png_gray8(px.data(), 12, 12);
  bytes.resize(bytes.size() / 2);
  REQUIRE_THROWS_AS(decode_png_gray8(bytes), DataError);
}

TEST_CASE("non-png bytes are rejected") {
  std::vector<std::uint8_t> junk = {0x42, 0x4d, 0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07};
  REQUIRE_THROWS_AS(decode_png_gray8(junk), DataError);
}

TEST_CASE("other color types are refused as unsupported variants") {
  // Hand-build a PNG whose IHDR declares RGB; the chunks are CRC-valid so
  // rejection must come from the variant check, not the integrity check.
  std::vector<std::uint8_t> bytes(detail::kPngSignature, detail::kPngSignature + 8);
  std::vector<std::uint8_t> ihdr;
  detail::put_be32(ihdr, 2);
  detail::put_be32(ihdr, 2);
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  detail::png_chunk(bytes, "IHDR", ihdr);
  detail::png_chunk(bytes, "IEND", {});
  try {
    decode_png_gray8(bytes);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    REQUIRE(std::string(e.what()).find("unsupported png variant") != std::string::npos);
  }
}

TEST_CASE("missing png file names the path") {
  try {
    read_png_gray8("/nonexistent/rqae_missing.png");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    REQUIRE(std::string(e.what()).find("rqae_missing.png") != std::string::npos);
  }
}
