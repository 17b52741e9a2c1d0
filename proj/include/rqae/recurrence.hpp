#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rqae/common.hpp"

namespace rqae {

// PTB lead order; every subject tensor stacks channels this way.
inline const std::array<std::string, 15>& canonical_channel_order() {
  static const std::array<std::string, 15> order = {
      "i", "ii", "iii", "avr", "avl", "avf",
      "v1", "v2", "v3", "v4", "v5", "v6",
      "vx", "vy", "vz"};
  return order;
}

// Index of a lead label in the canonical order, case-insensitive; -1 when
// the label is not a PTB lead.
inline int canonical_channel_index(const std::string& label) {
  std::string low;
  for (char c : label) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  const auto& order = canonical_channel_order();
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == low) return static_cast<int>(i);
  return -1;
}

// Pairwise Euclidean distances between state vectors. The subtraction
// happens before squaring: the dot-product shortcut loses the tiny
// distances between near-identical states to cancellation.
inline Mat distance_matrix(const Mat& states, int n_threads = 0) {
  const long long k = states.rows;
  const long long m = states.cols;
  if (k < 2) throw ShapeError("distance matrix needs at least 2 state vectors");
  Mat d(k, k);
  if (n_threads <= 0) n_threads = default_threads();
  parallel_for(static_cast<std::size_t>(k), static_cast<std::size_t>(n_threads), [&](std::size_t iu) {
    const long long i = static_cast<long long>(iu);
    d(i, i) = 0.0;
    for (long long j = i + 1; j < k; ++j) {
      double acc = 0.0;
      for (long long c = 0; c < m; ++c) {
        double diff = states(i, c) - states(j, c);
        acc += diff * diff;
      }
      double dist = std::sqrt(acc);
      d(i, j) = dist;
      d(j, i) = dist;
    }
  });
  return d;
}

struct BinaryRecurrencePlot {
  long long n = 0;
  double epsilon = 0.0;
  std::vector<uint8_t> bits;  // row-major, 1 = recurrent

  uint8_t operator()(long long i, long long j) const {
    return bits[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
  }
};

// Heaviside thresholding with the theta(0)=1 convention: distance equal
// to epsilon counts as recurrent, which keeps the recurrence rate
// right-continuous in epsilon.
inline BinaryRecurrencePlot threshold(const Mat& dm, double epsilon) {
  if (epsilon < 0.0) throw ConfigError("recurrence threshold must be non-negative");
  if (dm.rows != dm.cols) throw ShapeError("distance matrix must be square");
  BinaryRecurrencePlot rp;
  rp.n = dm.rows;
  rp.epsilon = epsilon;
  rp.bits.resize(static_cast<std::size_t>(rp.n) * static_cast<std::size_t>(rp.n));
  for (std::size_t i = 0; i < rp.bits.size(); ++i)
    rp.bits[i] = dm.v[i] <= epsilon ? 1 : 0;
  return rp;
}

struct EpsilonChoice {
  double epsilon = 0.0;
  bool degenerate = false;  // all off-diagonal distances equal
};

// Off-diagonal distance quantile, so thresholding lands near the wanted
// recurrence rate by construction.
inline EpsilonChoice epsilon_for_target_rr(const Mat& dm, double target_rr) {
  if (!(target_rr > 0.0 && target_rr < 1.0)) throw ConfigError("target recurrence rate must lie in (0,1)");
  if (dm.rows != dm.cols || dm.rows < 2) throw ShapeError("distance matrix must be square with k >= 2");
  const long long k = dm.rows;
  std::vector<double> off;
  off.reserve(static_cast<std::size_t>(k) * (k - 1) / 2);
  for (long long i = 0; i < k; ++i)
    for (long long j = i + 1; j < k; ++j) off.push_back(dm(i, j));
  std::sort(off.begin(), off.end());
  std::size_t idx = static_cast<std::size_t>(
      std::ceil(target_rr * static_cast<double>(off.size()))) - 1;
  idx = std::min(idx, off.size() - 1);
  EpsilonChoice out;
  out.epsilon = off[idx];
  out.degenerate = off.front() == off.back();
  return out;
}

// Bilinear resample with corner alignment: output corners sample input
// corners exactly, so a native-size resize is the identity map.
inline Mat resize_bilinear(const Mat& src, long long out_h, long long out_w) {
  if (src.rows < 1 || src.cols < 1) throw ShapeError("cannot resize an empty matrix");
  if (out_h < 1 || out_w < 1) throw ConfigError("resize target must be positive");
  Mat dst(out_h, out_w);
  const double sr = out_h > 1 ? static_cast<double>(src.rows - 1) / static_cast<double>(out_h - 1) : 0.0;
  const double sc = out_w > 1 ? static_cast<double>(src.cols - 1) / static_cast<double>(out_w - 1) : 0.0;
  for (long long r = 0; r < out_h; ++r) {
    double fy = r * sr;
    long long y0 = static_cast<long long>(fy);
    long long y1 = std::min(y0 + 1, src.rows - 1);
    double wy = fy - y0;
    for (long long c = 0; c < out_w; ++c) {
      double fx = c * sc;
      long long x0 = static_cast<long long>(fx);
      long long x1 = std::min(x0 + 1, src.cols - 1);
      double wx = fx - x0;
      dst(r, c) = (1.0 - wy) * ((1.0 - wx) * src(y0, x0) + wx * src(y0, x1)) +
                  wy * ((1.0 - wx) * src(y1, x0) + wx * src(y1, x1));
    }
  }
  return dst;
}

struct RecurrenceImage {
  int size = 0;
  int channel_index = -1;
  long long source_k = 0;
  bool constant_input = false;  // constant surface renders as mid-gray
  std::vector<uint8_t> pixels;  // row-major size*size
};

// Distance surface -> uniform grayscale image: bilinear resize, then
// min-max to the full 8-bit range. A constant surface carries no
// geometry, so it maps to mid-gray with a warning flag.
inline RecurrenceImage resize_to_image(const Mat& dm, int size = 224, int channel_index = -1) {
  if (dm.rows != dm.cols || dm.rows < 2) throw ShapeError("distance matrix must be square with k >= 2");
  if (size < 2) throw ConfigError("image size must be at least 2");
  RecurrenceImage img;
  img.size = size;
  img.channel_index = channel_index;
  img.source_k = dm.rows;
  img.pixels.assign(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0);

  auto [lo_it, hi_it] = std::minmax_element(dm.v.begin(), dm.v.end());
  if (*hi_it - *lo_it <= 0.0) {
    img.constant_input = true;
    std::fill(img.pixels.begin(), img.pixels.end(), static_cast<uint8_t>(128));
    return img;
  }

  Mat surf = resize_bilinear(dm, size, size);
  auto [slo_it, shi_it] = std::minmax_element(surf.v.begin(), surf.v.end());
  const double lo = *slo_it;
  const double span = *shi_it - lo;
  for (std::size_t i = 0; i < surf.v.size(); ++i)
    img.pixels[i] = static_cast<uint8_t>(std::lround((surf.v[i] - lo) / span * 255.0));
  return img;
}

struct SubjectTensor {
  int n_channels = 0;
  int size = 0;
  std::vector<uint8_t> pixels;  // channel-major: [channel][row][col]

  const uint8_t* channel(int c) const {
    return pixels.data() + static_cast<std::size_t>(c) * size * size;
  }
};

// Stacks per-channel images into one subject tensor, ordering by
// channel_index so shuffled input still lands canonically.
inline SubjectTensor stack_subject(const std::vector<RecurrenceImage>& images,
                                   int expected_channels = 15) {
  if (static_cast<int>(images.size()) != expected_channels)
    throw DataError("subject stack needs exactly " + std::to_string(expected_channels) +
                    " channel images, got " + std::to_string(images.size()));
  const int size = images.front().size;
  std::vector<const RecurrenceImage*> slot(static_cast<std::size_t>(expected_channels), nullptr);
  for (const auto& img : images) {
    if (img.size != size) throw DataError("channel images disagree on size");
    if (img.channel_index < 0 || img.channel_index >= expected_channels)
      throw DataError("channel index " + std::to_string(img.channel_index) + " outside 0.." +
                      std::to_string(expected_channels - 1));
    if (slot[static_cast<std::size_t>(img.channel_index)] != nullptr)
      throw DataError("duplicate channel index " + std::to_string(img.channel_index));
    slot[static_cast<std::size_t>(img.channel_index)] = &img;
  }
  SubjectTensor t;
  t.n_channels = expected_channels;
  t.size = size;
  t.pixels.reserve(static_cast<std::size_t>(expected_channels) * size * size);
  for (const RecurrenceImage* img : slot)
    t.pixels.insert(t.pixels.end(), img->pixels.begin(), img->pixels.end());
  return t;
}

}  // namespace rqae
