#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "rqae/common.hpp"
#include "rqae/nn.hpp"

namespace rqae {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;  // for unit dynamic range
inline constexpr double kSsimC2 = 0.03 * 0.03;

template <typename T>
const std::array<T, kSsimWindow>& gaussian_taps() {
  static const std::array<T, kSsimWindow> taps = [] {
    std::array<T, kSsimWindow> g{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
      double d = i - (kSsimWindow - 1) / 2.0;
      double v = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
      g[static_cast<std::size_t>(i)] = static_cast<T>(v);
      sum += v;
    }
    for (auto& v : g) v = static_cast<T>(static_cast<double>(v) / sum);
    return g;
  }();
  return taps;
}

namespace detail {

// Valid-mode separable Gaussian filter: [H,W] -> [H-10, W-10].
template <typename T>
void ssim_filter(const T* src, int H, int W, std::vector<T>& tmp, std::vector<T>& out) {
  const auto& g = gaussian_taps<T>();
  const int OW = W - kSsimWindow + 1;
  const int OH = H - kSsimWindow + 1;
  tmp.assign(static_cast<std::size_t>(H) * OW, T(0));
  for (int i = 0; i < H; ++i) {
    const T* row = src + static_cast<std::size_t>(i) * W;
    T* trow = tmp.data() + static_cast<std::size_t>(i) * OW;
    for (int j = 0; j < OW; ++j) {
      T acc = T(0);
      for (int t = 0; t < kSsimWindow; ++t) acc += g[static_cast<std::size_t>(t)] * row[j + t];
      trow[j] = acc;
    }
  }
  out.assign(static_cast<std::size_t>(OH) * OW, T(0));
  for (int i = 0; i < OH; ++i) {
    T* orow = out.data() + static_cast<std::size_t>(i) * OW;
    for (int t = 0; t < kSsimWindow; ++t) {
      const T gt = gaussian_taps<T>()[static_cast<std::size_t>(t)];
      const T* trow = tmp.data() + static_cast<std::size_t>(i + t) * OW;
      for (int j = 0; j < OW; ++j) orow[j] += gt * trow[j];
    }
  }
}

// Adjoint of the valid filter: scatters a [OH,OW] field back onto the
// [H,W] grid through the same separable taps.
template <typename T>
void ssim_scatter(const T* field, int H, int W, std::vector<T>& tmp, T* out) {
  const auto& g = gaussian_taps<T>();
  const int OW = W - kSsimWindow + 1;
  const int OH = H - kSsimWindow + 1;
  tmp.assign(static_cast<std::size_t>(OH) * W, T(0));
  for (int i = 0; i < OH; ++i) {
    const T* frow = field + static_cast<std::size_t>(i) * OW;
    T* trow = tmp.data() + static_cast<std::size_t>(i) * W;
    for (int j = 0; j < OW; ++j) {
      const T fv = frow[j];
      for (int t = 0; t < kSsimWindow; ++t) trow[j + t] += fv * g[static_cast<std::size_t>(t)];
    }
  }
  for (int i = 0; i < OH; ++i) {
    const T* trow = tmp.data() + static_cast<std::size_t>(i) * W;
    for (int t = 0; t < kSsimWindow; ++t) {
      const T gt = g[static_cast<std::size_t>(t)];
      T* orow = out + static_cast<std::size_t>(i + t) * W;
      for (int j = 0; j < W; ++j) orow[j] += gt * trow[j];
    }
  }
}

}  // namespace detail

// Mean SSIM over sliding Gaussian windows, averaged across channels.
// When grad_y is non-null it receives d(mssim)/dy.
template <typename T>
T mssim_impl(const std::vector<T>& x, const std::vector<T>& y, int C, int H, int W,
             std::vector<T>* grad_y) {
  if (x.size() != y.size())
    throw ShapeError("mssim: inputs hold " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()) + " values");
  nn::check_size(x.size(), static_cast<long long>(C) * H * W, "mssim input");
  if (H < kSsimWindow || W < kSsimWindow)
    throw ShapeError("mssim needs images of at least " + std::to_string(kSsimWindow) + "x" +
                     std::to_string(kSsimWindow) + ", got " + std::to_string(H) + "x" +
                     std::to_string(W));
  const int OH = H - kSsimWindow + 1;
  const int OW = W - kSsimWindow + 1;
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  const std::size_t wcells = static_cast<std::size_t>(OH) * OW;
  const T c1 = static_cast<T>(kSsimC1);
  const T c2 = static_cast<T>(kSsimC2);
  const T norm = T(1) / (static_cast<T>(wcells) * static_cast<T>(C));

  if (grad_y) grad_y->assign(x.size(), T(0));

  std::vector<T> tmp, mx, my, fxx, fyy, fxy, buf;
  std::vector<T> c_mu, c_sxy, c_sxy_mx, c_syy, c_syy_my;
  T total = T(0);

  for (int ch = 0; ch < C; ++ch) {
    const T* xc = x.data() + static_cast<std::size_t>(ch) * plane;
    const T* yc = y.data() + static_cast<std::size_t>(ch) * plane;
    detail::ssim_filter(xc, H, W, tmp, mx);
    detail::ssim_filter(yc, H, W, tmp, my);
    buf.resize(plane);
    for (std::size_t i = 0; i < plane; ++i) buf[i] = xc[i] * xc[i];
    detail::ssim_filter(buf.data(), H, W, tmp, fxx);
    for (std::size_t i = 0; i < plane; ++i) buf[i] = yc[i] * yc[i];
    detail::ssim_filter(buf.data(), H, W, tmp, fyy);
    for (std::size_t i = 0; i < plane; ++i) buf[i] = xc[i] * yc[i];
    detail::ssim_filter(buf.data(), H, W, tmp, fxy);

    if (grad_y) {
      c_mu.assign(wcells, T(0));
      c_sxy.assign(wcells, T(0));
      c_sxy_mx.assign(wcells, T(0));
      c_syy.assign(wcells, T(0));
      c_syy_my.assign(wcells, T(0));
    }

    for (std::size_t p = 0; p < wcells; ++p) {
      const T ux = mx[p], uy = my[p];
      const T sxx = fxx[p] - ux * ux;
      const T syy = fyy[p] - uy * uy;
      const T sxy = fxy[p] - ux * uy;
      const T a1 = T(2) * ux * uy + c1;
      const T a2 = T(2) * sxy + c2;
      const T b1 = ux * ux + uy * uy + c1;
      const T b2 = sxx + syy + c2;
      const T denom = b1 * b2;
      const T s = (a1 * a2) / denom;
      total += s;

      if (grad_y) {
        const T inv = T(1) / denom;
        const T dA1 = a2 * inv;
        const T dA2 = a1 * inv;
        const T dB1 = -s / b1;
        const T dB2 = -s / b2;
        c_mu[p] = norm * (dA1 * T(2) * ux + dB1 * T(2) * uy);
        const T csxy = norm * dA2 * T(2);
        c_sxy[p] = csxy;
        c_sxy_mx[p] = csxy * ux;
        const T csyy = norm * dB2;
        c_syy[p] = csyy;
        c_syy_my[p] = csyy * uy;
      }
    }

    if (grad_y) {
      // dy = G*(c_mu) + x .* G*(c_sxy) - G*(c_sxy*mu_x)
      //      + 2 y .* G*(c_syy) - 2 G*(c_syy*mu_y), scattered full-size
      std::vector<T> s_mu(plane, T(0)), s_sxy(plane, T(0)), s_sxy_mx(plane, T(0)),
          s_syy(plane, T(0)), s_syy_my(plane, T(0));
      detail::ssim_scatter(c_mu.data(), H, W, tmp, s_mu.data());
      detail::ssim_scatter(c_sxy.data(), H, W, tmp, s_sxy.data());
      detail::ssim_scatter(c_sxy_mx.data(), H, W, tmp, s_sxy_mx.data());
      detail::ssim_scatter(c_syy.data(), H, W, tmp, s_syy.data());
      detail::ssim_scatter(c_syy_my.data(), H, W, tmp, s_syy_my.data());
      T* g = grad_y->data() + static_cast<std::size_t>(ch) * plane;
      for (std::size_t i = 0; i < plane; ++i)
        g[i] = s_mu[i] + xc[i] * s_sxy[i] - s_sxy_mx[i] +
               T(2) * yc[i] * s_syy[i] - T(2) * s_syy_my[i];
    }
  }
  return total * norm;
}

template <typename T>
T mssim(const std::vector<T>& x, const std::vector<T>& y, int C, int H, int W) {
  return mssim_impl<T>(x, y, C, H, W, nullptr);
}

// Reconstruction objective: mean absolute error plus structural loss.
template <typename T>
T ae_loss(const std::vector<T>& x, const std::vector<T>& y, int C, int H, int W) {
  if (x.size() != y.size())
    throw ShapeError("ae_loss: inputs hold " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()) + " values");
  T mae = T(0);
  for (std::size_t i = 0; i < x.size(); ++i) mae += std::abs(x[i] - y[i]);
  mae /= static_cast<T>(x.size());
  return mae + (T(1) - mssim(x, y, C, H, W));
}

// Same objective with d(loss)/dy in grad_y.
template <typename T>
T ae_loss_with_grad(const std::vector<T>& x, const std::vector<T>& y, int C, int H, int W,
                    std::vector<T>& grad_y) {
  if (x.size() != y.size())
    throw ShapeError("ae_loss: inputs hold " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()) + " values");
  T sim = mssim_impl(x, y, C, H, W, &grad_y);
  const T invn = T(1) / static_cast<T>(x.size());
  T mae = T(0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    T d = y[i] - x[i];
    mae += std::abs(d);
    T sign = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
    grad_y[i] = sign * invn - grad_y[i];  // loss has -mssim, so the sim grad flips
  }
  mae *= invn;
  return mae + (T(1) - sim);
}

}  // namespace rqae
