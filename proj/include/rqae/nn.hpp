#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rqae/common.hpp"
#include "rqae/rng.hpp"

namespace rqae {

namespace nn {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ColMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

inline void check_size(std::size_t got, long long want, const char* what) {
  if (got != static_cast<std::size_t>(want))
    throw ShapeError(std::string(what) + ": buffer holds " + std::to_string(got) +
                     " values but the declared shape needs " + std::to_string(want));
}

// ---- activations ----

template <typename T>
void relu_forward(const std::vector<T>& x, std::vector<T>& y) {
  y.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const std::vector<T>& x, const std::vector<T>& dy, std::vector<T>& dx) {
  if (x.size() != dy.size())
    throw ShapeError("relu backward: input size " + std::to_string(x.size()) +
                     " vs gradient size " + std::to_string(dy.size()));
  dx.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void sigmoid_forward(const std::vector<T>& x, std::vector<T>& y) {
  y.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

// dx from the cached output: s' = s(1-s)
template <typename T>
void sigmoid_backward(const std::vector<T>& y, const std::vector<T>& dy, std::vector<T>& dx) {
  if (y.size() != dy.size())
    throw ShapeError("sigmoid backward: output size " + std::to_string(y.size()) +
                     " vs gradient size " + std::to_string(dy.size()));
  dx.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (T(1) - y[i]);
}

// ---- softmax / cross-entropy ----

template <typename T>
std::vector<T> softmax(const std::vector<T>& logits) {
  T mx = logits[0];
  for (T v : logits) mx = std::max(mx, v);
  std::vector<T> p(logits.size());
  T sum = T(0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (T& v : p) v /= sum;
  return p;
}

template <typename T>
T cross_entropy(const std::vector<T>& probs, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
    throw ShapeError("cross entropy: label " + std::to_string(label) + " outside the " +
                     std::to_string(probs.size()) + "-class output");
  const T floor = T(1e-12);
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], floor));
}

// Gradient of cross_entropy(softmax(logits), label) w.r.t. the logits.
template <typename T>
std::vector<T> softmax_xent_backward(const std::vector<T>& probs, int label) {
  std::vector<T> g = probs;
  g[static_cast<std::size_t>(label)] -= T(1);
  return g;
}

// ---- max pooling (2x2, stride 2, floor) ----

template <typename T>
struct MaxPool2d {
  int C = 0, H = 0, W = 0, OH = 0, OW = 0;
  std::vector<int32_t> argmax;  // input offset per output cell

  std::vector<T> forward(const std::vector<T>& x, int c, int h, int w) {
    C = c;
    H = h;
    W = w;
    check_size(x.size(), static_cast<long long>(C) * H * W, "maxpool input");
    OH = H / 2;
    OW = W / 2;
    std::vector<T> y(static_cast<std::size_t>(C) * OH * OW);
    argmax.resize(y.size());
    for (int ch = 0; ch < C; ++ch) {
      const T* xc = x.data() + static_cast<std::size_t>(ch) * H * W;
      T* yc = y.data() + static_cast<std::size_t>(ch) * OH * OW;
      int32_t* ac = argmax.data() + static_cast<std::size_t>(ch) * OH * OW;
      for (int i = 0; i < OH; ++i)
        for (int j = 0; j < OW; ++j) {
          int bi = 2 * i, bj = 2 * j;
          int32_t best = bi * W + bj;  // ties keep the first cell in scan order
          T bv = xc[best];
          for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj) {
              int32_t off = (bi + di) * W + (bj + dj);
              if (xc[off] > bv) {
                bv = xc[off];
                best = off;
              }
            }
          yc[i * OW + j] = bv;
          ac[i * OW + j] = best;
        }
    }
    return y;
  }

  std::vector<T> backward(const std::vector<T>& dy) const {
    check_size(dy.size(), static_cast<long long>(C) * OH * OW, "maxpool gradient");
    std::vector<T> dx(static_cast<std::size_t>(C) * H * W, T(0));
    for (int ch = 0; ch < C; ++ch) {
      const T* dyc = dy.data() + static_cast<std::size_t>(ch) * OH * OW;
      const int32_t* ac = argmax.data() + static_cast<std::size_t>(ch) * OH * OW;
      T* dxc = dx.data() + static_cast<std::size_t>(ch) * H * W;
      for (int p = 0; p < OH * OW; ++p) dxc[ac[p]] += dyc[p];
    }
    return dx;
  }
};

// ---- nearest-neighbor 2x upsampling ----

template <typename T>
std::vector<T> upsample2_forward(const std::vector<T>& x, int C, int H, int W) {
  check_size(x.size(), static_cast<long long>(C) * H * W, "upsample input");
  std::vector<T> y(static_cast<std::size_t>(C) * (2 * H) * (2 * W));
  for (int c = 0; c < C; ++c) {
    const T* xc = x.data() + static_cast<std::size_t>(c) * H * W;
    T* yc = y.data() + static_cast<std::size_t>(c) * 4 * H * W;
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < W; ++j) {
        T v = xc[i * W + j];
        int r = 2 * i, s = 2 * j, W2 = 2 * W;
        yc[r * W2 + s] = v;
        yc[r * W2 + s + 1] = v;
        yc[(r + 1) * W2 + s] = v;
        yc[(r + 1) * W2 + s + 1] = v;
      }
  }
  return y;
}

template <typename T>
std::vector<T> upsample2_backward(const std::vector<T>& dy, int C, int H, int W) {
  check_size(dy.size(), static_cast<long long>(C) * 4 * H * W, "upsample gradient");
  std::vector<T> dx(static_cast<std::size_t>(C) * H * W);
  for (int c = 0; c < C; ++c) {
    const T* dyc = dy.data() + static_cast<std::size_t>(c) * 4 * H * W;
    T* dxc = dx.data() + static_cast<std::size_t>(c) * H * W;
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < W; ++j) {
        int r = 2 * i, s = 2 * j, W2 = 2 * W;
        dxc[i * W + j] = dyc[r * W2 + s] + dyc[r * W2 + s + 1] + dyc[(r + 1) * W2 + s] +
                         dyc[(r + 1) * W2 + s + 1];
      }
  }
  return dx;
}

// ---- convolution ----

// Square-kernel 2-D convolution over [C,H,W] maps, GEMM-backed: the
// receptive fields are unrolled to a column matrix once per call and
// both passes reduce to matrix products.
template <typename T>
struct Conv2d {
  int in_c = 0, out_c = 0, k = 3, stride = 1, pad = 1;
  std::vector<T> w, b, dw, db;

  // geometry and unrolled input from the last forward, reused by backward
  int H = 0, W = 0, OH = 0, OW = 0;
  std::vector<T> col;

  Conv2d() = default;
  Conv2d(int ic, int oc, int kernel, int s, int p) { configure(ic, oc, kernel, s, p); }

  void configure(int ic, int oc, int kernel, int s, int p) {
    in_c = ic;
    out_c = oc;
    k = kernel;
    stride = s;
    pad = p;
    w.assign(static_cast<std::size_t>(oc) * ic * k * k, T(0));
    b.assign(static_cast<std::size_t>(oc), T(0));
    dw.assign(w.size(), T(0));
    db.assign(b.size(), T(0));
  }

  // He-normal fan-in init, suited to the ReLU blocks either side.
  void init(Rng& rng) {
    double scale = std::sqrt(2.0 / (static_cast<double>(in_c) * k * k));
    for (auto& v : w) v = static_cast<T>(rng.normal() * scale);
    std::fill(b.begin(), b.end(), T(0));
  }

  long long kdim() const { return static_cast<long long>(in_c) * k * k; }

  void unroll(const std::vector<T>& x) {
    const long long K = kdim();
    const long long P = static_cast<long long>(OH) * OW;
    col.assign(static_cast<std::size_t>(K * P), T(0));
    // column-major [K x P]: column p holds the receptive field of output p
    for (long long p = 0; p < P; ++p) {
      const int oi = static_cast<int>(p) / OW;
      const int oj = static_cast<int>(p) % OW;
      T* dst = col.data() + static_cast<std::size_t>(p) * K;
      for (int c = 0; c < in_c; ++c) {
        const T* xc = x.data() + static_cast<std::size_t>(c) * H * W;
        for (int ki = 0; ki < k; ++ki) {
          const int ii = oi * stride - pad + ki;
          T* drow = dst + (static_cast<std::size_t>(c) * k + ki) * k;
          if (ii < 0 || ii >= H) continue;  // zero padding already in place
          for (int kj = 0; kj < k; ++kj) {
            const int jj = oj * stride - pad + kj;
            if (jj >= 0 && jj < W) drow[kj] = xc[ii * W + jj];
          }
        }
      }
    }
  }

  std::vector<T> forward(const std::vector<T>& x, int h, int w_in) {
    H = h;
    W = w_in;
    check_size(x.size(), static_cast<long long>(in_c) * H * W, "conv input");
    OH = (H + 2 * pad - k) / stride + 1;
    OW = (W + 2 * pad - k) / stride + 1;
    if (OH < 1 || OW < 1)
      throw ShapeError("conv input " + std::to_string(H) + "x" + std::to_string(W) +
                       " too small for kernel " + std::to_string(k));
    unroll(x);
    const long long K = kdim();
    const long long P = static_cast<long long>(OH) * OW;
    std::vector<T> y(static_cast<std::size_t>(out_c) * P);
    Eigen::Map<const RowMat<T>> Wm(w.data(), out_c, K);
    Eigen::Map<const ColMat<T>> Cm(col.data(), K, P);
    Eigen::Map<RowMat<T>> Ym(y.data(), out_c, P);
    Ym.noalias() = Wm * Cm;
    for (int oc = 0; oc < out_c; ++oc) {
      T* yc = y.data() + static_cast<std::size_t>(oc) * P;
      for (long long p = 0; p < P; ++p) yc[p] += b[static_cast<std::size_t>(oc)];
    }
    return y;
  }

  // Accumulates into dw/db; returns dx. Relies on the col buffer cached
  // by the immediately preceding forward of the same sample.
  std::vector<T> backward(const std::vector<T>& dy) {
    const long long K = kdim();
    const long long P = static_cast<long long>(OH) * OW;
    check_size(dy.size(), static_cast<long long>(out_c) * P, "conv gradient");
    Eigen::Map<const RowMat<T>> dYm(dy.data(), out_c, P);
    Eigen::Map<const ColMat<T>> Cm(col.data(), K, P);
    Eigen::Map<RowMat<T>> dWm(dw.data(), out_c, K);
    dWm.noalias() += dYm * Cm.transpose();
    for (int oc = 0; oc < out_c; ++oc) {
      T acc = T(0);
      const T* dyc = dy.data() + static_cast<std::size_t>(oc) * P;
      for (long long p = 0; p < P; ++p) acc += dyc[p];
      db[static_cast<std::size_t>(oc)] += acc;
    }

    ColMat<T> dcol(K, P);
    Eigen::Map<const RowMat<T>> Wm(w.data(), out_c, K);
    dcol.noalias() = Wm.transpose() * dYm;

    std::vector<T> dx(static_cast<std::size_t>(in_c) * H * W, T(0));
    for (long long p = 0; p < P; ++p) {
      const int oi = static_cast<int>(p) / OW;
      const int oj = static_cast<int>(p) % OW;
      const T* src = dcol.data() + static_cast<std::size_t>(p) * K;
      for (int c = 0; c < in_c; ++c) {
        T* dxc = dx.data() + static_cast<std::size_t>(c) * H * W;
        for (int ki = 0; ki < k; ++ki) {
          const int ii = oi * stride - pad + ki;
          if (ii < 0 || ii >= H) continue;
          const T* srow = src + (static_cast<std::size_t>(c) * k + ki) * k;
          for (int kj = 0; kj < k; ++kj) {
            const int jj = oj * stride - pad + kj;
            if (jj >= 0 && jj < W) dxc[ii * W + jj] += srow[kj];
          }
        }
      }
    }
    return dx;
  }

  void zero_grad() {
    std::fill(dw.begin(), dw.end(), T(0));
    std::fill(db.begin(), db.end(), T(0));
  }
};

// ---- fully connected ----

template <typename T>
struct Dense {
  int in_n = 0, out_n = 0;
  std::vector<T> w, b, dw, db;  // w row-major [out][in]

  Dense() = default;
  Dense(int in_dim, int out_dim) { configure(in_dim, out_dim); }

  void configure(int in_dim, int out_dim) {
    in_n = in_dim;
    out_n = out_dim;
    w.assign(static_cast<std::size_t>(out_n) * in_n, T(0));
    b.assign(static_cast<std::size_t>(out_n), T(0));
    dw.assign(w.size(), T(0));
    db.assign(b.size(), T(0));
  }

  void init(Rng& rng) {
    double scale = std::sqrt(2.0 / static_cast<double>(in_n));
    for (auto& v : w) v = static_cast<T>(rng.normal() * scale);
    std::fill(b.begin(), b.end(), T(0));
  }

  std::vector<T> forward(const std::vector<T>& x) const {
    check_size(x.size(), in_n, "dense input");
    std::vector<T> y(static_cast<std::size_t>(out_n));
    Eigen::Map<const RowMat<T>> Wm(w.data(), out_n, in_n);
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> Xv(x.data(), in_n);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> Yv(y.data(), out_n);
    Yv.noalias() = Wm * Xv;
    for (int i = 0; i < out_n; ++i) y[static_cast<std::size_t>(i)] += b[static_cast<std::size_t>(i)];
    return y;
  }

  std::vector<T> backward(const std::vector<T>& x, const std::vector<T>& dy) {
    check_size(dy.size(), out_n, "dense gradient");
    Eigen::Map<RowMat<T>> dWm(dw.data(), out_n, in_n);
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> Xv(x.data(), in_n);
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> dYv(dy.data(), out_n);
    dWm.noalias() += dYv * Xv.transpose();
    for (int i = 0; i < out_n; ++i) db[static_cast<std::size_t>(i)] += dy[static_cast<std::size_t>(i)];
    std::vector<T> dx(static_cast<std::size_t>(in_n));
    Eigen::Map<const RowMat<T>> Wm(w.data(), out_n, in_n);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> dXv(dx.data(), in_n);
    dXv.noalias() = Wm.transpose() * dYv;
    return dx;
  }

  void zero_grad() {
    std::fill(dw.begin(), dw.end(), T(0));
    std::fill(db.begin(), db.end(), T(0));
  }
};

}  // namespace nn

}  // namespace rqae
