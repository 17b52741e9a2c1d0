#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rqae/common.hpp"

namespace rqae {

namespace nn {

// One optimizer slot per registered parameter buffer. Parameters are
// registered once, in a fixed order, so updates are deterministic.
template <typename T>
struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;

  struct Slot {
    std::vector<T>* w;
    std::vector<T>* g;
    std::vector<double> m, v;
  };
  std::vector<Slot> slots;

  void add(std::vector<T>& w, std::vector<T>& g) {
    if (w.size() != g.size()) throw ShapeError("adam: parameter and gradient sizes differ");
    slots.push_back({&w, &g, std::vector<double>(w.size(), 0.0), std::vector<double>(w.size(), 0.0)});
  }

  void step() {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (auto& s : slots) {
      std::vector<T>& w = *s.w;
      std::vector<T>& g = *s.g;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = static_cast<double>(g[i]);
        s.m[i] = beta1 * s.m[i] + (1.0 - beta1) * gi;
        s.v[i] = beta2 * s.v[i] + (1.0 - beta2) * gi * gi;
        const double mhat = s.m[i] / bc1;
        const double vhat = s.v[i] / bc2;
        w[i] = static_cast<T>(static_cast<double>(w[i]) - lr * mhat / (std::sqrt(vhat) + eps));
      }
    }
  }
};

}  // namespace nn

}  // namespace rqae
