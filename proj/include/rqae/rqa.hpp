#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rqae/common.hpp"
#include "rqae/recurrence.hpp"

namespace rqae {

struct LineHistograms {
  std::map<long long, long long> diagonal;  // maximal-run length -> count
  std::map<long long, long long> vertical;
  int l_min = 2;
  int v_min = 2;
  bool loi_excluded = false;
  long long n = 0;
  long long on_bits = 0;     // recurrent cells after the identity-line rule
  long long considered = 0;  // n*n, minus the identity line when excluded
};

// Run-length histograms over every diagonal and every column. With
// exclude_loi the identity line is treated as non-recurrent throughout:
// its cells break runs and drop out of the bit count.
inline LineHistograms line_histograms(const BinaryRecurrencePlot& rp, int l_min = 2,
                                      int v_min = 2, bool exclude_loi = false) {
  const long long n = rp.n;
  if (n < 1) throw DataError("recurrence plot is empty");
  if (l_min < 1 || v_min < 1) throw ConfigError("minimum line lengths must be >= 1");
  LineHistograms h;
  h.l_min = l_min;
  h.v_min = v_min;
  h.loi_excluded = exclude_loi;
  h.n = n;
  h.considered = n * n - (exclude_loi ? n : 0);

  auto recur = [&](long long i, long long j) -> bool {
    if (exclude_loi && i == j) return false;
    return rp(i, j) != 0;
  };

  for (long long d = -(n - 1); d <= n - 1; ++d) {
    long long i = d < 0 ? -d : 0;
    long long j = d < 0 ? 0 : d;
    long long run = 0;
    for (; i < n && j < n; ++i, ++j) {
      if (recur(i, j)) {
        ++run;
        ++h.on_bits;
      } else if (run > 0) {
        ++h.diagonal[run];
        run = 0;
      }
    }
    if (run > 0) ++h.diagonal[run];
  }

  for (long long j = 0; j < n; ++j) {
    long long run = 0;
    for (long long i = 0; i < n; ++i) {
      if (recur(i, j)) {
        ++run;
      } else if (run > 0) {
        ++h.vertical[run];
        run = 0;
      }
    }
    if (run > 0) ++h.vertical[run];
  }
  return h;
}

// The ten recurrence features. Degenerate cases (no qualifying lines, an
// empty plot) turn the matching validity flag off instead of producing a
// sentinel value.
struct RqaFeatures {
  double rr = 0.0;        // F1 recurrence rate
  double det = 0.0;       // F2 determinism
  double avg_diag = 0.0;  // F3 mean diagonal line length
  double lmax = 0.0;      // F4 longest diagonal line
  double entropy = 0.0;   // F5 entropy of diagonal line lengths
  double lam = 0.0;       // F6 laminarity
  double tt = 0.0;        // F7 trapping time
  double vmax = 0.0;      // F8 longest vertical line
  double div = 0.0;       // F9 1/lmax
  double ratio = 0.0;     // F10 det/rr
  std::array<bool, 10> valid{};

  std::array<double, 10> values() const {
    return {rr, det, avg_diag, lmax, entropy, lam, tt, vmax, div, ratio};
  }
  static const std::array<std::string, 10>& names() {
    static const std::array<std::string, 10> n = {
        "rr", "det", "avg_diag", "lmax", "entropy", "lam", "tt", "vmax", "div", "ratio"};
    return n;
  }
  std::string flag_string() const {
    std::string s;
    for (bool b : valid) s.push_back(b ? '1' : '0');
    return s;
  }
};

inline RqaFeatures rqa_features(const LineHistograms& h) {
  RqaFeatures f;
  const long long lmin = h.l_min;
  const long long vmin = h.v_min;

  long long diag_all = 0;      // sum of len * P(len) over all lengths
  long long diag_sel = 0;      // same, len >= l_min
  long long diag_sel_cnt = 0;  // number of lines with len >= l_min
  long long lmax = 0;
  for (const auto& [len, cnt] : h.diagonal) {
    diag_all += len * cnt;
    if (len >= lmin) {
      diag_sel += len * cnt;
      diag_sel_cnt += cnt;
      lmax = std::max(lmax, len);
    }
  }
  long long vert_all = 0, vert_sel = 0, vert_sel_cnt = 0, vmax = 0;
  for (const auto& [len, cnt] : h.vertical) {
    vert_all += len * cnt;
    if (len >= vmin) {
      vert_sel += len * cnt;
      vert_sel_cnt += cnt;
      vmax = std::max(vmax, len);
    }
  }

  if (h.considered > 0) {
    f.rr = static_cast<double>(h.on_bits) / static_cast<double>(h.considered);
    f.valid[0] = true;
  }
  if (diag_all > 0) {
    f.det = static_cast<double>(diag_sel) / static_cast<double>(diag_all);
    f.valid[1] = true;
  }
  if (diag_sel_cnt > 0) {
    f.avg_diag = static_cast<double>(diag_sel) / static_cast<double>(diag_sel_cnt);
    f.valid[2] = true;
    f.lmax = static_cast<double>(lmax);
    f.valid[3] = true;
    double ent = 0.0;
    for (const auto& [len, cnt] : h.diagonal) {
      if (len < lmin || cnt == 0) continue;
      double p = static_cast<double>(cnt) / static_cast<double>(diag_sel_cnt);
      ent -= p * std::log(p);
    }
    f.entropy = std::max(ent, 0.0);
    f.valid[4] = true;
    f.div = 1.0 / static_cast<double>(lmax);
    f.valid[8] = true;
  }
  if (vert_all > 0) {
    f.lam = static_cast<double>(vert_sel) / static_cast<double>(vert_all);
    f.valid[5] = true;
  }
  if (vert_sel_cnt > 0) {
    f.tt = static_cast<double>(vert_sel) / static_cast<double>(vert_sel_cnt);
    f.valid[6] = true;
    f.vmax = static_cast<double>(vmax);
    f.valid[7] = true;
  }
  if (f.valid[1] && f.valid[0] && f.rr > 0.0) {
    f.ratio = f.det / f.rr;
    f.valid[9] = true;
  }
  return f;
}

inline RqaFeatures rqa_features(const BinaryRecurrencePlot& rp, int l_min = 2, int v_min = 2,
                                bool exclude_loi = false) {
  return rqa_features(line_histograms(rp, l_min, v_min, exclude_loi));
}

struct LatentBinarization {
  bool use_epsilon = false;
  double epsilon = 0.0;     // on the min-max normalized [0,1] scale
  double target_rr = 0.15;  // all-cells quantile rule otherwise
};

// Latent 14x14 maps are not distance matrices: no identity line exists,
// so the full matrix participates. The surface is min-max normalized,
// binarized (value <= epsilon recurrent), then scanned like any plot.
inline RqaFeatures latent_rqa(const Mat& surface, const LatentBinarization& rule = {},
                              int l_min = 2, int v_min = 2) {
  if (surface.rows != surface.cols || surface.rows < 2)
    throw ShapeError("latent surface must be square with k >= 2");
  for (double v : surface.v)
    if (!std::isfinite(v)) throw DataError("latent surface holds non-finite values");

  auto [lo_it, hi_it] = std::minmax_element(surface.v.begin(), surface.v.end());
  const double lo = *lo_it, span = *hi_it - *lo_it;
  if (span <= 0.0) {
    RqaFeatures degenerate;  // constant surface: nothing to measure
    return degenerate;
  }
  Mat norm(surface.rows, surface.cols);
  for (std::size_t i = 0; i < surface.v.size(); ++i) norm.v[i] = (surface.v[i] - lo) / span;

  double eps;
  if (rule.use_epsilon) {
    if (rule.epsilon < 0.0) throw ConfigError("latent threshold must be non-negative");
    eps = rule.epsilon;
  } else {
    if (!(rule.target_rr > 0.0 && rule.target_rr < 1.0))
      throw ConfigError("latent target recurrence rate must lie in (0,1)");
    std::vector<double> cells = norm.v;
    std::sort(cells.begin(), cells.end());
    std::size_t idx = static_cast<std::size_t>(
        std::ceil(rule.target_rr * static_cast<double>(cells.size()))) - 1;
    eps = cells[std::min(idx, cells.size() - 1)];
  }
  return rqa_features(threshold(norm, eps), l_min, v_min, /*exclude_loi=*/false);
}

}  // namespace rqae
