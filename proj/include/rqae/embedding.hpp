#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rqae/common.hpp"

namespace rqae {

// Histogram mutual information (nats) between x[t] and x[t+lag].
// Bin edges span the global range of x so every lag shares one grid.
inline double average_mutual_information(const std::vector<double>& x, int lag, int bins = 16) {
  const long long n = static_cast<long long>(x.size());
  if (lag < 0 || lag >= n) throw ConfigError("AMI lag out of range");
  const long long m = n - lag;
  if (m < 2) throw DataError("too few samples for AMI");
  auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  const double span = hi - lo;
  if (span <= 0.0) return 0.0;  // constant signal carries no information

  auto bin_of = [&](double v) {
    int b = static_cast<int>((v - lo) / span * bins);
    return std::min(b, bins - 1);
  };
  std::vector<long long> joint(static_cast<std::size_t>(bins) * bins, 0);
  std::vector<long long> px(bins, 0), py(bins, 0);
  for (long long t = 0; t < m; ++t) {
    int a = bin_of(x[static_cast<std::size_t>(t)]);
    int b = bin_of(x[static_cast<std::size_t>(t + lag)]);
    ++joint[static_cast<std::size_t>(a) * bins + b];
    ++px[a];
    ++py[b];
  }
  double mi = 0.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (int a = 0; a < bins; ++a) {
    if (px[a] == 0) continue;
    for (int b = 0; b < bins; ++b) {
      long long c = joint[static_cast<std::size_t>(a) * bins + b];
      if (c == 0 || py[b] == 0) continue;
      double pj = c * inv_m;
      mi += pj * std::log(pj / (px[a] * inv_m * (py[b] * inv_m)));
    }
  }
  return std::max(mi, 0.0);
}

// Time delay from the first local minimum of the AMI curve. A flat curve
// (range under 5% of the self-information) means the series is already
// decorrelated, so the delay is 1. If no local minimum exists the first
// zero crossing of the autocorrelation stands in, then 1.
inline int select_delay(const std::vector<double>& x, int max_lag = 0, int bins = 16) {
  const long long n = static_cast<long long>(x.size());
  if (n < 8) throw DataError("too few samples to select a delay");
  auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  if (*hi_it - *lo_it <= 0.0) throw DataError("constant signal: no delay structure to select from");
  if (max_lag <= 0) {
    max_lag = static_cast<int>(std::min<long long>((n - 1) / 4, 200));
  } else if (n <= 4LL * max_lag) {
    throw ConfigError("select_delay needs more than 4*max_lag samples");
  }

  std::vector<double> ami(static_cast<std::size_t>(max_lag) + 1);
  for (int L = 0; L <= max_lag; ++L) ami[static_cast<std::size_t>(L)] = average_mutual_information(x, L, bins);
  const double i0 = ami[0];
  auto [mn_it, mx_it] = std::minmax_element(ami.begin() + 1, ami.end());
  const double range = *mx_it - *mn_it;
  if (i0 > 0.0 && range < 0.05 * i0) return 1;

  // The histogram estimate is jagged, so two defenses guard the minimum
  // scan: a short moving average over lags >= 1 (lag 0 is an outlier by
  // construction), and a rise threshold of 2% of the curve's range before
  // a running minimum counts as the first true minimum.
  std::vector<double> smooth(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int L = 1; L <= max_lag; ++L) {
    int lo = std::max(1, L - 2), hi = std::min(max_lag, L + 2);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += ami[static_cast<std::size_t>(j)];
    smooth[static_cast<std::size_t>(L)] = acc / (hi - lo + 1);
  }
  {
    double best = smooth[1];
    int best_lag = 1;
    for (int L = 2; L <= max_lag; ++L) {
      double cur = smooth[static_cast<std::size_t>(L)];
      if (cur < best) {
        best = cur;
        best_lag = L;
      } else if (cur > best + 0.02 * range) {
        return best_lag;
      }
    }
  }

  // autocorrelation zero crossing
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (denom > 0.0) {
    for (int L = 1; L <= max_lag; ++L) {
      double acc = 0.0;
      for (long long t = 0; t + L < n; ++t)
        acc += (x[static_cast<std::size_t>(t)] - mean) * (x[static_cast<std::size_t>(t + L)] - mean);
      if (acc / denom <= 0.0) return L;
    }
  }
  return 1;
}

// Delay embedding: row i is (x[i], x[i+tau], ..., x[i+(m-1)tau]),
// giving n-(m-1)*tau rows.
inline Mat embed(const std::vector<double>& x, int m, int tau) {
  if (m < 1 || tau < 1) throw ConfigError("embedding needs m >= 1 and tau >= 1");
  const long long n = static_cast<long long>(x.size());
  const long long k = n - static_cast<long long>(m - 1) * tau;
  if (k < 2) throw DataError("signal too short for embedding (m=" + std::to_string(m) +
                             ", tau=" + std::to_string(tau) + ", n=" + std::to_string(n) + ")");
  Mat y(k, m);
  for (long long i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j)
      y(i, j) = x[static_cast<std::size_t>(i + static_cast<long long>(j) * tau)];
  return y;
}

struct CaoResult {
  std::vector<double> e1;  // e1[d-1] compares dimensions d+1 and d
  std::vector<double> e2;  // near 1 everywhere for stochastic series
  int dimension = 0;
};

// Minimum embedding dimension by the nearest-neighbor expansion ratio:
// the first d where E1(d) settles within 5% of 1 gives m = d+1, capped
// at m_max when no plateau appears.
inline CaoResult cao_dimension(const std::vector<double>& x, int tau, int m_max = 10) {
  if (tau < 1) throw ConfigError("cao_dimension needs tau >= 1");
  if (m_max < 2) throw ConfigError("cao_dimension needs m_max >= 2");
  const long long n = static_cast<long long>(x.size());
  // E(d) uses embeddings of dimension d and d+1, so points must extend d*tau ahead
  std::vector<double> e(static_cast<std::size_t>(m_max) + 1, 0.0);
  std::vector<double> estar(static_cast<std::size_t>(m_max) + 1, 0.0);

  for (int d = 1; d <= m_max; ++d) {
    const long long np = n - static_cast<long long>(d) * tau;
    if (np < 10) throw DataError("signal too short for dimension scan up to " + std::to_string(m_max));
    double acc = 0.0, acc_star = 0.0;
    long long used = 0;
    for (long long i = 0; i < np; ++i) {
      // nearest neighbor of point i under the max norm in d dimensions
      double best = std::numeric_limits<double>::infinity();
      long long bj = -1;
      for (long long j = 0; j < np; ++j) {
        if (j == i) continue;
        double dist = 0.0;
        for (int c = 0; c < d; ++c) {
          double diff = std::abs(x[static_cast<std::size_t>(i + static_cast<long long>(c) * tau)] -
                                 x[static_cast<std::size_t>(j + static_cast<long long>(c) * tau)]);
          if (diff > dist) dist = diff;
          if (dist >= best) break;
        }
        if (dist < best) {
          best = dist;
          bj = j;
        }
      }
      if (bj < 0 || best <= 0.0) continue;  // exact duplicate: ratio undefined
      double ext = std::abs(x[static_cast<std::size_t>(i + static_cast<long long>(d) * tau)] -
                            x[static_cast<std::size_t>(bj + static_cast<long long>(d) * tau)]);
      double dist_next = std::max(best, ext);
      acc += dist_next / best;
      acc_star += ext;
      ++used;
    }
    e[static_cast<std::size_t>(d)] = used > 0 ? acc / static_cast<double>(used)
                                              : std::numeric_limits<double>::quiet_NaN();
    estar[static_cast<std::size_t>(d)] = used > 0 ? acc_star / static_cast<double>(used)
                                                  : std::numeric_limits<double>::quiet_NaN();
  }

  CaoResult res;
  for (int d = 1; d <= m_max - 1; ++d) {
    double e1 = e[static_cast<std::size_t>(d + 1)] / e[static_cast<std::size_t>(d)];
    double e2 = estar[static_cast<std::size_t>(d + 1)] / estar[static_cast<std::size_t>(d)];
    res.e1.push_back(e1);
    res.e2.push_back(e2);
  }
  res.dimension = m_max;
  for (int d = 1; d <= m_max - 1; ++d) {
    double e1 = res.e1[static_cast<std::size_t>(d - 1)];
    if (std::isfinite(e1) && std::abs(e1 - 1.0) < 0.05) {
      res.dimension = d + 1;
      break;
    }
  }
  return res;
}

}  // namespace rqae
