#pragma once

#include <cmath>
#include <vector>

#include "rqae/common.hpp"
#include "rqae/wfdb.hpp"

namespace rqae {

// Linear-phase low-pass FIR, Hamming-windowed sinc, coefficients
// normalized to unit DC gain. cutoff_hz is the -6 dB point.
inline std::vector<double> design_lowpass_fir(int n_taps, double cutoff_hz, double rate_hz) {
  if (n_taps < 3 || n_taps % 2 == 0) throw ConfigError("FIR tap count must be odd and >= 3");
  if (cutoff_hz <= 0.0 || cutoff_hz >= rate_hz / 2.0)
    throw ConfigError("FIR cutoff must lie inside (0, rate/2)");
  const double fc = cutoff_hz / rate_hz;  // normalized, cycles per sample
  const int mid = n_taps / 2;
  std::vector<double> h(n_taps);
  double sum = 0.0;
  for (int i = 0; i < n_taps; ++i) {
    int k = i - mid;
    double sinc = (k == 0) ? 2.0 * fc : std::sin(2.0 * M_PI * fc * k) / (M_PI * k);
    double w = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (n_taps - 1));
    h[i] = sinc * w;
    sum += h[i];
  }
  for (double& v : h) v /= sum;
  return h;
}

// Centered convolution with reflect padding, so the output has the same
// length and no phase shift.
inline std::vector<double> filter_reflect(const std::vector<double>& x, const std::vector<double>& h) {
  const long long n = static_cast<long long>(x.size());
  const long long m = static_cast<long long>(h.size());
  const long long mid = m / 2;
  if (n == 0) return {};
  std::vector<double> y(n, 0.0);
  auto at = [&](long long i) {
    // reflect without repeating the edge sample: -1 -> 1, n -> n-2
    while (i < 0 || i >= n) {
      if (i < 0) i = -i;
      if (i >= n) i = 2 * (n - 1) - i;
    }
    return x[static_cast<std::size_t>(i)];
  };
  for (long long t = 0; t < n; ++t) {
    double acc = 0.0;
    for (long long j = 0; j < m; ++j) acc += h[static_cast<std::size_t>(j)] * at(t + mid - j);
    y[static_cast<std::size_t>(t)] = acc;
  }
  return y;
}

struct DownsampleConfig {
  int fir_taps = 63;
  double cutoff_fraction = 0.8;  // of the target Nyquist
  bool anti_alias = true;        // false: plain decimation
};

// Integer-factor decimation with an anti-alias low-pass. Factor 1 returns
// the input unchanged; otherwise the output holds floor(n/factor) samples.
inline std::vector<double> downsample(const std::vector<double>& x, int factor,
                                      double rate_hz, const DownsampleConfig& cfg = {}) {
  if (factor < 1) throw ConfigError("downsample factor must be >= 1");
  if (factor == 1) return x;
  std::vector<double> src;
  if (cfg.anti_alias) {
    const double target_nyquist = rate_hz / factor / 2.0;
    src = filter_reflect(x, design_lowpass_fir(cfg.fir_taps, cfg.cutoff_fraction * target_nyquist, rate_hz));
  } else {
    src = x;
  }
  const std::size_t out_n = x.size() / static_cast<std::size_t>(factor);
  std::vector<double> y(out_n);
  for (std::size_t i = 0; i < out_n; ++i) y[i] = src[i * static_cast<std::size_t>(factor)];
  return y;
}

// Record-level decimation to a target rate. The source rate must be an
// integer multiple of the target.
inline SignalRecord downsample_record(const SignalRecord& rec, double target_rate_hz,
                                      const DownsampleConfig& cfg = {}) {
  const double rate = rec.header.sampling_rate_hz;
  if (target_rate_hz <= 0.0) throw ConfigError("target rate must be positive");
  const double ratio = rate / target_rate_hz;
  const int factor = static_cast<int>(std::llround(ratio));
  if (factor < 1 || std::abs(ratio - factor) > 1e-9)
    throw DataError("cannot downsample " + fmt_full(rate) + " Hz to " + fmt_full(target_rate_hz) +
                    " Hz: the rate ratio is not an integer");
  SignalRecord out;
  out.header = rec.header;
  out.class_label = rec.class_label;
  out.header.sampling_rate_hz = target_rate_hz;
  out.samples_mv.reserve(rec.samples_mv.size());
  for (const auto& ch : rec.samples_mv) out.samples_mv.push_back(downsample(ch, factor, rate, cfg));
  out.header.n_samples = out.n_samples();
  return out;
}

}  // namespace rqae
