#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "rqae/resample.hpp"

using namespace rqae;

namespace {

// Reference single-bin DFT amplitude of a real signal at frequency f.
double dft_amplitude(const std::vector<double>& x, double f_hz, double rate_hz) {
  std::complex<double> acc(0.0, 0.0);
  const double w = 2.0 * M_PI * f_hz / rate_hz;
  for (std::size_t t = 0; t < x.size(); ++t)
    acc += x[t] * std::polar(1.0, -w * static_cast<double>(t));
  return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

std::vector<double> sine(double f_hz, double rate_hz, long long n, double amp = 1.0) {
  std::vector<double> x(n);
  for (long long t = 0; t < n; ++t)
    x[static_cast<std::size_t>(t)] = amp * std::sin(2.0 * M_PI * f_hz * t / rate_hz);
  return x;
}

}  // namespace

TEST_CASE("FIR taps are symmetric with unit DC gain") {
  auto h = design_lowpass_fir(63, 100.0, 1000.0);
  REQUIRE(h.size() == 63);
  double sum = 0.0;
  for (double v : h) sum += v;
  CHECK(sum == Catch::Approx(1.0).margin(1e-14));
  for (int i = 0; i < 63; ++i) CHECK(h[i] == Catch::Approx(h[62 - i]).margin(1e-16));
  CHECK_THROWS_AS(design_lowpass_fir(62, 100.0, 1000.0), ConfigError);
  CHECK_THROWS_AS(design_lowpass_fir(63, 600.0, 1000.0), ConfigError);
}

TEST_CASE("factor 1 is the identity") {
  auto x = sine(3.0, 1000.0, 777);
  auto y = downsample(x, 1, 1000.0);
  CHECK(y == x);
}

TEST_CASE("a constant survives filtering and decimation exactly") {
  std::vector<double> x(2000, 3.25);
  auto y = downsample(x, 4, 1000.0);
  REQUIRE(y.size() == 500);
  for (double v : y) CHECK(v == Catch::Approx(3.25).margin(1e-12));
}

TEST_CASE("passband tones keep their amplitude") {
  // 4 s at 1 kHz, decimate to 250 Hz; cutoff sits at 100 Hz
  const double rate = 1000.0;
  const long long n = 4000;
  for (double f : {5.0, 20.0, 50.0}) {
    auto y = downsample(sine(f, rate, n), 4, rate);
    REQUIRE(y.size() == 1000);
    double a = dft_amplitude(y, f, 250.0);
    INFO("f=" << f);
    CHECK(a == Catch::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("stopband tones are rejected before decimation") {
  const double rate = 1000.0;
  const long long n = 4000;
  // 180 Hz would alias to 70 Hz at the 250 Hz target rate
  auto y = downsample(sine(180.0, rate, n), 4, rate);
  double aliased = dft_amplitude(y, 70.0, 250.0);
  CHECK(aliased < 0.01);

  // plain decimation keeps the alias, which is what the bypass is for
  DownsampleConfig raw;
  raw.anti_alias = false;
  auto z = downsample(sine(180.0, rate, n), 4, rate, raw);
  double kept = dft_amplitude(z, 70.0, 250.0);
  CHECK(kept > 0.9);
}

TEST_CASE("output length and bad factors") {
  std::vector<double> x(1001, 1.0);
  CHECK(downsample(x, 4, 1000.0).size() == 250);  // floor(1001/4)
  CHECK_THROWS_AS(downsample(x, 0, 1000.0), ConfigError);
}

TEST_CASE("record-level downsampling rewrites the header") {
  SignalRecord rec;
  rec.header.record_name = "r";
  rec.header.n_channels = 2;
  rec.header.sampling_rate_hz = 1000.0;
  rec.header.channels.resize(2);
  rec.samples_mv = {sine(10.0, 1000.0, 8000), sine(4.0, 1000.0, 8000)};
  rec.header.n_samples = 8000;

  SignalRecord out = downsample_record(rec, 250.0);
  CHECK(out.header.sampling_rate_hz == 250.0);
  CHECK(out.header.n_samples == 2000);
  REQUIRE(out.samples_mv.size() == 2);
  CHECK(out.samples_mv[0].size() == 2000);
  double a = dft_amplitude(out.samples_mv[0], 10.0, 250.0);
  CHECK(a == Catch::Approx(1.0).epsilon(0.01));

  SignalRecord same = downsample_record(rec, 1000.0);
  CHECK(same.samples_mv == rec.samples_mv);

  CHECK_THROWS_AS(downsample_record(rec, 300.0), DataError);  // ratio 10/3
  CHECK_THROWS_AS(downsample_record(rec, -1.0), ConfigError);
}
