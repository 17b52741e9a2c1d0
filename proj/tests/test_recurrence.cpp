#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rqae/embedding.hpp"
#include "rqae/recurrence.hpp"
#include "rqae/rng.hpp"

using namespace rqae;

namespace {

Mat random_states(long long k, long long m, uint64_t seed) {
  Rng rng(seed);
  Mat s(k, m);
  for (auto& v : s.v) v = rng.uniform(-1.0, 1.0);
  return s;
}

}  // namespace

TEST_CASE("distance matrix: 3-4-5 triangle, symmetry, zero diagonal") {
  Mat s(2, 2);
  s(0, 0) = 0.0;
  s(0, 1) = 0.0;
  s(1, 0) = 3.0;
  s(1, 1) = 4.0;
  Mat d = distance_matrix(s);
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 0) == 5.0);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(1, 1) == 0.0);
  CHECK_THROWS_AS(distance_matrix(Mat(1, 3)), ShapeError);
}

TEST_CASE("distance matrix agrees with the naive oracle") {
  for (auto [k, m, seed] : {std::tuple<long long, long long, uint64_t>{50, 4, 1},
                            {100, 3, 2},
                            {17, 8, 3}}) {
    Mat s = random_states(k, m, seed);
    Mat d = distance_matrix(s);
    Mat ref = orc::dist_matrix(s);
    for (long long i = 0; i < k; ++i)
      for (long long j = 0; j < k; ++j) {
        double scale = std::max(std::abs(ref(i, j)), 1e-300);
        REQUIRE(std::abs(d(i, j) - ref(i, j)) / scale <= 1e-12);
      }
  }
}

TEST_CASE("distance matrix satisfies the triangle inequality on sampled triples") {
  Mat s = random_states(60, 5, 9);
  Mat d = distance_matrix(s);
  Rng rng(10);
  for (int t = 0; t < 500; ++t) {
    long long a = rng.uniform_int(0, 59), b = rng.uniform_int(0, 59), c = rng.uniform_int(0, 59);
    REQUIRE(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
  }
}

TEST_CASE("thresholding: theta(0)=1, saturation, monotonicity") {
  Mat s(2, 2);
  s(0, 0) = 0.0;
  s(0, 1) = 0.0;
  s(1, 0) = 3.0;
  s(1, 1) = 4.0;
  Mat d = distance_matrix(s);
  BinaryRecurrencePlot exact = threshold(d, 5.0);  // boundary distance counts
  CHECK(exact(0, 1) == 1);
  BinaryRecurrencePlot below = threshold(d, 4.999999);
  CHECK(below(0, 1) == 0);
  CHECK(below(0, 0) == 1);  // identity line always recurs at any epsilon >= 0

  Mat rd = distance_matrix(random_states(40, 3, 4));
  double dmax = *std::max_element(rd.v.begin(), rd.v.end());
  BinaryRecurrencePlot all = threshold(rd, dmax);
  for (auto b : all.bits) REQUIRE(b == 1);

  std::vector<double> epsilons = {0.0, 0.2 * dmax, 0.4 * dmax, 0.7 * dmax, dmax};
  BinaryRecurrencePlot prev = threshold(rd, epsilons[0]);
  for (std::size_t e = 1; e < epsilons.size(); ++e) {
    BinaryRecurrencePlot cur = threshold(rd, epsilons[e]);
    for (std::size_t i = 0; i < cur.bits.size(); ++i)
      REQUIRE(prev.bits[i] <= cur.bits[i]);  // on-bits only ever grow with epsilon
    prev = cur;
  }

  CHECK_THROWS_AS(threshold(rd, -0.1), ConfigError);
}

TEST_CASE("epsilon from a target recurrence rate hits the target") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Mat d = distance_matrix(random_states(40, 3, seed));
    for (double target : {0.10, 0.15, 0.5}) {
      EpsilonChoice c = epsilon_for_target_rr(d, target);
      CHECK_FALSE(c.degenerate);
      BinaryRecurrencePlot rp = threshold(d, c.epsilon);
      long long on = 0;
      for (auto b : rp.bits) on += b;
      // identity line inflates the measured rate by 1/k
      double rr = double(on - d.rows) / double(d.rows * d.rows - d.rows);
      REQUIRE(rr >= target - 0.02);
      REQUIRE(rr <= target + 0.02);
    }
  }
}

TEST_CASE("epsilon at the extremes of the quantile") {
  Mat d = distance_matrix(random_states(30, 2, 5));
  std::vector<double> off;
  for (long long i = 0; i < d.rows; ++i)
    for (long long j = i + 1; j < d.rows; ++j) off.push_back(d(i, j));
  std::sort(off.begin(), off.end());
  CHECK(epsilon_for_target_rr(d, 0.999).epsilon == off.back());
  CHECK(epsilon_for_target_rr(d, 0.5).epsilon == off[static_cast<std::size_t>(
      std::ceil(0.5 * off.size())) - 1]);
  CHECK_THROWS_AS(epsilon_for_target_rr(d, 0.0), ConfigError);
  CHECK_THROWS_AS(epsilon_for_target_rr(d, 1.0), ConfigError);

  Mat flat(3, 3);
  flat.v = {0, 1, 1, 1, 0, 1, 1, 1, 0};
  CHECK(epsilon_for_target_rr(flat, 0.3).degenerate);
}

TEST_CASE("2x2 checker upscales to the documented corner and center pixels") {
  Mat d(2, 2);
  d.v = {0.0, 1.0, 1.0, 0.0};
  RecurrenceImage img = resize_to_image(d, 224);
  CHECK_FALSE(img.constant_input);
  CHECK(img.pixels[0] == 0);
  CHECK(img.pixels[223] == 255);
  CHECK(img.pixels[223 * 224] == 255);
  CHECK(img.pixels[223 * 224 + 223] == 0);
  int center = img.pixels[111 * 224 + 111];
  CHECK((center == 127 || center == 128));
}

TEST_CASE("native-size resize keeps extremum positions") {
  Mat d = distance_matrix(random_states(224, 2, 6));
  RecurrenceImage img = resize_to_image(d, 224);
  auto arg_in = std::max_element(d.v.begin(), d.v.end()) - d.v.begin();
  auto arg_px = std::max_element(img.pixels.begin(), img.pixels.end()) - img.pixels.begin();
  CHECK(arg_in == arg_px);
  auto min_in = std::min_element(d.v.begin(), d.v.end()) - d.v.begin();
  CHECK(img.pixels[static_cast<std::size_t>(min_in)] == 0);
  // full range is spanned
  CHECK(*std::min_element(img.pixels.begin(), img.pixels.end()) == 0);
  CHECK(*std::max_element(img.pixels.begin(), img.pixels.end()) == 255);
}

TEST_CASE("constant matrix renders as flagged mid-gray") {
  Mat d(5, 5);
  std::fill(d.v.begin(), d.v.end(), 2.5);
  RecurrenceImage img = resize_to_image(d, 32);
  CHECK(img.constant_input);
  for (auto p : img.pixels) REQUIRE(p == 128);
}

TEST_CASE("subject stacking orders by channel index") {
  std::vector<RecurrenceImage> imgs;
  for (int c = 14; c >= 0; --c) {  // deliberately reversed
    RecurrenceImage im;
    im.size = 8;
    im.channel_index = c;
    im.pixels.assign(64, static_cast<uint8_t>(c));
    imgs.push_back(im);
  }
  SubjectTensor t = stack_subject(imgs, 15);
  CHECK(t.n_channels == 15);
  for (int c = 0; c < 15; ++c) REQUIRE(t.channel(c)[0] == c);

  imgs.pop_back();
  CHECK_THROWS_AS(stack_subject(imgs, 15), DataError);  // 14 images
  imgs.push_back(imgs.front());
  CHECK_THROWS_AS(stack_subject(imgs, 15), DataError);  // duplicate index
}

TEST_CASE("canonical channel order matches the 15-lead layout") {
  const auto& order = canonical_channel_order();
  REQUIRE(order.size() == 15);
  CHECK(order[0] == "i");
  CHECK(order[5] == "avf");
  CHECK(order[6] == "v1");
  CHECK(order[11] == "v6");
  CHECK(order[14] == "vz");
  CHECK(canonical_channel_index("III") == 2);
  CHECK(canonical_channel_index("aVR") == 3);
  CHECK(canonical_channel_index("nonsense") == -1);
}

TEST_CASE("periodic signal produces diagonal lines spaced one period apart") {
  // period 25.13 samples; states step one sample, so line spacing tracks
  // the period itself
  const double period = 25.13;
  std::vector<double> x(500);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = std::sin(2.0 * M_PI * t / period);
  Mat y = embed(x, 3, 6);
  Mat d = distance_matrix(y);
  BinaryRecurrencePlot rp = threshold(d, epsilon_for_target_rr(d, 0.15).epsilon);

  // sum of on-bits per diagonal offset, then its autocorrelation peak
  const long long n = rp.n;
  std::vector<double> profile(static_cast<std::size_t>(n), 0.0);
  for (long long off = 0; off < n; ++off) {
    long long on = 0;
    for (long long i = 0; i + off < n; ++i) on += rp(i, i + off);
    profile[static_cast<std::size_t>(off)] = static_cast<double>(on) / static_cast<double>(n - off);
  }
  double mean = 0.0;
  for (double v : profile) mean += v;
  mean /= static_cast<double>(profile.size());
  auto acf = [&](long long lag) {
    double acc = 0.0;
    long long cnt = 0;
    for (std::size_t t = 0; t + lag < profile.size(); ++t) {
      acc += (profile[t] - mean) * (profile[t + lag] - mean);
      ++cnt;
    }
    return acc / static_cast<double>(cnt);
  };
  long long best_lag = 5;
  double best = -1e300;
  for (long long lag = 5; lag <= 60; ++lag) {
    double v = acf(lag);
    if (v > best) {
      best = v;
      best_lag = lag;
    }
  }
  CHECK(best_lag >= 23);
  CHECK(best_lag <= 28);
}
