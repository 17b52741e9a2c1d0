#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "rqae/rng.hpp"
#include "rqae/stats.hpp"

using rqae::ClassLabel;
using rqae::ClassSamples;
using rqae::RankSumMethod;

TEST_CASE("disjoint pairs give the textbook exact p") {
  const auto res = rqae::rank_sum_test({1.0, 2.0}, {3.0, 4.0});
  CHECK(res.method == RankSumMethod::exact);
  CHECK(res.statistic_u == 0.0);
  CHECK(res.p_two_sided == Catch::Approx(1.0 / 3.0));
  CHECK(res.n1 == 2);
  CHECK(res.n2 == 2);
  CHECK_FALSE(res.tie_corrected);
  CHECK_FALSE(res.degenerate);
}

TEST_CASE("swapping the samples mirrors U and keeps p") {
  const auto ab = rqae::rank_sum_test({1.0, 2.0, 7.0}, {3.0, 4.0});
  const auto ba = rqae::rank_sum_test({3.0, 4.0}, {1.0, 2.0, 7.0});
  CHECK(ab.p_two_sided == ba.p_two_sided);
  CHECK(ab.statistic_u + ba.statistic_u == Catch::Approx(6.0));  // n1*n2
}

TEST_CASE("identical multisets are maximally insignificant") {
  const auto exact = rqae::rank_sum_test({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
  CHECK(exact.method == RankSumMethod::exact);
  CHECK(exact.p_two_sided == 1.0);

  std::vector<double> big;
  for (int i = 0; i < 9; ++i) big.push_back(i * 1.7);
  const auto approx = rqae::rank_sum_test(big, big);
  CHECK(approx.method == RankSumMethod::normal_approximation);
  CHECK(approx.tie_corrected);
  CHECK(approx.p_two_sided > 0.95);
}

TEST_CASE("an all-constant pool degenerates to p = 1 with the flag set") {
  const auto small = rqae::rank_sum_test({2.0, 2.0}, {2.0, 2.0, 2.0});
  CHECK(small.degenerate);
  CHECK(small.p_two_sided == 1.0);

  const std::vector<double> flat(10, 4.0);
  const auto big = rqae::rank_sum_test(flat, flat);
  CHECK(big.degenerate);
  CHECK(big.p_two_sided == 1.0);
}

TEST_CASE("exact p matches the permutation reference with and without ties") {
  rqae::Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const int n1 = 1 + static_cast<int>(rng.next_u64() % 5);
    const int n2 = 1 + static_cast<int>(rng.next_u64() % 5);
    std::vector<double> a, b;
    // small integer support forces ties often
    for (int i = 0; i < n1; ++i) a.push_back(static_cast<double>(rng.next_u64() % 6));
    for (int i = 0; i < n2; ++i) b.push_back(static_cast<double>(rng.next_u64() % 6));
    const auto got = rqae::rank_sum_exact(a, b);
    const auto want = orc::ranksum_perm(a, b);
    INFO("trial " << trial << " n1=" << n1 << " n2=" << n2);
    CHECK(got.statistic_u == Catch::Approx(want.u).margin(1e-9));
    CHECK(got.p_two_sided == Catch::Approx(want.p).margin(1e-12));
  }
}

TEST_CASE("p is invariant under strictly monotone transforms") {
  std::vector<double> a = {0.3, 1.2, -0.7, 2.5};
  std::vector<double> b = {0.9, 3.1, 1.4};
  const auto base = rqae::rank_sum_test(a, b);
  auto cube = [](std::vector<double> v) {
    for (double& x : v) x = x * x * x;
    return v;
  };
  const auto mapped = rqae::rank_sum_test(cube(a), cube(b));
  CHECK(base.p_two_sided == mapped.p_two_sided);
  CHECK(base.statistic_u == mapped.statistic_u);

  std::vector<double> big_a, big_b;
  rqae::Rng rng(7);
  for (int i = 0; i < 9; ++i) big_a.push_back(rng.uniform(-2.0, 2.0));
  for (int i = 0; i < 8; ++i) big_b.push_back(rng.uniform(-1.0, 3.0));
  const auto raw = rqae::rank_sum_test(big_a, big_b);
  const auto exp_mapped = rqae::rank_sum_test(cube(big_a), cube(big_b));
  CHECK(raw.method == RankSumMethod::normal_approximation);
  CHECK(raw.p_two_sided == exp_mapped.p_two_sided);
}

TEST_CASE("exact and approximate p stay within 0.05 of each other") {
  rqae::Rng rng(55);
  for (int seed = 0; seed < 50; ++seed) {
    std::vector<double> a, b;
    for (int i = 0; i < 6; ++i) {
      a.push_back(rng.uniform());
      b.push_back(rng.uniform(0.0, 1.2));
    }
    const auto exact = rqae::rank_sum_exact(a, b);
    const auto approx = rqae::rank_sum_normal(a, b);
    INFO("seed " << seed);
    CHECK(std::abs(exact.p_two_sided - approx.p_two_sided) < 0.05);
  }
}

TEST_CASE("U stays inside its range and p inside the unit interval") {
  rqae::Rng rng(83);
  for (int trial = 0; trial < 30; ++trial) {
    const int n1 = 1 + static_cast<int>(rng.next_u64() % 10);
    const int n2 = 1 + static_cast<int>(rng.next_u64() % 10);
    std::vector<double> a, b;
    for (int i = 0; i < n1; ++i) a.push_back(rng.uniform(-5.0, 5.0));
    for (int i = 0; i < n2; ++i) b.push_back(rng.uniform(-5.0, 5.0));
    const auto res = rqae::rank_sum_test(a, b);
    CHECK(res.statistic_u >= 0.0);
    CHECK(res.statistic_u <= static_cast<double>(n1 * n2));
    CHECK(res.p_two_sided >= 0.0);
    CHECK(res.p_two_sided <= 1.0);
  }
}

TEST_CASE("rank-sum inputs are validated") {
  CHECK_THROWS_AS(rqae::rank_sum_test({}, {1.0}), rqae::DataError);
  CHECK_THROWS_AS(rqae::rank_sum_test({1.0}, {}), rqae::DataError);
  CHECK_THROWS_AS(rqae::rank_sum_test({std::nan("")}, {1.0}), rqae::DataError);
}

namespace {

// Ten-feature rows shared verbatim across all five classes.
ClassSamples identical_class_samples(int per_class) {
  rqae::Rng rng(13);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < per_class; ++i) {
    std::vector<double> row(10);
    for (auto& v : row) v = rng.uniform();
    rows.push_back(row);
  }
  ClassSamples samples;
  for (auto& s : samples) s = rows;  // literally the same rows everywhere
  return samples;
}

}  // namespace

TEST_CASE("identical class distributions produce an all-ns table") {
  const auto table = rqae::significance_table(identical_class_samples(6));
  REQUIRE(table.pairs.size() == 10);
  REQUIRE(table.n_features == 10);
  int cells = 0;
  for (const auto& row : table.cells)
    for (const auto& cell : row) {
      ++cells;
      CHECK_FALSE(cell.significant);
    }
  CHECK(cells == 100);
  CHECK(table.omitted.empty());
}

TEST_CASE("a strongly shifted feature lights up against every other class") {
  auto samples = identical_class_samples(8);
  // shift feature 3 of HC by ten standard deviations of a unit uniform
  for (auto& row : samples[0]) row[3] += 10.0 * std::sqrt(1.0 / 12.0);
  const auto table = rqae::significance_table(samples);
  for (std::size_t r = 0; r < table.pairs.size(); ++r) {
    const bool has_hc =
        table.pairs[r].first == ClassLabel::HC || table.pairs[r].second == ClassLabel::HC;
    INFO("pair row " << r);
    CHECK(table.cells[r][3].significant == has_hc);
  }
}

TEST_CASE("undersized classes are omitted with a note") {
  auto samples = identical_class_samples(5);
  samples[static_cast<std::size_t>(static_cast<int>(ClassLabel::CM))].resize(2);
  const auto table = rqae::significance_table(samples);
  REQUIRE(table.omitted.size() == 1);
  CHECK(table.omitted[0] == ClassLabel::CM);
  CHECK(table.pairs.size() == 6);  // pairs among the 4 eligible classes
  const std::string csv = rqae::significance_csv(table);
  CHECK(csv.find("# omitted: CM") != std::string::npos);
  CHECK(csv.find("CM-") == std::string::npos);

  ClassSamples starved;
  starved[0] = samples[0];
  CHECK_THROWS_AS(rqae::significance_table(starved), rqae::DataError);
  CHECK_THROWS_AS(rqae::significance_table(ClassSamples{}), rqae::DataError);
}

TEST_CASE("significance csv keeps the fixed pair order and formats p") {
  ClassSamples samples;
  // HC and MI strongly separated on feature 0, identical elsewhere
  for (int i = 0; i < 4; ++i) {
    samples[0].push_back({1.0 + i, 5.0});
    samples[1].push_back({10.0 + i, 5.0});
  }
  const auto table = rqae::significance_table(samples);
  const std::string csv = rqae::significance_csv(table);
  CHECK(csv.rfind("# omitted: BBB, CM, DR\npair,F1,F2\n", 0) == 0);
  // disjoint 4v4: p = 2/C(8,4) = 0.0286, constant feature is ns
  CHECK(csv.find("HC-MI,0.029,ns") != std::string::npos);

  const auto strict = rqae::significance_table(samples, true);
  // Bonferroni over 2 cells: alpha 0.025 pushes 0.0286 out
  CHECK_FALSE(strict.cells[0][0].significant);
  CHECK(strict.alpha == Catch::Approx(0.025));
}

TEST_CASE("degenerate feature columns are never flagged significant") {
  ClassSamples samples;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < 4; ++i) {
    samples[0].push_back({nan, 1.0 + i});
    samples[1].push_back({nan, 1.5 + i});
  }
  const auto table = rqae::significance_table(samples);
  CHECK(table.cells[0][0].degenerate);
  CHECK_FALSE(table.cells[0][0].significant);
  CHECK(rqae::significance_csv(table).find("ns") != std::string::npos);
}

TEST_CASE("quartiles follow the interpolation convention") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(rqae::quantile_sorted(v, 0.25) == 2.0);
  CHECK(rqae::quantile_sorted(v, 0.5) == 3.0);
  CHECK(rqae::quantile_sorted(v, 0.75) == 4.0);
  CHECK(rqae::quantile_sorted(v, 0.0) == 1.0);
  CHECK(rqae::quantile_sorted(v, 1.0) == 5.0);
  const std::vector<double> even = {1.0, 2.0, 3.0, 4.0};
  CHECK(rqae::quantile_sorted(even, 0.5) == 2.5);
}

TEST_CASE("a single sample collapses the box to one point") {
  ClassSamples samples;
  samples[0].push_back({7.5});
  samples[1].push_back({1.0});
  samples[1].push_back({2.0});
  const auto data = rqae::boxplot_data(samples);
  REQUIRE(data.size() == 2);
  CHECK(data[0].min == 7.5);
  CHECK(data[0].q1 == 7.5);
  CHECK(data[0].median == 7.5);
  CHECK(data[0].q3 == 7.5);
  CHECK(data[0].max == 7.5);
  CHECK(data[0].outliers.empty());
}

TEST_CASE("a far outlier lands outside the Tukey fences") {
  ClassSamples samples;
  for (double v : {1.0, 2.0, 3.0, 4.0, 5.0, 300.0}) samples[2].push_back({v});
  const auto data = rqae::boxplot_data(samples);
  REQUIRE(data.size() == 1);
  CHECK(data[0].label == ClassLabel::BBB);
  REQUIRE(data[0].outliers.size() == 1);
  CHECK(data[0].outliers[0] == 300.0);
  // fences from q1/q3 of the full sorted sample must not flag the bulk
  CHECK(data[0].min == 1.0);
  CHECK(data[0].max == 300.0);
}

TEST_CASE("boxplot csv carries the summary header and outlier tail") {
  ClassSamples samples;
  for (double v : {1.0, 2.0, 3.0, 4.0, 5.0, 300.0}) samples[0].push_back({v});
  const auto data = rqae::boxplot_data(samples);
  const std::string path = "boxplot_test.csv";
  rqae::write_boxplot_csv(path, data);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  in.close();
  std::remove(path.c_str());
  CHECK(header == "class,feature,min,q1,median,q3,max,outliers");
  CHECK(row.rfind("HC,F1,1,", 0) == 0);
  CHECK(row.find(",300") != std::string::npos);
}
