#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "rqae/common.hpp"

namespace rqae {

// Samples grouped by class: one feature row per subject.
using ClassSamples = std::array<std::vector<std::vector<double>>, kNumClasses>;

enum class RankSumMethod { exact, normal_approximation };

struct RankSumResult {
  double statistic_u = 0.0;  // U of the first sample, in [0, n1*n2]
  double p_two_sided = 1.0;
  RankSumMethod method = RankSumMethod::exact;
  int n1 = 0, n2 = 0;
  bool tie_corrected = false;
  bool degenerate = false;
};

namespace detail {

// Midranks (1-based, ties averaged) of the concatenation a ++ b, plus
// the tie-group sizes needed for the variance correction.
inline void midranks(const std::vector<double>& a, const std::vector<double>& b,
                     std::vector<double>& ranks, std::vector<long long>& tie_sizes) {
  const std::size_t n = a.size() + b.size();
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t i = 0; i < a.size(); ++i) order[i] = {a[i], i};
  for (std::size_t i = 0; i < b.size(); ++i) order[a.size() + i] = {b[i], a.size() + i};
  std::sort(order.begin(), order.end());
  ranks.assign(n, 0.0);
  tie_sizes.clear();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && order[j + 1].first == order[i].first) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k].second] = r;
    tie_sizes.push_back(static_cast<long long>(j - i + 1));
    i = j + 1;
  }
}

inline void check_ranksum_inputs(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw DataError("rank-sum test needs at least one value per sample");
  for (double v : a)
    if (!std::isfinite(v)) throw DataError("rank-sum sample contains a non-finite value");
  for (double v : b)
    if (!std::isfinite(v)) throw DataError("rank-sum sample contains a non-finite value");
}

inline bool all_equal(const std::vector<double>& a, const std::vector<double>& b) {
  const double v = a[0];
  for (double x : a)
    if (x != v) return false;
  for (double x : b)
    if (x != v) return false;
  return true;
}

}  // namespace detail

// Exact two-sided test: every assignment of the pooled midranks to the
// first sample is enumerated, so ties are handled by the conditional
// null distribution. Cost is C(n1+n2, n1); callers keep n1+n2 small.
inline RankSumResult rank_sum_exact(const std::vector<double>& a, const std::vector<double>& b) {
  detail::check_ranksum_inputs(a, b);
  RankSumResult res;
  res.method = RankSumMethod::exact;
  res.n1 = static_cast<int>(a.size());
  res.n2 = static_cast<int>(b.size());
  const int n = res.n1 + res.n2;
  if (n > 24) throw ConfigError("exact rank-sum enumeration is limited to 24 combined values");

  std::vector<double> ranks;
  std::vector<long long> ties;
  detail::midranks(a, b, ranks, ties);
  res.tie_corrected = ties.size() < static_cast<std::size_t>(n);

  const double offset = 0.5 * static_cast<double>(res.n1) * static_cast<double>(res.n1 + 1);
  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  res.statistic_u = r1 - offset;

  if (detail::all_equal(a, b)) {
    res.degenerate = true;
    res.p_two_sided = 1.0;
    return res;
  }

  // midranks are half-integer multiples, so U comparisons are exact up
  // to a vanishing guard
  long long cle = 0, cge = 0, total = 0;
  const std::uint32_t full = 1u << n;
  for (std::uint32_t mask = 0; mask < full; ++mask) {
    if (__builtin_popcount(mask) != res.n1) continue;
    double r = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1u) r += ranks[static_cast<std::size_t>(i)];
    const double u = r - offset;
    ++total;
    if (u <= res.statistic_u + 1e-9) ++cle;
    if (u >= res.statistic_u - 1e-9) ++cge;
  }
  res.p_two_sided = std::min(
      1.0, 2.0 * static_cast<double>(std::min(cle, cge)) / static_cast<double>(total));
  return res;
}

// Normal approximation with tie-corrected variance and a 0.5 continuity
// correction.
inline RankSumResult rank_sum_normal(const std::vector<double>& a, const std::vector<double>& b) {
  detail::check_ranksum_inputs(a, b);
  RankSumResult res;
  res.method = RankSumMethod::normal_approximation;
  res.n1 = static_cast<int>(a.size());
  res.n2 = static_cast<int>(b.size());
  const double n1 = static_cast<double>(res.n1), n2 = static_cast<double>(res.n2);
  const double n = n1 + n2;

  std::vector<double> ranks;
  std::vector<long long> ties;
  detail::midranks(a, b, ranks, ties);
  res.tie_corrected = ties.size() < a.size() + b.size();

  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  res.statistic_u = r1 - 0.5 * n1 * (n1 + 1.0);

  double tie_term = 0.0;
  for (long long t : ties) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double mu = 0.5 * n1 * n2;
  const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) {
    res.degenerate = true;
    res.p_two_sided = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(res.statistic_u - mu) - 0.5) / std::sqrt(var);
  res.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

// Dispatch: full enumeration up to 12 combined values, the corrected
// normal approximation beyond.
inline RankSumResult rank_sum_test(const std::vector<double>& a, const std::vector<double>& b) {
  detail::check_ranksum_inputs(a, b);
  if (a.size() + b.size() <= 12) return rank_sum_exact(a, b);
  return rank_sum_normal(a, b);
}

// ---- significance table ----

// Class-pair rows in the fixed presentation order.
inline const std::vector<std::pair<ClassLabel, ClassLabel>>& class_pair_order() {
  using L = ClassLabel;
  static const std::vector<std::pair<L, L>> order = {
      {L::HC, L::BBB}, {L::HC, L::CM},  {L::HC, L::DR}, {L::HC, L::MI}, {L::BBB, L::CM},
      {L::BBB, L::DR}, {L::BBB, L::MI}, {L::CM, L::DR}, {L::CM, L::MI}, {L::DR, L::MI}};
  return order;
}

struct SignificanceCell {
  double p = 1.0;
  bool significant = false;
  bool degenerate = false;
};

struct SignificanceTable {
  std::vector<std::pair<ClassLabel, ClassLabel>> pairs;
  int n_features = 0;
  std::vector<std::vector<SignificanceCell>> cells;  // [pair][feature]
  std::vector<ClassLabel> omitted;                   // classes without 3 usable rows
  double alpha = 0.05;
};

inline SignificanceTable significance_table(const ClassSamples& samples,
                                            bool bonferroni = false) {
  SignificanceTable table;

  int n_features = -1;
  for (const auto& rows : samples)
    for (const auto& row : rows) {
      if (n_features < 0) n_features = static_cast<int>(row.size());
      if (static_cast<int>(row.size()) != n_features)
        throw ShapeError("feature rows disagree on dimension: " + std::to_string(row.size()) +
                         " vs " + std::to_string(n_features));
    }
  if (n_features <= 0) throw DataError("significance table needs feature rows");
  table.n_features = n_features;

  std::array<bool, kNumClasses> eligible{};
  int n_eligible = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    if (samples[static_cast<std::size_t>(c)].size() >= 3) {
      eligible[static_cast<std::size_t>(c)] = true;
      ++n_eligible;
    } else {
      table.omitted.push_back(static_cast<ClassLabel>(c));
    }
  }
  if (n_eligible < 2)
    throw DataError("significance table needs at least 2 classes with 3 or more samples");

  for (const auto& pr : class_pair_order())
    if (eligible[static_cast<std::size_t>(static_cast<int>(pr.first))] &&
        eligible[static_cast<std::size_t>(static_cast<int>(pr.second))])
      table.pairs.push_back(pr);

  table.alpha = bonferroni ? 0.05 / (static_cast<double>(table.pairs.size()) *
                                     static_cast<double>(n_features))
                           : 0.05;

  auto column = [](const std::vector<std::vector<double>>& rows, int j) {
    std::vector<double> col;
    for (const auto& row : rows) {
      const double v = row[static_cast<std::size_t>(j)];
      if (std::isfinite(v)) col.push_back(v);
    }
    return col;
  };

  for (const auto& pr : table.pairs) {
    std::vector<SignificanceCell> row(static_cast<std::size_t>(n_features));
    for (int j = 0; j < n_features; ++j) {
      const auto a = column(samples[static_cast<std::size_t>(static_cast<int>(pr.first))], j);
      const auto b = column(samples[static_cast<std::size_t>(static_cast<int>(pr.second))], j);
      SignificanceCell& cell = row[static_cast<std::size_t>(j)];
      if (a.empty() || b.empty()) {
        cell.degenerate = true;  // feature invalid across a whole class
        continue;
      }
      const RankSumResult res = rank_sum_test(a, b);
      cell.p = res.p_two_sided;
      cell.degenerate = res.degenerate;
      cell.significant = !res.degenerate && res.p_two_sided < table.alpha;
    }
    table.cells.push_back(std::move(row));
  }
  return table;
}

inline std::string significance_csv(const SignificanceTable& table) {
  std::string out;
  if (!table.omitted.empty()) {
    out += "# omitted:";
    for (std::size_t i = 0; i < table.omitted.size(); ++i)
      out += std::string(i == 0 ? " " : ", ") + to_string(table.omitted[i]);
    out += "\n";
  }
  out += "pair";
  for (int j = 1; j <= table.n_features; ++j) out += ",F" + std::to_string(j);
  out += "\n";
  for (std::size_t r = 0; r < table.pairs.size(); ++r) {
    out += std::string(to_string(table.pairs[r].first)) + "-" +
           to_string(table.pairs[r].second);
    for (const auto& cell : table.cells[r]) {
      if (!cell.significant) {
        out += ",ns";
      } else if (cell.p < 0.0005) {
        out += ",<0.001";
      } else {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.3f", cell.p);
        out += std::string(",") + buf;
      }
    }
    out += "\n";
  }
  return out;
}

inline void write_significance_csv(const std::string& path, const SignificanceTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << significance_csv(table);
  if (!out.flush()) throw DataError("write to '" + path + "' failed");
}

// ---- box-plot summaries ----

// Linear interpolation between order statistics: h = p*(n-1).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

struct BoxSummary {
  ClassLabel label = ClassLabel::HC;
  int feature = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  std::vector<double> outliers;  // beyond the 1.5*IQR Tukey fences
};

inline std::vector<BoxSummary> boxplot_data(const ClassSamples& samples) {
  int n_features = -1;
  for (const auto& rows : samples)
    for (const auto& row : rows) {
      if (n_features < 0) n_features = static_cast<int>(row.size());
      if (static_cast<int>(row.size()) != n_features)
        throw ShapeError("feature rows disagree on dimension: " + std::to_string(row.size()) +
                         " vs " + std::to_string(n_features));
    }
  if (n_features <= 0) throw DataError("box-plot summary needs feature rows");

  std::vector<BoxSummary> out;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& rows = samples[static_cast<std::size_t>(c)];
    if (rows.empty()) continue;
    for (int j = 0; j < n_features; ++j) {
      std::vector<double> col;
      for (const auto& row : rows)
        if (std::isfinite(row[static_cast<std::size_t>(j)]))
          col.push_back(row[static_cast<std::size_t>(j)]);
      if (col.empty()) continue;
      std::sort(col.begin(), col.end());
      BoxSummary s;
      s.label = static_cast<ClassLabel>(c);
      s.feature = j;
      s.min = col.front();
      s.max = col.back();
      s.q1 = quantile_sorted(col, 0.25);
      s.median = quantile_sorted(col, 0.5);
      s.q3 = quantile_sorted(col, 0.75);
      const double iqr = s.q3 - s.q1;
      const double lo = s.q1 - 1.5 * iqr, hi = s.q3 + 1.5 * iqr;
      for (double v : col)
        if (v < lo || v > hi) s.outliers.push_back(v);
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline void write_boxplot_csv(const std::string& path, const std::vector<BoxSummary>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "class,feature,min,q1,median,q3,max,outliers\n";
  char buf[32];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& s : data) {
    out << to_string(s.label) << ",F" << s.feature + 1 << "," << num(s.min) << "," << num(s.q1)
        << "," << num(s.median) << "," << num(s.q3) << "," << num(s.max);
    for (double v : s.outliers) out << "," << num(v);
    out << "\n";
  }
  if (!out.flush()) throw DataError("write to '" + path + "' failed");
}

}  // namespace rqae
