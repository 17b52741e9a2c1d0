#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "rqae/checkpoint.hpp"
#include "rqae/common.hpp"
#include "rqae/csv.hpp"
#include "rqae/rng.hpp"

namespace rqae {

// One subject's feature row. Invalid features travel as NaN and are
// imputed from training-set medians before any model sees them.
struct FeatureVector {
  std::vector<double> values;
  ClassLabel label = ClassLabel::HC;
};

using Dataset = std::vector<FeatureVector>;

namespace detail {

inline std::vector<double> softmax5(const std::array<double, kNumClasses>& scores) {
  double mx = scores[0];
  for (double v : scores) mx = std::max(mx, v);
  std::vector<double> p(kNumClasses);
  double sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    p[static_cast<std::size_t>(c)] = std::exp(scores[static_cast<std::size_t>(c)] - mx);
    sum += p[static_cast<std::size_t>(c)];
  }
  for (double& v : p) v /= sum;
  return p;
}

inline void check_matrix(const std::vector<std::vector<double>>& X,
                         const std::vector<ClassLabel>& y) {
  if (X.empty()) throw DataError("training set is empty");
  if (X.size() != y.size())
    throw ShapeError("got " + std::to_string(X.size()) + " feature rows but " +
                     std::to_string(y.size()) + " labels");
  for (std::size_t i = 1; i < X.size(); ++i)
    if (X[i].size() != X[0].size())
      throw ShapeError("feature row " + std::to_string(i) + " has " +
                       std::to_string(X[i].size()) + " entries, row 0 has " +
                       std::to_string(X[0].size()));
}

inline int count_classes(const std::vector<ClassLabel>& y) {
  std::set<ClassLabel> seen(y.begin(), y.end());
  return static_cast<int>(seen.size());
}

}  // namespace detail

// ---- stratified split ----

struct SplitResult {
  std::vector<int> train, test;
};

// Per-class test quota is round(size * fraction) with a floor of 1 and a
// cap of size-1, so both sides keep at least one member of every class.
inline SplitResult stratified_split(const Dataset& data, double test_fraction,
                                    std::uint64_t seed) {
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
    throw ConfigError("test fraction must lie strictly between 0 and 1, got " +
                      fmt_full(test_fraction));
  if (data.empty()) throw DataError("cannot split an empty dataset");

  std::array<std::vector<int>, kNumClasses> members;
  for (std::size_t i = 0; i < data.size(); ++i)
    members[static_cast<std::size_t>(static_cast<int>(data[i].label))].push_back(
        static_cast<int>(i));

  Rng rng(seed_for(seed, "stratified.split"));
  SplitResult out;
  for (int c = 0; c < kNumClasses; ++c) {
    auto& m = members[static_cast<std::size_t>(c)];
    if (m.empty()) continue;
    if (m.size() < 2)
      throw DataError(std::string("class ") + to_string(static_cast<ClassLabel>(c)) +
                      " has a single member and cannot be stratified");
    rng.shuffle(m);
    long long quota = std::llround(static_cast<double>(m.size()) * test_fraction);
    quota = std::max(1LL, std::min(static_cast<long long>(m.size()) - 1, quota));
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (k < static_cast<std::size_t>(quota))
        out.test.push_back(m[k]);
      else
        out.train.push_back(m[k]);
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

// ---- preprocessing ----

// Train-median imputation of NaN entries. Fitting ignores labels, so the
// flags cannot leak class information.
struct Imputer {
  std::vector<double> medians;

  void fit(const Dataset& train) {
    if (train.empty()) throw DataError("imputer needs a non-empty training set");
    const std::size_t d = train[0].values.size();
    medians.assign(d, 0.0);
    std::vector<double> col;
    for (std::size_t j = 0; j < d; ++j) {
      col.clear();
      for (const auto& row : train) {
        if (row.values.size() != d)
          throw ShapeError("feature rows disagree on dimension: " +
                           std::to_string(row.values.size()) + " vs " + std::to_string(d));
        if (std::isfinite(row.values[j])) col.push_back(row.values[j]);
      }
      if (col.empty()) continue;  // all-invalid feature stays at 0
      std::sort(col.begin(), col.end());
      const std::size_t n = col.size();
      medians[j] = n % 2 == 1 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
    }
  }

  std::vector<double> transform(const std::vector<double>& x) const {
    if (x.size() != medians.size())
      throw ShapeError("feature row has " + std::to_string(x.size()) + " entries, imputer saw " +
                       std::to_string(medians.size()));
    std::vector<double> out = x;
    for (std::size_t j = 0; j < out.size(); ++j)
      if (!std::isfinite(out[j])) out[j] = medians[j];
    return out;
  }
};

// Train-set mean/deviation scaling; constant features pass through as
// zeros instead of dividing by nothing.
struct Standardizer {
  std::vector<double> mean, scale;

  void fit(const std::vector<std::vector<double>>& X) {
    if (X.empty()) throw DataError("standardizer needs a non-empty training set");
    const std::size_t d = X[0].size();
    mean.assign(d, 0.0);
    scale.assign(d, 1.0);
    for (const auto& row : X)
      for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    for (double& v : mean) v /= static_cast<double>(X.size());
    std::vector<double> var(d, 0.0);
    for (const auto& row : X)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = row[j] - mean[j];
        var[j] += c * c;
      }
    for (std::size_t j = 0; j < d; ++j) {
      const double sd = std::sqrt(var[j] / static_cast<double>(X.size()));
      scale[j] = sd > 1e-12 ? sd : 1.0;
    }
  }

  std::vector<double> transform(const std::vector<double>& x) const {
    if (x.size() != mean.size())
      throw ShapeError("feature row has " + std::to_string(x.size()) +
                       " entries, standardizer saw " + std::to_string(mean.size()));
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / scale[j];
    return out;
  }
};

// ---- linear SVM, one vs rest ----

// Full-batch subgradient descent on L2-regularized hinge loss; the bias
// term rides along unregularized. Probabilities are a softmax over the
// five margins.
struct LinearSvmOvr {
  double lambda = 1e-3;
  double lr = 0.1;
  int iters = 1000;
  int dim = 0;
  std::vector<std::vector<double>> w;  // [class][dim+1], bias last

  void fit(const std::vector<std::vector<double>>& X, const std::vector<ClassLabel>& y) {
    detail::check_matrix(X, y);
    if (detail::count_classes(y) < 2)
      throw DataError("degenerate labels: linear SVM needs at least 2 classes");
    const std::size_t n = X.size();
    dim = static_cast<int>(X[0].size());
    w.assign(kNumClasses, std::vector<double>(static_cast<std::size_t>(dim) + 1, 0.0));

    std::vector<double> grad(static_cast<std::size_t>(dim) + 1);
    for (int c = 0; c < kNumClasses; ++c) {
      auto& wc = w[static_cast<std::size_t>(c)];
      for (int t = 0; t < iters; ++t) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const double lab = static_cast<int>(y[i]) == c ? 1.0 : -1.0;
          double m = wc[static_cast<std::size_t>(dim)];
          for (int j = 0; j < dim; ++j)
            m += wc[static_cast<std::size_t>(j)] * X[i][static_cast<std::size_t>(j)];
          if (lab * m < 1.0) {
            for (int j = 0; j < dim; ++j)
              grad[static_cast<std::size_t>(j)] -= lab * X[i][static_cast<std::size_t>(j)];
            grad[static_cast<std::size_t>(dim)] -= lab;
          }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        const double step = lr / (1.0 + 0.01 * t);
        for (int j = 0; j < dim; ++j) {
          const std::size_t js = static_cast<std::size_t>(j);
          wc[js] -= step * (grad[js] * inv_n + lambda * wc[js]);
        }
        wc[static_cast<std::size_t>(dim)] -=
            step * grad[static_cast<std::size_t>(dim)] * inv_n;
      }
    }
  }

  std::array<double, kNumClasses> margins(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim)
      throw ShapeError("feature row has " + std::to_string(x.size()) + " entries, model saw " +
                       std::to_string(dim));
    std::array<double, kNumClasses> m{};
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& wc = w[static_cast<std::size_t>(c)];
      double s = wc[static_cast<std::size_t>(dim)];
      for (int j = 0; j < dim; ++j)
        s += wc[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
      m[static_cast<std::size_t>(c)] = s;
    }
    return m;
  }

  std::vector<double> predict_proba(const std::vector<double>& x) const {
    return detail::softmax5(margins(x));
  }
};

// ---- gradient-boosted depth-2 trees ----

// One depth-2 regression tree. Leaves are laid out [left-left,
// left-right, right-left, right-right]; a child that never split keeps
// its value in the first slot of its pair.
struct GbtTree {
  int f0 = -1, f1 = -1, f2 = -1;
  double t0 = 0.0, t1 = 0.0, t2 = 0.0;
  std::array<double, 4> leaf{};

  double eval(const std::vector<double>& x) const {
    if (f0 < 0) return leaf[0];
    if (x[static_cast<std::size_t>(f0)] < t0)
      return f1 < 0 ? leaf[0] : (x[static_cast<std::size_t>(f1)] < t1 ? leaf[0] : leaf[1]);
    return f2 < 0 ? leaf[2] : (x[static_cast<std::size_t>(f2)] < t2 ? leaf[2] : leaf[3]);
  }
};

// Multi-class boosting with a softmax objective: each round fits one
// tree per class to that class's first/second-order gradients.
struct GradientBoostedTrees {
  int rounds = 100;
  double lr = 0.1;
  double reg_lambda = 1.0;
  int dim = 0;
  std::vector<std::array<GbtTree, kNumClasses>> trees;

  struct Split {
    bool found = false;
    int feat = -1;
    double thr = 0.0;
    double gain = 0.0;
  };

  // Exact greedy split of `idx` maximizing the usual second-order gain.
  Split best_split(const std::vector<std::vector<double>>& X, const std::vector<double>& g,
                   const std::vector<double>& h, const std::vector<int>& idx) const {
    Split best;
    double G = 0.0, H = 0.0;
    for (int i : idx) {
      G += g[static_cast<std::size_t>(i)];
      H += h[static_cast<std::size_t>(i)];
    }
    const double parent = G * G / (H + reg_lambda);
    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < dim; ++j) {
      order.clear();
      for (int i : idx)
        order.emplace_back(X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], i);
      std::sort(order.begin(), order.end());
      double GL = 0.0, HL = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        GL += g[static_cast<std::size_t>(order[k].second)];
        HL += h[static_cast<std::size_t>(order[k].second)];
        if (order[k].first == order[k + 1].first) continue;
        const double GR = G - GL, HR = H - HL;
        const double gain =
            GL * GL / (HL + reg_lambda) + GR * GR / (HR + reg_lambda) - parent;
        if (gain > best.gain + 1e-12) {
          best.found = true;
          best.feat = j;
          best.thr = 0.5 * (order[k].first + order[k + 1].first);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  double leaf_value(const std::vector<double>& g, const std::vector<double>& h,
                    const std::vector<int>& idx) const {
    double G = 0.0, H = 0.0;
    for (int i : idx) {
      G += g[static_cast<std::size_t>(i)];
      H += h[static_cast<std::size_t>(i)];
    }
    return -G / (H + reg_lambda);
  }

  GbtTree fit_tree(const std::vector<std::vector<double>>& X, const std::vector<double>& g,
                   const std::vector<double>& h, const std::vector<int>& idx) const {
    GbtTree tree;
    const Split root = best_split(X, g, h, idx);
    if (!root.found) {
      tree.leaf[0] = leaf_value(g, h, idx);
      return tree;
    }
    tree.f0 = root.feat;
    tree.t0 = root.thr;
    std::vector<int> left, right;
    for (int i : idx) {
      if (X[static_cast<std::size_t>(i)][static_cast<std::size_t>(root.feat)] < root.thr)
        left.push_back(i);
      else
        right.push_back(i);
    }
    const Split ls = best_split(X, g, h, left);
    if (ls.found) {
      tree.f1 = ls.feat;
      tree.t1 = ls.thr;
      std::vector<int> ll, lr;
      for (int i : left) {
        if (X[static_cast<std::size_t>(i)][static_cast<std::size_t>(ls.feat)] < ls.thr)
          ll.push_back(i);
        else
          lr.push_back(i);
      }
      tree.leaf[0] = leaf_value(g, h, ll);
      tree.leaf[1] = leaf_value(g, h, lr);
    } else {
      tree.leaf[0] = leaf_value(g, h, left);
    }
    const Split rs = best_split(X, g, h, right);
    if (rs.found) {
      tree.f2 = rs.feat;
      tree.t2 = rs.thr;
      std::vector<int> rl, rr;
      for (int i : right) {
        if (X[static_cast<std::size_t>(i)][static_cast<std::size_t>(rs.feat)] < rs.thr)
          rl.push_back(i);
        else
          rr.push_back(i);
      }
      tree.leaf[2] = leaf_value(g, h, rl);
      tree.leaf[3] = leaf_value(g, h, rr);
    } else {
      tree.leaf[2] = leaf_value(g, h, right);
    }
    return tree;
  }

  void fit(const std::vector<std::vector<double>>& X, const std::vector<ClassLabel>& y) {
    detail::check_matrix(X, y);
    if (detail::count_classes(y) < 2)
      throw DataError("degenerate labels: boosting needs at least 2 classes");
    const std::size_t n = X.size();
    dim = static_cast<int>(X[0].size());
    trees.clear();
    trees.reserve(static_cast<std::size_t>(rounds));

    std::vector<std::array<double, kNumClasses>> F(n, std::array<double, kNumClasses>{});
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> g(n), h(n);

    for (int r = 0; r < rounds; ++r) {
      std::array<GbtTree, kNumClasses> round_trees;
      for (int c = 0; c < kNumClasses; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
          const auto p = detail::softmax5(F[i]);
          const double pc = p[static_cast<std::size_t>(c)];
          g[i] = pc - (static_cast<int>(y[i]) == c ? 1.0 : 0.0);
          h[i] = std::max(pc * (1.0 - pc), 1e-10);
        }
        round_trees[static_cast<std::size_t>(c)] = fit_tree(X, g, h, all);
      }
      for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < kNumClasses; ++c)
          F[i][static_cast<std::size_t>(c)] +=
              lr * round_trees[static_cast<std::size_t>(c)].eval(X[i]);
      trees.push_back(std::move(round_trees));
    }
  }

  std::vector<double> predict_proba(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim)
      throw ShapeError("feature row has " + std::to_string(x.size()) + " entries, model saw " +
                       std::to_string(dim));
    std::array<double, kNumClasses> F{};
    for (const auto& round_trees : trees)
      for (int c = 0; c < kNumClasses; ++c)
        F[static_cast<std::size_t>(c)] += lr * round_trees[static_cast<std::size_t>(c)].eval(x);
    return detail::softmax5(F);
  }
};

// ---- boosted stumps with random undersampling ----

struct Stump {
  int feat = -1;
  double thr = 0.0;
  int left_cls = 0, right_cls = 0;

  int eval(const std::vector<double>& x) const {
    if (feat < 0) return left_cls;
    return x[static_cast<std::size_t>(feat)] < thr ? left_cls : right_cls;
  }
};

// SAMME boosting over decision stumps; each round fits its stump on a
// class-balanced random undersample but reweights on the full set.
struct RusBoost {
  int rounds = 100;
  std::uint64_t seed = 0;
  int dim = 0;
  std::vector<Stump> stumps;
  std::vector<double> alphas;
  std::array<double, kNumClasses> prior{};

  static Stump fit_stump(const std::vector<std::vector<double>>& X,
                         const std::vector<ClassLabel>& y, const std::vector<double>& w,
                         const std::vector<int>& idx, int dim) {
    std::array<double, kNumClasses> total{};
    for (int i : idx)
      total[static_cast<std::size_t>(static_cast<int>(y[static_cast<std::size_t>(i)]))] +=
          w[static_cast<std::size_t>(i)];
    double mass = 0.0;
    int majority = 0;
    for (int c = 0; c < kNumClasses; ++c) {
      mass += total[static_cast<std::size_t>(c)];
      if (total[static_cast<std::size_t>(c)] > total[static_cast<std::size_t>(majority)])
        majority = c;
    }

    Stump best;
    best.left_cls = best.right_cls = majority;
    double best_err = mass - total[static_cast<std::size_t>(majority)];

    std::vector<std::pair<double, int>> order;
    for (int j = 0; j < dim; ++j) {
      order.clear();
      for (int i : idx)
        order.emplace_back(X[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], i);
      std::sort(order.begin(), order.end());
      std::array<double, kNumClasses> left{};
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        const int i = order[k].second;
        left[static_cast<std::size_t>(static_cast<int>(y[static_cast<std::size_t>(i)]))] +=
            w[static_cast<std::size_t>(i)];
        if (order[k].first == order[k + 1].first) continue;
        int lc = 0, rc = 0;
        double lmass = 0.0;
        for (int c = 0; c < kNumClasses; ++c) {
          lmass += left[static_cast<std::size_t>(c)];
          if (left[static_cast<std::size_t>(c)] > left[static_cast<std::size_t>(lc)]) lc = c;
          const double rmc = total[static_cast<std::size_t>(c)] - left[static_cast<std::size_t>(c)];
          const double rbest =
              total[static_cast<std::size_t>(rc)] - left[static_cast<std::size_t>(rc)];
          if (rmc > rbest) rc = c;
        }
        const double err = (lmass - left[static_cast<std::size_t>(lc)]) +
                           ((mass - lmass) -
                            (total[static_cast<std::size_t>(rc)] - left[static_cast<std::size_t>(rc)]));
        if (err < best_err - 1e-15) {
          best_err = err;
          best.feat = j;
          best.thr = 0.5 * (order[k].first + order[k + 1].first);
          best.left_cls = lc;
          best.right_cls = rc;
        }
      }
    }
    return best;
  }

  void fit(const std::vector<std::vector<double>>& X, const std::vector<ClassLabel>& y) {
    detail::check_matrix(X, y);
    const std::size_t n = X.size();
    dim = static_cast<int>(X[0].size());
    stumps.clear();
    alphas.clear();

    std::array<std::vector<int>, kNumClasses> members;
    for (std::size_t i = 0; i < n; ++i)
      members[static_cast<std::size_t>(static_cast<int>(y[i]))].push_back(static_cast<int>(i));
    prior = {};
    for (int c = 0; c < kNumClasses; ++c)
      prior[static_cast<std::size_t>(c)] =
          static_cast<double>(members[static_cast<std::size_t>(c)].size()) /
          static_cast<double>(n);

    int k_classes = 0;
    std::size_t minority = n;
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& m = members[static_cast<std::size_t>(c)];
      if (m.empty()) continue;
      ++k_classes;
      minority = std::min(minority, m.size());
    }
    if (k_classes < 2)
      throw DataError("degenerate labels: boosting needs at least 2 classes");

    Rng rng(seed_for(seed, "rus.sample"));
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<int> sample;
    const double guard = 1.0 - 1.0 / static_cast<double>(k_classes);

    for (int t = 0; t < rounds; ++t) {
      sample.clear();
      for (int c = 0; c < kNumClasses; ++c) {
        auto m = members[static_cast<std::size_t>(c)];
        if (m.empty()) continue;
        rng.shuffle(m);
        for (std::size_t k = 0; k < minority; ++k) sample.push_back(m[k]);
      }
      const Stump stump = fit_stump(X, y, w, sample, dim);

      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (stump.eval(X[i]) != static_cast<int>(y[i])) err += w[i];
      if (err >= guard) continue;  // weaker than chance on this round's weights
      err = std::max(err, 1e-10);
      const double alpha =
          std::log((1.0 - err) / err) + std::log(static_cast<double>(k_classes) - 1.0);

      stumps.push_back(stump);
      alphas.push_back(alpha);

      double wsum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (stump.eval(X[i]) != static_cast<int>(y[i])) w[i] *= std::exp(alpha);
        wsum += w[i];
      }
      for (double& v : w) v /= wsum;
    }
  }

  std::vector<double> predict_proba(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim)
      throw ShapeError("feature row has " + std::to_string(x.size()) + " entries, model saw " +
                       std::to_string(dim));
    std::array<double, kNumClasses> votes{};
    double total = 0.0;
    for (std::size_t t = 0; t < stumps.size(); ++t) {
      votes[static_cast<std::size_t>(stumps[t].eval(x))] += alphas[t];
      total += alphas[t];
    }
    std::vector<double> p(kNumClasses);
    if (total <= 0.0) {
      // no stump cleared chance; fall back to the training prior
      for (int c = 0; c < kNumClasses; ++c)
        p[static_cast<std::size_t>(c)] = prior[static_cast<std::size_t>(c)];
      return p;
    }
    for (int c = 0; c < kNumClasses; ++c)
      p[static_cast<std::size_t>(c)] = votes[static_cast<std::size_t>(c)] / total;
    return p;
  }
};

// ---- logistic meta-classifier ----

// Multinomial logistic regression by full-batch gradient descent with a
// loss-delta stopping rule.
struct LogisticMeta {
  double lr = 0.5;
  double tol = 1e-8;
  int max_iters = 5000;
  int dim = 0;
  int iters_run = 0;
  std::vector<std::vector<double>> w;  // [class][dim+1], bias last

  void fit(const std::vector<std::vector<double>>& X, const std::vector<ClassLabel>& y) {
    detail::check_matrix(X, y);
    for (const auto& row : X)
      for (double v : row)
        if (!std::isfinite(v)) throw DataError("non-finite meta-features reached the meta-model");
    const std::size_t n = X.size();
    dim = static_cast<int>(X[0].size());
    w.assign(kNumClasses, std::vector<double>(static_cast<std::size_t>(dim) + 1, 0.0));

    std::vector<std::vector<double>> grad(
        kNumClasses, std::vector<double>(static_cast<std::size_t>(dim) + 1, 0.0));
    double prev_loss = std::numeric_limits<double>::infinity();
    iters_run = 0;
    for (int t = 0; t < max_iters; ++t) {
      for (auto& gc : grad) std::fill(gc.begin(), gc.end(), 0.0);
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::array<double, kNumClasses> scores{};
        for (int c = 0; c < kNumClasses; ++c) {
          const auto& wc = w[static_cast<std::size_t>(c)];
          double s = wc[static_cast<std::size_t>(dim)];
          for (int j = 0; j < dim; ++j)
            s += wc[static_cast<std::size_t>(j)] * X[i][static_cast<std::size_t>(j)];
          scores[static_cast<std::size_t>(c)] = s;
        }
        const auto p = detail::softmax5(scores);
        loss -= std::log(std::max(p[static_cast<std::size_t>(static_cast<int>(y[i]))], 1e-300));
        for (int c = 0; c < kNumClasses; ++c) {
          const double d = p[static_cast<std::size_t>(c)] - (static_cast<int>(y[i]) == c ? 1.0 : 0.0);
          auto& gc = grad[static_cast<std::size_t>(c)];
          for (int j = 0; j < dim; ++j)
            gc[static_cast<std::size_t>(j)] += d * X[i][static_cast<std::size_t>(j)];
          gc[static_cast<std::size_t>(dim)] += d;
        }
      }
      loss /= static_cast<double>(n);
      const double inv_n = 1.0 / static_cast<double>(n);
      for (int c = 0; c < kNumClasses; ++c)
        for (std::size_t j = 0; j < w[static_cast<std::size_t>(c)].size(); ++j)
          w[static_cast<std::size_t>(c)][j] -= lr * grad[static_cast<std::size_t>(c)][j] * inv_n;
      iters_run = t + 1;
      if (std::abs(prev_loss - loss) < tol) break;
      prev_loss = loss;
    }
  }

  std::vector<double> predict_proba(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim)
      throw ShapeError("meta-feature row has " + std::to_string(x.size()) +
                       " entries, model saw " + std::to_string(dim));
    std::array<double, kNumClasses> scores{};
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& wc = w[static_cast<std::size_t>(c)];
      double s = wc[static_cast<std::size_t>(dim)];
      for (int j = 0; j < dim; ++j)
        s += wc[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
      scores[static_cast<std::size_t>(c)] = s;
    }
    return detail::softmax5(scores);
  }
};

// ---- stacked ensemble ----

struct BaseLearners {
  LinearSvmOvr svm;
  GradientBoostedTrees gbt;
  RusBoost rus;
};

inline BaseLearners train_base_learners(const std::vector<std::vector<double>>& X,
                                        const std::vector<ClassLabel>& y, std::uint64_t seed) {
  detail::check_matrix(X, y);
  if (detail::count_classes(y) < 2)
    throw DataError("degenerate labels: base learners need at least 2 classes");
  BaseLearners base;
  base.svm.fit(X, y);
  base.gbt.fit(X, y);
  base.rus.seed = seed;
  base.rus.fit(X, y);
  return base;
}

struct StackedConfig {
  int folds = 5;
  bool in_sample = false;  // reproduce naive same-data stacking
  std::uint64_t seed = 0;
};

// Stacking ensemble: three base learners feed a logistic meta-model over
// their concatenated class probabilities. Meta-features come from k-fold
// out-of-fold predictions unless in-sample stacking is asked for.
struct StackedModel {
  Imputer imputer;
  Standardizer scaler;
  BaseLearners base;
  LogisticMeta meta;

  void fit(const Dataset& train, const StackedConfig& cfg) {
    if (cfg.folds < 2) throw ConfigError("stacking needs at least 2 folds, got " +
                                         std::to_string(cfg.folds));
    if (train.size() < 2) throw DataError("stacked training set needs at least 2 rows");
    if (!cfg.in_sample && static_cast<std::size_t>(cfg.folds) > train.size())
      throw ConfigError("cannot cut " + std::to_string(train.size()) + " rows into " +
                        std::to_string(cfg.folds) + " folds");

    imputer.fit(train);
    std::vector<std::vector<double>> X;
    std::vector<ClassLabel> y;
    X.reserve(train.size());
    for (const auto& row : train) {
      X.push_back(imputer.transform(row.values));
      y.push_back(row.label);
    }
    if (detail::count_classes(y) < 2)
      throw DataError("degenerate labels: stacking needs at least 2 classes");
    scaler.fit(X);
    for (auto& row : X) row = scaler.transform(row);
    const std::size_t n = X.size();

    std::vector<std::vector<double>> meta_X(n);
    if (cfg.in_sample) {
      BaseLearners full = train_base_learners(X, y, seed_for(cfg.seed, "base.insample"));
      for (std::size_t i = 0; i < n; ++i) meta_X[i] = concat_probas(full, X[i]);
    } else {
      // per-class round-robin fold assignment over a seeded shuffle
      std::vector<int> fold(n, 0);
      std::array<std::vector<int>, kNumClasses> members;
      for (std::size_t i = 0; i < n; ++i)
        members[static_cast<std::size_t>(static_cast<int>(y[i]))].push_back(static_cast<int>(i));
      Rng fold_rng(seed_for(cfg.seed, "stack.folds"));
      for (auto& m : members) {
        fold_rng.shuffle(m);
        for (std::size_t k = 0; k < m.size(); ++k)
          fold[static_cast<std::size_t>(m[k])] = static_cast<int>(k) % cfg.folds;
      }
      for (int f = 0; f < cfg.folds; ++f) {
        std::vector<std::vector<double>> Xf;
        std::vector<ClassLabel> yf;
        for (std::size_t i = 0; i < n; ++i)
          if (fold[i] != f) {
            Xf.push_back(X[i]);
            yf.push_back(y[i]);
          }
        BaseLearners fb = train_base_learners(
            Xf, yf, seed_for(cfg.seed, "base.fold." + std::to_string(f)));
        for (std::size_t i = 0; i < n; ++i)
          if (fold[i] == f) meta_X[i] = concat_probas(fb, X[i]);
      }
    }

    base = train_base_learners(X, y, seed_for(cfg.seed, "base.final"));
    meta.fit(meta_X, y);
  }

  static std::vector<double> concat_probas(const BaseLearners& b, const std::vector<double>& x) {
    std::vector<double> out;
    out.reserve(3 * kNumClasses);
    for (const auto& p : {b.svm.predict_proba(x), b.gbt.predict_proba(x), b.rus.predict_proba(x)})
      out.insert(out.end(), p.begin(), p.end());
    return out;
  }

  std::vector<double> predict_proba(const std::vector<double>& raw) const {
    const auto x = scaler.transform(imputer.transform(raw));
    return meta.predict_proba(concat_probas(base, x));
  }

  ClassLabel predict(const std::vector<double>& raw) const {
    const auto p = predict_proba(raw);
    int bestc = 0;
    for (int c = 1; c < kNumClasses; ++c)
      if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(bestc)]) bestc = c;
    return static_cast<ClassLabel>(bestc);
  }

  // Container stores float32; doubles truncate on save. Tree feature
  // indices ride along as floats, exact for any realistic dimension.
  Checkpoint to_checkpoint() const {
    Checkpoint cp;
    auto put = [&cp](const std::string& name, std::vector<std::uint32_t> dims,
                     const std::vector<double>& vals) {
      CheckpointBlob b;
      b.dims = std::move(dims);
      b.values.assign(vals.begin(), vals.end());
      cp[name] = std::move(b);
    };
    const auto d = static_cast<std::uint32_t>(imputer.medians.size());
    put("imputer.medians", {d}, imputer.medians);
    put("scaler.mean", {d}, scaler.mean);
    put("scaler.scale", {d}, scaler.scale);

    std::vector<double> flat;
    for (const auto& wc : base.svm.w) flat.insert(flat.end(), wc.begin(), wc.end());
    put("svm.w", {kNumClasses, d + 1}, flat);

    flat.clear();
    for (const auto& round_trees : base.gbt.trees)
      for (const auto& t : round_trees) {
        flat.insert(flat.end(),
                    {static_cast<double>(t.f0), t.t0, static_cast<double>(t.f1), t.t1,
                     static_cast<double>(t.f2), t.t2, t.leaf[0], t.leaf[1], t.leaf[2],
                     t.leaf[3]});
      }
    put("gbt.trees", {static_cast<std::uint32_t>(base.gbt.trees.size() * kNumClasses), 10},
        flat);

    flat.clear();
    for (std::size_t t = 0; t < base.rus.stumps.size(); ++t) {
      const Stump& s = base.rus.stumps[t];
      flat.insert(flat.end(), {static_cast<double>(s.feat), s.thr,
                               static_cast<double>(s.left_cls), static_cast<double>(s.right_cls),
                               base.rus.alphas[t]});
    }
    put("rus.stumps", {static_cast<std::uint32_t>(base.rus.stumps.size()), 5}, flat);
    put("rus.prior", {kNumClasses},
        std::vector<double>(base.rus.prior.begin(), base.rus.prior.end()));

    flat.clear();
    for (const auto& wc : meta.w) flat.insert(flat.end(), wc.begin(), wc.end());
    put("meta.w", {kNumClasses, static_cast<std::uint32_t>(3 * kNumClasses) + 1}, flat);

    put("stacked.meta", {2}, {static_cast<double>(d), base.gbt.lr});
    return cp;
  }

  void load(const Checkpoint& cp) {
    auto blob = [&cp](const std::string& name) -> const CheckpointBlob& {
      auto it = cp.find(name);
      if (it == cp.end()) throw DataError("checkpoint is missing tensor '" + name + "'");
      return it->second;
    };
    auto expect = [](const CheckpointBlob& b, std::vector<std::uint32_t> dims,
                     const std::string& name) {
      if (b.dims != dims)
        throw DataError("checkpoint tensor '" + name + "' has unexpected shape");
    };
    const auto& mb = blob("stacked.meta");
    expect(mb, {2}, "stacked.meta");
    const auto d = static_cast<std::uint32_t>(mb.values[0]);
    const int dim = static_cast<int>(d);

    const auto& im = blob("imputer.medians");
    expect(im, {d}, "imputer.medians");
    imputer.medians.assign(im.values.begin(), im.values.end());
    const auto& sm = blob("scaler.mean");
    expect(sm, {d}, "scaler.mean");
    scaler.mean.assign(sm.values.begin(), sm.values.end());
    const auto& ss = blob("scaler.scale");
    expect(ss, {d}, "scaler.scale");
    scaler.scale.assign(ss.values.begin(), ss.values.end());

    const auto& sw = blob("svm.w");
    expect(sw, {kNumClasses, d + 1}, "svm.w");
    base.svm.dim = dim;
    base.svm.w.assign(kNumClasses, std::vector<double>(d + 1));
    for (std::size_t c = 0; c < kNumClasses; ++c)
      for (std::size_t j = 0; j <= d; ++j)
        base.svm.w[c][j] = sw.values[c * (d + 1) + j];

    const auto& gt = blob("gbt.trees");
    if (gt.dims.size() != 2 || gt.dims[1] != 10 || gt.dims[0] % kNumClasses != 0)
      throw DataError("checkpoint tensor 'gbt.trees' has unexpected shape");
    base.gbt.dim = dim;
    base.gbt.lr = mb.values[1];
    base.gbt.rounds = static_cast<int>(gt.dims[0] / kNumClasses);
    base.gbt.trees.assign(static_cast<std::size_t>(base.gbt.rounds), {});
    for (std::uint32_t row = 0; row < gt.dims[0]; ++row) {
      GbtTree& t = base.gbt.trees[row / kNumClasses][row % kNumClasses];
      const float* v = gt.values.data() + static_cast<std::size_t>(row) * 10;
      t.f0 = static_cast<int>(v[0]);
      t.t0 = v[1];
      t.f1 = static_cast<int>(v[2]);
      t.t1 = v[3];
      t.f2 = static_cast<int>(v[4]);
      t.t2 = v[5];
      for (int k = 0; k < 4; ++k) t.leaf[static_cast<std::size_t>(k)] = v[6 + k];
    }

    const auto& rs = blob("rus.stumps");
    if (rs.dims.size() != 2 || rs.dims[1] != 5)
      throw DataError("checkpoint tensor 'rus.stumps' has unexpected shape");
    base.rus.dim = dim;
    base.rus.stumps.assign(rs.dims[0], Stump{});
    base.rus.alphas.assign(rs.dims[0], 0.0);
    for (std::uint32_t t = 0; t < rs.dims[0]; ++t) {
      const float* v = rs.values.data() + static_cast<std::size_t>(t) * 5;
      base.rus.stumps[t].feat = static_cast<int>(v[0]);
      base.rus.stumps[t].thr = v[1];
      base.rus.stumps[t].left_cls = static_cast<int>(v[2]);
      base.rus.stumps[t].right_cls = static_cast<int>(v[3]);
      base.rus.alphas[t] = v[4];
    }
    const auto& rp = blob("rus.prior");
    expect(rp, {kNumClasses}, "rus.prior");
    for (std::size_t c = 0; c < kNumClasses; ++c) base.rus.prior[c] = rp.values[c];

    const auto& mw = blob("meta.w");
    expect(mw, {kNumClasses, static_cast<std::uint32_t>(3 * kNumClasses) + 1}, "meta.w");
    meta.dim = 3 * kNumClasses;
    const std::size_t md = static_cast<std::size_t>(meta.dim) + 1;
    meta.w.assign(kNumClasses, std::vector<double>(md));
    for (std::size_t c = 0; c < kNumClasses; ++c)
      for (std::size_t j = 0; j < md; ++j) meta.w[c][j] = mw.values[c * md + j];
  }

  static StackedModel from_checkpoint(const Checkpoint& cp) {
    StackedModel m;
    m.load(cp);
    return m;
  }
};

// ---- evaluation ----

struct ClassMetrics {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  bool has_precision = false, has_recall = false, has_f1 = false;
};

struct EvaluationReport {
  std::array<std::array<long long, kNumClasses>, kNumClasses> confusion{};  // [truth][pred]
  std::array<ClassMetrics, kNumClasses> per_class{};
  double accuracy = 0.0;
  long long total = 0;
};

inline EvaluationReport evaluate(const std::vector<ClassLabel>& truth,
                                 const std::vector<ClassLabel>& predicted) {
  if (truth.empty()) throw DataError("evaluation set is empty");
  if (truth.size() != predicted.size())
    throw ShapeError("got " + std::to_string(truth.size()) + " labels but " +
                     std::to_string(predicted.size()) + " predictions");
  EvaluationReport rep;
  rep.total = static_cast<long long>(truth.size());
  long long trace = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = static_cast<int>(truth[i]);
    const int p = static_cast<int>(predicted[i]);
    ++rep.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    if (t == p) ++trace;
  }
  rep.accuracy = static_cast<double>(trace) / static_cast<double>(rep.total);

  for (int c = 0; c < kNumClasses; ++c) {
    long long tp = rep.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    long long row = 0, col = 0;
    for (int k = 0; k < kNumClasses; ++k) {
      row += rep.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
      col += rep.confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
    }
    ClassMetrics& m = rep.per_class[static_cast<std::size_t>(c)];
    if (col > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(col);
      m.has_precision = true;
    }
    if (row > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(row);
      m.has_recall = true;
    }
    if (m.has_precision && m.has_recall && m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
      m.has_f1 = true;
    }
  }
  return rep;
}

inline std::string report_table(const EvaluationReport& rep) {
  auto cell = [](double v, bool defined) {
    if (!defined) return std::string("undef");
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  std::string out = "class  precision  recall  f1\n";
  for (int c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& m = rep.per_class[static_cast<std::size_t>(c)];
    char line[96];
    std::snprintf(line, sizeof(line), "%-5s  %-9s  %-6s  %s\n",
                  to_string(static_cast<ClassLabel>(c)), cell(m.precision, m.has_precision).c_str(),
                  cell(m.recall, m.has_recall).c_str(), cell(m.f1, m.has_f1).c_str());
    out += line;
  }
  char acc[48];
  std::snprintf(acc, sizeof(acc), "accuracy  %.4f\n", rep.accuracy);
  out += acc;
  return out;
}

inline void write_confusion_csv(const std::string& path, const EvaluationReport& rep) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "truth";
  for (int c = 0; c < kNumClasses; ++c) out << "," << to_string(static_cast<ClassLabel>(c));
  out << "\n";
  for (int t = 0; t < kNumClasses; ++t) {
    out << to_string(static_cast<ClassLabel>(t));
    for (int p = 0; p < kNumClasses; ++p)
      out << "," << rep.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    out << "\n";
  }
  if (!out.flush()) throw DataError("write to '" + path + "' failed");
}

}  // namespace rqae
