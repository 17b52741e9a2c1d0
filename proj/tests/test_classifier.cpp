#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <vector>

#include "rqae/cnn_classifier.hpp"
#include "rqae/rng.hpp"

using namespace rqae;

namespace {

// Linearly separable clusters: class c lights up its own quadrant-ish
// block of the 14x14 map, plus mild noise.
Mat cluster_map(Rng& rng, int cls) {
  Mat m(14, 14);
  for (long long i = 0; i < 14; ++i)
    for (long long j = 0; j < 14; ++j) m(i, j) = rng.uniform(0.0, 0.15);
  const int bi = (cls % 3) * 4, bj = (cls / 3) * 6;
  for (long long i = bi; i < bi + 4; ++i)
    for (long long j = bj; j < bj + 4; ++j) m(i, j) = rng.uniform(0.8, 1.0);
  return m;
}

void cluster_set(std::uint64_t seed, int per_class, int n_classes, std::vector<Mat>& xs,
                 std::vector<ClassLabel>& ys) {
  Rng rng(seed);
  for (int c = 0; c < n_classes; ++c)
    for (int r = 0; r < per_class; ++r) {
      xs.push_back(cluster_map(rng, c));
      ys.push_back(static_cast<ClassLabel>(c));
    }
}

}  // namespace

TEST_CASE("latent normalization maps onto the unit interval") {
  Mat m(2, 2);
  m(0, 0) = -3.0;
  m(0, 1) = 1.0;
  m(1, 0) = 5.0;
  m(1, 1) = 3.0;
  auto v = normalize_latent<double>(m);
  CHECK(v[0] == 0.0);
  CHECK(v[2] == 1.0);
  CHECK(v[1] == Catch::Approx(0.5).epsilon(1e-12));

  Mat flat(2, 2, 4.2);
  auto f = normalize_latent<double>(flat);
  for (double x : f) CHECK(x == 0.5);

  Mat bad(1, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(normalize_latent<double>(bad), DataError);
}

TEST_CASE("classifier geometry for the 14x14 latent") {
  CnnClassifier<double> clf(14);
  CHECK(clf.h1 == 7);
  CHECK(clf.h2 == 3);
  CHECK(clf.flat == 288);
  CHECK_THROWS_AS(CnnClassifier<double>(2), ConfigError);
}

TEST_CASE("prediction refuses to run without weights") {
  CnnClassifier<double> clf(14);
  Mat z(14, 14, 0.3);
  CHECK_THROWS_AS(clf.predict(z), NotReadyError);
}

TEST_CASE("prediction rejects maps of the wrong side length") {
  CnnClassifier<double> clf(14);
  clf.init(1);
  Mat z(12, 12, 0.3);
  CHECK_THROWS_AS(clf.predict(z), ShapeError);
}

TEST_CASE("zeroed output head yields the uniform distribution") {
  CnnClassifier<double> clf(14);
  clf.init(4);
  std::fill(clf.f6.w.begin(), clf.f6.w.end(), 0.0);
  std::fill(clf.f6.b.begin(), clf.f6.b.end(), 0.0);
  Rng rng(8);
  Mat z(14, 14);
  for (auto& v : z.v) v = rng.uniform(0.0, 1.0);
  auto p = clf.predict(z);
  REQUIRE(p.size() == 5u);
  for (double v : p) CHECK(v == Catch::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("probabilities sum to one on random inputs") {
  CnnClassifier<double> clf(14);
  clf.init(12);
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    Mat z(14, 14);
    for (auto& v : z.v) v = rng.uniform(-2.0, 2.0);
    auto p = clf.predict(z);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
}

TEST_CASE("training demands at least two classes") {
  std::vector<Mat> xs;
  std::vector<ClassLabel> ys;
  Rng rng(3);
  for (int i = 0; i < 4; ++i) {
    xs.push_back(cluster_map(rng, 1));
    ys.push_back(ClassLabel::MI);
  }
  CnnClassifier<double> clf(14);
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_WITH(train_cnn_classifier(clf, xs, ys, cfg),
                    Catch::Matchers::ContainsSubstring("degenerate"));

  std::vector<Mat> none;
  std::vector<ClassLabel> no_labels;
  CHECK_THROWS_AS(train_cnn_classifier(clf, none, no_labels, cfg), DataError);
}

TEST_CASE("training rejects mismatched embedding and label counts") {
  std::vector<Mat> xs(3, Mat(14, 14, 0.1));
  std::vector<ClassLabel> ys(2, ClassLabel::HC);
  CnnClassifier<double> clf(14);
  TrainConfig cfg;
  CHECK_THROWS_AS(train_cnn_classifier(clf, xs, ys, cfg), ShapeError);
}

TEST_CASE("separable five-class clusters reach full training accuracy within 200 epochs") {
  std::vector<Mat> xs;
  std::vector<ClassLabel> ys;
  cluster_set(77, 4, 5, xs, ys);

  CnnClassifier<double> clf(14);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 1;
  LossCurve curve = train_cnn_classifier(clf, xs, ys, cfg);
  CHECK(curve.train.back() < curve.train.front());

  int correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (clf.predict_label(xs[i]) == ys[i]) ++correct;
  CHECK(correct == static_cast<int>(xs.size()));
}

TEST_CASE("classifier training is deterministic for a fixed seed") {
  std::vector<Mat> xs;
  std::vector<ClassLabel> ys;
  cluster_set(78, 3, 3, xs, ys);

  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 6;
  CnnClassifier<double> a(14), b(14);
  LossCurve ca = train_cnn_classifier(a, xs, ys, cfg);
  LossCurve cb = train_cnn_classifier(b, xs, ys, cfg);
  CHECK(ca.train == cb.train);
  CHECK(a.f6.w == b.f6.w);

  auto pa = a.predict(xs[0]);
  auto pb = b.predict(xs[0]);
  CHECK(pa == pb);
}

TEST_CASE("classifier checkpoints round-trip bitwise") {
  std::vector<Mat> xs;
  std::vector<ClassLabel> ys;
  cluster_set(79, 2, 4, xs, ys);

  CnnClassifier<double> clf(14);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 17;
  train_cnn_classifier(clf, xs, ys, cfg);

  const std::string path = "clf_roundtrip.ckpt";
  save_checkpoint(path, clf.to_checkpoint());
  CnnClassifier<double> back = CnnClassifier<double>::from_checkpoint(load_checkpoint(path));
  CHECK(back.input_hw == 14);
  // the on-disk format is 32-bit, so weights come back float-truncated
  REQUIRE(back.f3.w.size() == clf.f3.w.size());
  for (std::size_t i = 0; i < clf.f3.w.size(); ++i)
    CHECK(back.f3.w[i] == static_cast<double>(static_cast<float>(clf.f3.w[i])));
  auto pa = clf.predict(xs[0]);
  auto pb = back.predict(xs[0]);
  for (int k = 0; k < kNumClasses; ++k)
    CHECK(pb[static_cast<std::size_t>(k)] ==
          Catch::Approx(pa[static_cast<std::size_t>(k)]).margin(1e-4));
  std::remove(path.c_str());
}
