#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "rqae/autoencoder.hpp"
#include "rqae/rng.hpp"
#include "rqae/ssim.hpp"

using namespace rqae;

namespace {

// Smooth two-dimensional waves: compressible content a small latent can
// actually represent, unlike white noise.
std::vector<float> wave_subject(Rng& rng, int channels, int size) {
  std::vector<float> v(static_cast<std::size_t>(channels) * size * size);
  for (int c = 0; c < channels; ++c) {
    const double fx = rng.uniform(0.5, 2.0), fy = rng.uniform(0.5, 2.0);
    const double px = rng.uniform(0.0, 6.28), py = rng.uniform(0.0, 6.28);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) {
        double s = std::sin(2.0 * M_PI * fx * i / size + px) *
                   std::sin(2.0 * M_PI * fy * j / size + py);
        v[(static_cast<std::size_t>(c) * size + i) * size + j] =
            static_cast<float>(0.5 + 0.45 * s);
      }
  }
  return v;
}

std::vector<std::vector<float>> wave_set(std::uint64_t seed, int n, int channels, int size) {
  Rng rng(seed);
  std::vector<std::vector<float>> subjects;
  for (int i = 0; i < n; ++i) subjects.push_back(wave_subject(rng, channels, size));
  return subjects;
}

}  // namespace

TEST_CASE("autoencoder construction validates its geometry") {
  CHECK_THROWS_AS(Autoencoder<float>(20, 15), ConfigError);
  CHECK_THROWS_AS(Autoencoder<float>(0, 15), ConfigError);
  CHECK_THROWS_AS(Autoencoder<float>(32, 0), ConfigError);
  Autoencoder<float> ae(32, 3);
  CHECK(ae.latent_size == 2);
  Autoencoder<float> big(224, 15);
  CHECK(big.latent_size == 14);
}

TEST_CASE("encode refuses to run without weights") {
  Autoencoder<float> ae(32, 2);
  std::vector<float> x(ae.input_count(), 0.5f);
  CHECK_THROWS_AS(ae.encode(x), NotReadyError);
}

TEST_CASE("encode emits a latent map of one sixteenth the side length") {
  Autoencoder<float> ae(32, 2);
  ae.init(99);
  Rng rng(1);
  std::vector<float> x(ae.input_count());
  for (auto& v : x) v = static_cast<float>(rng.uniform(0.0, 1.0));
  Mat z = ae.encode(x);
  CHECK(z.rows == 2);
  CHECK(z.cols == 2);

  // identical inputs produce identical embeddings
  Mat z2 = ae.encode(x);
  CHECK(z.v == z2.v);
}

TEST_CASE("full-scale geometry reduces 224 to a 14x14 latent map") {
  Autoencoder<float> ae(224, 15);
  ae.init(7);
  Rng rng(2);
  std::vector<float> x(ae.input_count());
  for (auto& v : x) v = static_cast<float>(rng.uniform(0.0, 1.0));
  Mat z = ae.encode(x);
  CHECK(z.rows == 14);
  CHECK(z.cols == 14);
}

TEST_CASE("reconstruction matches the input shape") {
  Autoencoder<float> ae(32, 5);
  ae.init(3);
  std::vector<float> x(ae.input_count(), 0.25f);
  const auto& y = ae.forward(x);
  CHECK(y.size() == x.size());
  for (float v : y) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
}

TEST_CASE("training requires at least two subjects") {
  Autoencoder<float> ae(32, 2);
  std::vector<std::vector<float>> one = {std::vector<float>(ae.input_count(), 0.5f)};
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train_autoencoder(ae, one, cfg), DataError);
}

TEST_CASE("training rejects unnormalized inputs") {
  Autoencoder<float> ae(32, 2);
  std::vector<std::vector<float>> subjects(2, std::vector<float>(ae.input_count(), 0.5f));
  subjects[1][7] = 1.5f;
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train_autoencoder(ae, subjects, cfg), DataError);
}

TEST_CASE("training config validation") {
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(validate_train_config(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(validate_train_config(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.train_fraction = 1.0;
  CHECK_THROWS_AS(validate_train_config(cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = -1e-3;
  CHECK_THROWS_AS(validate_train_config(cfg), ConfigError);
}

TEST_CASE("same seed trains to bit-identical loss curves") {
  auto subjects = wave_set(10, 4, 2, 32);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 2;
  cfg.seed = 5;

  Autoencoder<float> a(32, 2), b(32, 2);
  LossCurve ca = train_autoencoder(a, subjects, cfg);
  LossCurve cb = train_autoencoder(b, subjects, cfg);
  REQUIRE(ca.train.size() == 3u);
  CHECK(ca.train == cb.train);
  CHECK(ca.val == cb.val);

  // and to bit-identical weights
  CHECK(a.enc1.w == b.enc1.w);
  CHECK(a.dec4.w == b.dec4.w);
}

TEST_CASE("zero learning rate leaves the loss curve flat") {
  auto subjects = wave_set(11, 4, 2, 32);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 2;
  cfg.seed = 9;
  cfg.learning_rate = 0.0;

  Autoencoder<float> ae(32, 2);
  LossCurve curve = train_autoencoder(ae, subjects, cfg);
  for (std::size_t i = 1; i < curve.train.size(); ++i) {
    CHECK(std::abs(curve.train[i] - curve.train[0]) < 1e-12);
    CHECK(std::abs(curve.val[i] - curve.val[0]) < 1e-12);
  }
}

TEST_CASE("ten wave subjects for fifty epochs cut the loss by more than half") {
  auto subjects = wave_set(7, 10, 2, 32);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 16;
  cfg.seed = 7;

  Autoencoder<float> ae(32, 2);
  LossCurve curve = train_autoencoder(ae, subjects, cfg);
  REQUIRE(curve.train.size() == 50u);
  CHECK(curve.train.back() < 0.5 * curve.train.front());

  // the reconstruction must beat a do-nothing constant output on both
  // loss terms; the tiny 2x2 latent caps how much similarity to expect
  std::vector<float> x = subjects[0];
  const auto& rec = ae.forward(x);
  std::vector<float> y(rec.begin(), rec.end());
  std::vector<float> flat(x.size(), 0.5f);
  CHECK(ae_loss(x, y, 2, 32, 32) < ae_loss(x, flat, 2, 32, 32));
  CHECK(mssim(x, y, 2, 32, 32) > mssim(x, flat, 2, 32, 32));
}

TEST_CASE("an absurd learning rate raises a divergence error naming the epoch") {
  auto subjects = wave_set(13, 4, 2, 32);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 4;
  cfg.seed = 2;
  cfg.learning_rate = 1e8;

  Autoencoder<float> ae(32, 2);
  CHECK_THROWS_WITH(train_autoencoder(ae, subjects, cfg),
                    Catch::Matchers::ContainsSubstring("epoch") &&
                        Catch::Matchers::ContainsSubstring("learning rate"));
}

TEST_CASE("checkpoints round-trip the model bitwise") {
  auto subjects = wave_set(17, 3, 2, 32);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 21;

  Autoencoder<float> ae(32, 2);
  train_autoencoder(ae, subjects, cfg);

  const std::string path = "ae_roundtrip.ckpt";
  save_checkpoint(path, ae.to_checkpoint());
  Autoencoder<float> back = Autoencoder<float>::from_checkpoint(load_checkpoint(path));
  CHECK(back.image_size == 32);
  CHECK(back.channels == 2);
  CHECK(back.enc1.w == ae.enc1.w);
  CHECK(back.dec4.b == ae.dec4.b);

  Mat za = ae.encode(subjects[0]);
  Mat zb = back.encode(subjects[0]);
  CHECK(za.v == zb.v);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint loading rejects missing and misshapen tensors") {
  Autoencoder<float> ae(32, 2);
  ae.init(1);
  Checkpoint cp = ae.to_checkpoint();
  cp.erase("enc2.w");
  Autoencoder<float> fresh(32, 2);
  CHECK_THROWS_AS(fresh.load(cp), DataError);

  Checkpoint cp2 = ae.to_checkpoint();
  cp2["enc2.w"].values.pop_back();
  CHECK_THROWS_AS(fresh.load(cp2), DataError);
}

TEST_CASE("loss curves serialize as epoch rows") {
  LossCurve curve;
  curve.train = {0.5, 0.25};
  curve.val = {0.75, 0.0625};
  const std::string path = "curve_test.csv";
  write_loss_curve(path, curve);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,train_loss,val_loss");
  std::getline(in, line);
  CHECK(line == "1,0.5,0.75");
  std::getline(in, line);
  CHECK(line == "2,0.25,0.0625");
  std::remove(path.c_str());
}
