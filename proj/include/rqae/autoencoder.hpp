#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "rqae/adam.hpp"
#include "rqae/checkpoint.hpp"
#include "rqae/common.hpp"
#include "rqae/csv.hpp"
#include "rqae/nn.hpp"
#include "rqae/rng.hpp"
#include "rqae/ssim.hpp"

namespace rqae {

// Shared optimizer/schedule settings for the autoencoder and the
// classifier heads.
struct TrainConfig {
  int epochs = 50;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

inline void validate_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1)
    throw ConfigError("epochs must be >= 1, got " + std::to_string(cfg.epochs));
  if (cfg.batch_size < 1)
    throw ConfigError("batch size must be >= 1, got " + std::to_string(cfg.batch_size));
  if (!(cfg.train_fraction > 0.0) || !(cfg.train_fraction < 1.0))
    throw ConfigError("train fraction must lie strictly between 0 and 1, got " +
                      fmt_full(cfg.train_fraction));
  if (cfg.learning_rate < 0.0)
    throw ConfigError("learning rate must be >= 0, got " + fmt_full(cfg.learning_rate));
}

struct LossCurve {
  std::vector<double> train;
  std::vector<double> val;
};

inline void write_loss_curve(const std::string& path, const LossCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t i = 0; i < curve.train.size(); ++i) {
    double v = i < curve.val.size() ? curve.val[i] : curve.train[i];
    out << (i + 1) << "," << fmt_full(curve.train[i]) << "," << fmt_full(v) << "\n";
  }
  if (!out.flush()) throw DataError("write to '" + path + "' failed");
}

struct LatentEmbedding {
  Mat map;
  std::string subject_id;
};

// Convolutional autoencoder over channel-major image stacks. The encoder
// halves the spatial size four times (strided 3x3 convolutions), so the
// latent map is a single channel of (size/16)^2 pre-activation values;
// the decoder mirrors it with nearest-neighbor upsampling and a sigmoid
// output head.
template <typename T = float>
struct Autoencoder {
  int channels = 15;
  int image_size = 224;
  int latent_size = 14;
  bool ready = false;

  nn::Conv2d<T> enc1, enc2, enc3, enc4;
  nn::Conv2d<T> dec1, dec2, dec3, dec4;

  // Per-sample activation caches reused by backward.
  std::vector<T> p1, a1, p2, a2, p3, a3, z;
  std::vector<T> u1, q1, b1, u2, q2, b2, u3, q3, b3, u4, q4, y;

  explicit Autoencoder(int size = 224, int chans = 15) {
    if (size < 16 || size % 16 != 0)
      throw ConfigError("image size must be a positive multiple of 16, got " +
                        std::to_string(size));
    if (chans < 1)
      throw ConfigError("channel count must be >= 1, got " + std::to_string(chans));
    channels = chans;
    image_size = size;
    latent_size = size / 16;
    enc1.configure(chans, 32, 3, 2, 1);
    enc2.configure(32, 64, 3, 2, 1);
    enc3.configure(64, 32, 3, 2, 1);
    enc4.configure(32, 1, 3, 2, 1);
    dec1.configure(1, 32, 3, 1, 1);
    dec2.configure(32, 64, 3, 1, 1);
    dec3.configure(64, 32, 3, 1, 1);
    dec4.configure(32, chans, 3, 1, 1);
  }

  std::size_t input_count() const {
    return static_cast<std::size_t>(channels) * image_size * image_size;
  }

  void init(std::uint64_t seed) {
    Rng rng(seed);
    enc1.init(rng);
    enc2.init(rng);
    enc3.init(rng);
    enc4.init(rng);
    dec1.init(rng);
    dec2.init(rng);
    dec3.init(rng);
    dec4.init(rng);
    ready = true;
  }

  void zero_grad() {
    enc1.zero_grad();
    enc2.zero_grad();
    enc3.zero_grad();
    enc4.zero_grad();
    dec1.zero_grad();
    dec2.zero_grad();
    dec3.zero_grad();
    dec4.zero_grad();
  }

  void scale_grad(T f) {
    for (nn::Conv2d<T>* c : layers()) {
      for (T& v : c->dw) v *= f;
      for (T& v : c->db) v *= f;
    }
  }

  void register_params(nn::Adam<T>& opt) {
    for (nn::Conv2d<T>* c : layers()) {
      opt.add(c->w, c->dw);
      opt.add(c->b, c->db);
    }
  }

  std::vector<nn::Conv2d<T>*> layers() {
    return {&enc1, &enc2, &enc3, &enc4, &dec1, &dec2, &dec3, &dec4};
  }
  std::vector<const nn::Conv2d<T>*> layers() const {
    return {&enc1, &enc2, &enc3, &enc4, &dec1, &dec2, &dec3, &dec4};
  }

  // Full reconstruction pass; leaves every intermediate cached for
  // backward. Returns the sigmoid output, shaped like the input.
  const std::vector<T>& forward(const std::vector<T>& x) {
    const int s = image_size;
    nn::check_size(x.size(), static_cast<long long>(channels) * s * s, "autoencoder input");
    p1 = enc1.forward(x, s, s);
    nn::relu_forward(p1, a1);
    p2 = enc2.forward(a1, s / 2, s / 2);
    nn::relu_forward(p2, a2);
    p3 = enc3.forward(a2, s / 4, s / 4);
    nn::relu_forward(p3, a3);
    z = enc4.forward(a3, s / 8, s / 8);  // linear latent
    u1 = nn::upsample2_forward(z, 1, s / 16, s / 16);
    q1 = dec1.forward(u1, s / 8, s / 8);
    nn::relu_forward(q1, b1);
    u2 = nn::upsample2_forward(b1, 32, s / 8, s / 8);
    q2 = dec2.forward(u2, s / 4, s / 4);
    nn::relu_forward(q2, b2);
    u3 = nn::upsample2_forward(b2, 64, s / 4, s / 4);
    q3 = dec3.forward(u3, s / 2, s / 2);
    nn::relu_forward(q3, b3);
    u4 = nn::upsample2_forward(b3, 32, s / 2, s / 2);
    q4 = dec4.forward(u4, s, s);
    nn::sigmoid_forward(q4, y);
    return y;
  }

  // Accumulates parameter gradients for the sample most recently run
  // through forward. dy is the loss gradient w.r.t. the sigmoid output.
  void backward(const std::vector<T>& dy) {
    const int s = image_size;
    std::vector<T> t, g;
    nn::sigmoid_backward(y, dy, g);
    t = dec4.backward(g);
    t = nn::upsample2_backward(t, 32, s / 2, s / 2);
    nn::relu_backward(q3, t, g);
    t = dec3.backward(g);
    t = nn::upsample2_backward(t, 64, s / 4, s / 4);
    nn::relu_backward(q2, t, g);
    t = dec2.backward(g);
    t = nn::upsample2_backward(t, 32, s / 8, s / 8);
    nn::relu_backward(q1, t, g);
    t = dec1.backward(g);
    t = nn::upsample2_backward(t, 1, s / 16, s / 16);
    t = enc4.backward(t);
    nn::relu_backward(p3, t, g);
    t = enc3.backward(g);
    nn::relu_backward(p2, t, g);
    t = enc2.backward(g);
    nn::relu_backward(p1, t, g);
    enc1.backward(g);
  }

  // Encoder half only. Requires trained (or loaded) weights.
  Mat encode(const std::vector<T>& x) {
    if (!ready)
      throw NotReadyError(
          "autoencoder holds no trained weights; train it or load a checkpoint first");
    const int s = image_size;
    nn::check_size(x.size(), static_cast<long long>(channels) * s * s, "autoencoder input");
    p1 = enc1.forward(x, s, s);
    nn::relu_forward(p1, a1);
    p2 = enc2.forward(a1, s / 2, s / 2);
    nn::relu_forward(p2, a2);
    p3 = enc3.forward(a2, s / 4, s / 4);
    nn::relu_forward(p3, a3);
    z = enc4.forward(a3, s / 8, s / 8);
    Mat out(latent_size, latent_size);
    for (int i = 0; i < latent_size; ++i)
      for (int j = 0; j < latent_size; ++j)
        out(i, j) = static_cast<double>(z[static_cast<std::size_t>(i) * latent_size + j]);
    return out;
  }

  Checkpoint to_checkpoint() const {
    if (!ready) throw NotReadyError("autoencoder holds no weights to checkpoint");
    Checkpoint cp;
    CheckpointBlob meta;
    meta.dims = {2};
    meta.values = {static_cast<float>(channels), static_cast<float>(image_size)};
    cp["meta.input"] = meta;
    const char* names[8] = {"enc1", "enc2", "enc3", "enc4", "dec1", "dec2", "dec3", "dec4"};
    auto ls = layers();
    for (int i = 0; i < 8; ++i) {
      const nn::Conv2d<T>& c = *ls[static_cast<std::size_t>(i)];
      CheckpointBlob wb;
      wb.dims = {static_cast<std::uint32_t>(c.out_c), static_cast<std::uint32_t>(c.in_c),
                 static_cast<std::uint32_t>(c.k), static_cast<std::uint32_t>(c.k)};
      wb.values.assign(c.w.begin(), c.w.end());
      cp[std::string(names[i]) + ".w"] = std::move(wb);
      CheckpointBlob bb;
      bb.dims = {static_cast<std::uint32_t>(c.out_c)};
      bb.values.assign(c.b.begin(), c.b.end());
      cp[std::string(names[i]) + ".b"] = std::move(bb);
    }
    return cp;
  }

  void load(const Checkpoint& cp) {
    const char* names[8] = {"enc1", "enc2", "enc3", "enc4", "dec1", "dec2", "dec3", "dec4"};
    auto ls = layers();
    for (int i = 0; i < 8; ++i) {
      nn::Conv2d<T>& c = *ls[static_cast<std::size_t>(i)];
      for (const char* part : {".w", ".b"}) {
        const std::string key = std::string(names[i]) + part;
        auto it = cp.find(key);
        if (it == cp.end()) throw DataError("checkpoint is missing tensor '" + key + "'");
        std::vector<T>& dst = part[1] == 'w' ? c.w : c.b;
        if (it->second.values.size() != dst.size())
          throw DataError("checkpoint tensor '" + key + "' holds " +
                          std::to_string(it->second.values.size()) + " values, expected " +
                          std::to_string(dst.size()));
        for (std::size_t j = 0; j < dst.size(); ++j)
          dst[j] = static_cast<T>(it->second.values[j]);
      }
    }
    ready = true;
  }

  static Autoencoder<T> from_checkpoint(const Checkpoint& cp) {
    auto it = cp.find("meta.input");
    if (it == cp.end() || it->second.values.size() != 2)
      throw DataError("checkpoint is missing the meta.input shape record");
    int chans = static_cast<int>(it->second.values[0]);
    int size = static_cast<int>(it->second.values[1]);
    Autoencoder<T> ae(size, chans);
    ae.load(cp);
    return ae;
  }
};

// Deterministic full training loop: seeded subject split, seeded epoch
// shuffles, per-sample gradient accumulation in a fixed order, one Adam
// step per batch. Per-epoch losses are reduced in subject-index order so
// reruns with the same seed reproduce the curve bitwise.
template <typename T>
LossCurve train_autoencoder(Autoencoder<T>& ae, const std::vector<std::vector<T>>& subjects,
                            const TrainConfig& cfg) {
  validate_train_config(cfg);
  const long long n = static_cast<long long>(subjects.size());
  if (n < 2)
    throw DataError("training needs at least 2 subjects to split, got " + std::to_string(n));
  for (long long i = 0; i < n; ++i) {
    nn::check_size(subjects[static_cast<std::size_t>(i)].size(),
                   static_cast<long long>(ae.input_count()), "training subject");
    for (T v : subjects[static_cast<std::size_t>(i)])
      if (!(v >= T(0) && v <= T(1)))
        throw DataError("subject " + std::to_string(i) +
                        " holds values outside [0,1]; normalize inputs before training");
  }

  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng split_rng(seed_for(cfg.seed, "ae.split"));
  split_rng.shuffle(idx);
  long long n_train = std::llround(static_cast<double>(n) * cfg.train_fraction);
  n_train = std::max(1LL, std::min(n - 1, n_train));
  std::vector<int> train_idx(idx.begin(), idx.begin() + n_train);
  std::vector<int> val_idx(idx.begin() + n_train, idx.end());

  ae.init(seed_for(cfg.seed, "ae.init"));
  nn::Adam<T> opt;
  opt.lr = cfg.learning_rate;
  opt.beta1 = cfg.beta1;
  opt.beta2 = cfg.beta2;
  opt.eps = cfg.adam_eps;
  ae.register_params(opt);

  const int C = ae.channels;
  const int S = ae.image_size;
  Rng order_rng(seed_for(cfg.seed, "ae.order"));
  LossCurve curve;
  std::vector<T> grad;
  std::vector<double> loss_by_subject(static_cast<std::size_t>(n), 0.0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = train_idx;
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      ae.zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        const std::vector<T>& x = subjects[static_cast<std::size_t>(order[i])];
        const std::vector<T>& rec = ae.forward(x);
        T loss = ae_loss_with_grad(x, rec, C, S, S, grad);
        if (!std::isfinite(static_cast<double>(loss)))
          throw DivergenceError("loss became non-finite at epoch " + std::to_string(epoch + 1) +
                                " with learning rate " + fmt_full(cfg.learning_rate));
        loss_by_subject[static_cast<std::size_t>(order[i])] = static_cast<double>(loss);
        ae.backward(grad);
      }
      ae.scale_grad(T(1) / static_cast<T>(stop - start));
      opt.step();
    }

    double train_sum = 0.0;
    for (int t : train_idx) train_sum += loss_by_subject[static_cast<std::size_t>(t)];
    curve.train.push_back(train_sum / static_cast<double>(n_train));

    double val_sum = 0.0;
    for (int v : val_idx) {
      const std::vector<T>& x = subjects[static_cast<std::size_t>(v)];
      const std::vector<T>& rec = ae.forward(x);
      val_sum += static_cast<double>(ae_loss(x, rec, C, S, S));
    }
    double val_mean = val_idx.empty() ? curve.train.back()
                                      : val_sum / static_cast<double>(val_idx.size());
    if (!std::isfinite(val_mean))
      throw DivergenceError("validation loss became non-finite at epoch " +
                            std::to_string(epoch + 1) + " with learning rate " +
                            fmt_full(cfg.learning_rate));
    curve.val.push_back(val_mean);
  }
  return curve;
}

}  // namespace rqae
