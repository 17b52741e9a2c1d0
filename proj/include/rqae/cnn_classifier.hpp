#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "rqae/adam.hpp"
#include "rqae/autoencoder.hpp"
#include "rqae/checkpoint.hpp"
#include "rqae/common.hpp"
#include "rqae/nn.hpp"
#include "rqae/rng.hpp"

namespace rqae {

// Latent maps reach the classifier min-max normalized per sample; a
// constant map carries no contrast and collapses to mid-scale.
template <typename T = double>
std::vector<T> normalize_latent(const Mat& m) {
  if (m.rows < 1 || m.cols < 1) throw ShapeError("latent map is empty");
  double lo = m.v[0], hi = m.v[0];
  for (double v : m.v) {
    if (!std::isfinite(v)) throw DataError("latent map holds non-finite values");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<T> out(m.v.size());
  if (hi > lo) {
    for (std::size_t i = 0; i < m.v.size(); ++i)
      out[i] = static_cast<T>((m.v[i] - lo) / (hi - lo));
  } else {
    std::fill(out.begin(), out.end(), T(0.5));
  }
  return out;
}

// Small softmax classifier over single-channel latent maps: three 3x3
// convolutions (8, 16, 32 filters; 2x2 max-pool after the first two)
// followed by a six-layer fully connected taper down to the 5 classes.
template <typename T = double>
struct CnnClassifier {
  int input_hw = 14;
  int h1 = 7, h2 = 3, flat = 288;
  bool ready = false;

  nn::Conv2d<T> c1, c2, c3;
  nn::MaxPool2d<T> pool1, pool2;
  nn::Dense<T> f1, f2, f3, f4, f5, f6;

  // forward caches
  std::vector<T> xin, pc1, ac1, m1, pc2, ac2, m2, pc3, ac3;
  std::vector<T> fin1, fp1, fin2, fp2, fin3, fp3, fin4, fp4, fin5, fp5, fin6, logits, probs;

  explicit CnnClassifier(int hw = 14) {
    if (hw < 4) throw ConfigError("latent side must be >= 4, got " + std::to_string(hw));
    input_hw = hw;
    h1 = hw / 2;
    h2 = h1 / 2;
    flat = 32 * h2 * h2;
    c1.configure(1, 8, 3, 1, 1);
    c2.configure(8, 16, 3, 1, 1);
    c3.configure(16, 32, 3, 1, 1);
    f1.configure(flat, 256);
    f2.configure(256, 128);
    f3.configure(128, 64);
    f4.configure(64, 32);
    f5.configure(32, 16);
    f6.configure(16, kNumClasses);
  }

  void init(std::uint64_t seed) {
    Rng rng(seed);
    c1.init(rng);
    c2.init(rng);
    c3.init(rng);
    f1.init(rng);
    f2.init(rng);
    f3.init(rng);
    f4.init(rng);
    f5.init(rng);
    f6.init(rng);
    ready = true;
  }

  void zero_grad() {
    c1.zero_grad();
    c2.zero_grad();
    c3.zero_grad();
    f1.zero_grad();
    f2.zero_grad();
    f3.zero_grad();
    f4.zero_grad();
    f5.zero_grad();
    f6.zero_grad();
  }

  void scale_grad(T f) {
    for (auto* c : {&c1, &c2, &c3}) {
      for (T& v : c->dw) v *= f;
      for (T& v : c->db) v *= f;
    }
    for (auto* d : {&f1, &f2, &f3, &f4, &f5, &f6}) {
      for (T& v : d->dw) v *= f;
      for (T& v : d->db) v *= f;
    }
  }

  void register_params(nn::Adam<T>& opt) {
    for (auto* c : {&c1, &c2, &c3}) {
      opt.add(c->w, c->dw);
      opt.add(c->b, c->db);
    }
    for (auto* d : {&f1, &f2, &f3, &f4, &f5, &f6}) {
      opt.add(d->w, d->dw);
      opt.add(d->b, d->db);
    }
  }

  // x is a normalized [1, hw, hw] map; returns class probabilities.
  const std::vector<T>& forward(const std::vector<T>& x) {
    nn::check_size(x.size(), static_cast<long long>(input_hw) * input_hw, "classifier input");
    xin = x;
    pc1 = c1.forward(xin, input_hw, input_hw);
    nn::relu_forward(pc1, ac1);
    m1 = pool1.forward(ac1, 8, input_hw, input_hw);
    pc2 = c2.forward(m1, h1, h1);
    nn::relu_forward(pc2, ac2);
    m2 = pool2.forward(ac2, 16, h1, h1);
    pc3 = c3.forward(m2, h2, h2);
    nn::relu_forward(pc3, ac3);
    fin1 = ac3;  // flatten is a relabeling of the channel-major buffer
    fp1 = f1.forward(fin1);
    nn::relu_forward(fp1, fin2);
    fp2 = f2.forward(fin2);
    nn::relu_forward(fp2, fin3);
    fp3 = f3.forward(fin3);
    nn::relu_forward(fp3, fin4);
    fp4 = f4.forward(fin4);
    nn::relu_forward(fp4, fin5);
    fp5 = f5.forward(fin5);
    nn::relu_forward(fp5, fin6);
    logits = f6.forward(fin6);
    probs = nn::softmax(logits);
    return probs;
  }

  // Accumulates gradients of cross_entropy(softmax(logits), label) for
  // the sample most recently run through forward.
  void backward(int label) {
    std::vector<T> g = nn::softmax_xent_backward(probs, label);
    std::vector<T> t = f6.backward(fin6, g);
    nn::relu_backward(fp5, t, g);
    t = f5.backward(fin5, g);
    nn::relu_backward(fp4, t, g);
    t = f4.backward(fin4, g);
    nn::relu_backward(fp3, t, g);
    t = f3.backward(fin3, g);
    nn::relu_backward(fp2, t, g);
    t = f2.backward(fin2, g);
    nn::relu_backward(fp1, t, g);
    t = f1.backward(fin1, g);
    nn::relu_backward(pc3, t, g);
    t = c3.backward(g);
    t = pool2.backward(t);
    nn::relu_backward(pc2, t, g);
    t = c2.backward(g);
    t = pool1.backward(t);
    nn::relu_backward(pc1, t, g);
    c1.backward(g);
  }

  std::vector<double> predict(const Mat& latent) {
    if (!ready)
      throw NotReadyError("classifier holds no trained weights; train it or load a checkpoint");
    if (latent.rows != input_hw || latent.cols != input_hw)
      throw ShapeError("latent map is " + std::to_string(latent.rows) + "x" +
                       std::to_string(latent.cols) + ", classifier expects " +
                       std::to_string(input_hw) + "x" + std::to_string(input_hw));
    const std::vector<T>& p = forward(normalize_latent<T>(latent));
    return std::vector<double>(p.begin(), p.end());
  }

  ClassLabel predict_label(const Mat& latent) {
    std::vector<double> p = predict(latent);
    int best = 0;
    for (int i = 1; i < kNumClasses; ++i)
      if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(best)]) best = i;
    return static_cast<ClassLabel>(best);
  }

  Checkpoint to_checkpoint() const {
    if (!ready) throw NotReadyError("classifier holds no weights to checkpoint");
    Checkpoint cp;
    CheckpointBlob meta;
    meta.dims = {1};
    meta.values = {static_cast<float>(input_hw)};
    cp["meta.input"] = meta;
    auto put_conv = [&](const std::string& name, const nn::Conv2d<T>& c) {
      CheckpointBlob wb;
      wb.dims = {static_cast<std::uint32_t>(c.out_c), static_cast<std::uint32_t>(c.in_c),
                 static_cast<std::uint32_t>(c.k), static_cast<std::uint32_t>(c.k)};
      wb.values.assign(c.w.begin(), c.w.end());
      cp[name + ".w"] = std::move(wb);
      CheckpointBlob bb;
      bb.dims = {static_cast<std::uint32_t>(c.out_c)};
      bb.values.assign(c.b.begin(), c.b.end());
      cp[name + ".b"] = std::move(bb);
    };
    auto put_dense = [&](const std::string& name, const nn::Dense<T>& d) {
      CheckpointBlob wb;
      wb.dims = {static_cast<std::uint32_t>(d.out_n), static_cast<std::uint32_t>(d.in_n)};
      wb.values.assign(d.w.begin(), d.w.end());
      cp[name + ".w"] = std::move(wb);
      CheckpointBlob bb;
      bb.dims = {static_cast<std::uint32_t>(d.out_n)};
      bb.values.assign(d.b.begin(), d.b.end());
      cp[name + ".b"] = std::move(bb);
    };
    put_conv("c1", c1);
    put_conv("c2", c2);
    put_conv("c3", c3);
    put_dense("f1", f1);
    put_dense("f2", f2);
    put_dense("f3", f3);
    put_dense("f4", f4);
    put_dense("f5", f5);
    put_dense("f6", f6);
    return cp;
  }

  void load(const Checkpoint& cp) {
    auto pull = [&](const std::string& key, std::vector<T>& dst) {
      auto it = cp.find(key);
      if (it == cp.end()) throw DataError("checkpoint is missing tensor '" + key + "'");
      if (it->second.values.size() != dst.size())
        throw DataError("checkpoint tensor '" + key + "' holds " +
                        std::to_string(it->second.values.size()) + " values, expected " +
                        std::to_string(dst.size()));
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = static_cast<T>(it->second.values[j]);
    };
    pull("c1.w", c1.w);
    pull("c1.b", c1.b);
    pull("c2.w", c2.w);
    pull("c2.b", c2.b);
    pull("c3.w", c3.w);
    pull("c3.b", c3.b);
    pull("f1.w", f1.w);
    pull("f1.b", f1.b);
    pull("f2.w", f2.w);
    pull("f2.b", f2.b);
    pull("f3.w", f3.w);
    pull("f3.b", f3.b);
    pull("f4.w", f4.w);
    pull("f4.b", f4.b);
    pull("f5.w", f5.w);
    pull("f5.b", f5.b);
    pull("f6.w", f6.w);
    pull("f6.b", f6.b);
    ready = true;
  }

  static CnnClassifier<T> from_checkpoint(const Checkpoint& cp) {
    auto it = cp.find("meta.input");
    if (it == cp.end() || it->second.values.size() != 1)
      throw DataError("checkpoint is missing the meta.input shape record");
    CnnClassifier<T> clf(static_cast<int>(it->second.values[0]));
    clf.load(cp);
    return clf;
  }
};

// Full-batch-epoch training over latent maps. Same determinism contract
// as the autoencoder loop: seeded init, seeded epoch shuffles, losses
// reduced in sample-index order.
template <typename T>
LossCurve train_cnn_classifier(CnnClassifier<T>& clf, const std::vector<Mat>& embeddings,
                               const std::vector<ClassLabel>& labels, const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (embeddings.size() != labels.size())
    throw ShapeError("got " + std::to_string(embeddings.size()) + " embeddings but " +
                     std::to_string(labels.size()) + " labels");
  const long long n = static_cast<long long>(embeddings.size());
  if (n < 1) throw DataError("classifier training set is empty");
  std::set<ClassLabel> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2)
    throw DataError("degenerate labels: all " + std::to_string(n) +
                    " training samples share one class");

  std::vector<std::vector<T>> inputs(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const Mat& m = embeddings[static_cast<std::size_t>(i)];
    if (m.rows != clf.input_hw || m.cols != clf.input_hw)
      throw ShapeError("embedding " + std::to_string(i) + " is " + std::to_string(m.rows) + "x" +
                       std::to_string(m.cols) + ", classifier expects " +
                       std::to_string(clf.input_hw) + "x" + std::to_string(clf.input_hw));
    inputs[static_cast<std::size_t>(i)] = normalize_latent<T>(m);
  }

  clf.init(seed_for(cfg.seed, "cnn.init"));
  nn::Adam<T> opt;
  opt.lr = cfg.learning_rate;
  opt.beta1 = cfg.beta1;
  opt.beta2 = cfg.beta2;
  opt.eps = cfg.adam_eps;
  clf.register_params(opt);

  Rng order_rng(seed_for(cfg.seed, "cnn.order"));
  std::vector<int> base(static_cast<std::size_t>(n));
  std::iota(base.begin(), base.end(), 0);
  LossCurve curve;
  std::vector<double> loss_by_sample(static_cast<std::size_t>(n), 0.0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<int> order = base;
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      clf.zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        const int s = order[i];
        const std::vector<T>& p = clf.forward(inputs[static_cast<std::size_t>(s)]);
        T loss = nn::cross_entropy(p, static_cast<int>(labels[static_cast<std::size_t>(s)]));
        if (!std::isfinite(static_cast<double>(loss)))
          throw DivergenceError("loss became non-finite at epoch " + std::to_string(epoch + 1) +
                                " with learning rate " + fmt_full(cfg.learning_rate));
        loss_by_sample[static_cast<std::size_t>(s)] = static_cast<double>(loss);
        clf.backward(static_cast<int>(labels[static_cast<std::size_t>(s)]));
      }
      clf.scale_grad(T(1) / static_cast<T>(stop - start));
      opt.step();
    }
    double sum = 0.0;
    for (long long i = 0; i < n; ++i) sum += loss_by_sample[static_cast<std::size_t>(i)];
    curve.train.push_back(sum / static_cast<double>(n));
    curve.val.push_back(curve.train.back());
  }
  return curve;
}

}  // namespace rqae
