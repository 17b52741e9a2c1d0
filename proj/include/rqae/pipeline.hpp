#pragma once

// Pipeline orchestration. Each subcommand is a function from the validated
// configuration plus on-disk artifacts to a new set of artifacts, so the
// whole chain stays restartable: any step can be rerun and produces the
// same bytes when its inputs and seed are unchanged. Cross-file state
// lives only in the CSV indexes written by earlier steps; nothing here
// depends on directory iteration order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rqae/autoencoder.hpp"
#include "rqae/cnn_classifier.hpp"
#include "rqae/common.hpp"
#include "rqae/config.hpp"
#include "rqae/csv.hpp"
#include "rqae/embedding.hpp"
#include "rqae/io.hpp"
#include "rqae/learners.hpp"
#include "rqae/png.hpp"
#include "rqae/recurrence.hpp"
#include "rqae/resample.hpp"
#include "rqae/rng.hpp"
#include "rqae/rqa.hpp"
#include "rqae/stats.hpp"
#include "rqae/synth.hpp"
#include "rqae/wfdb.hpp"

namespace rqae {

// Everything a run writes lives under one output directory with fixed
// relative names, so artifacts from different stages can reference each
// other by convention instead of by configuration.
struct PipelinePaths {
  std::string out;

  std::string signals_dir() const { return out + "/signals"; }
  std::string signal_csv(const std::string& rec) const { return signals_dir() + "/" + rec + ".csv"; }
  std::string records_index() const { return out + "/ingest/records.csv"; }
  std::string embed_params() const { return out + "/embed/params.csv"; }
  std::string rp_dir() const { return out + "/rp"; }
  std::string rp_png(const std::string& rec, const std::string& ch) const {
    return rp_dir() + "/" + rec + "_" + ch + ".png";
  }
  std::string rp_dm(const std::string& rec, const std::string& ch) const {
    return rp_dir() + "/" + rec + "_" + ch + ".dm";
  }
  std::string rp_params() const { return rp_dir() + "/params.csv"; }
  std::string features() const { return out + "/rqa/features.csv"; }
  std::string ae_loss() const { return out + "/models/ae_loss.csv"; }
  std::string clf_loss() const { return out + "/models/clf_loss.csv"; }
  std::string embeddings() const { return out + "/latent/embeddings.csv"; }
  std::string significance() const { return out + "/stats/significance.csv"; }
  std::string boxplot() const { return out + "/stats/boxplot.csv"; }
  std::string split_csv() const { return out + "/clf/split.csv"; }
  std::string confusion() const { return out + "/report/confusion.csv"; }
  std::string report_txt() const { return out + "/report/report.txt"; }
  std::string runs_csv() const { return out + "/report/runs.csv"; }
  std::string export_csv() const { return out + "/export/embeddings_tsne.csv"; }
  std::string run_manifest() const { return out + "/run_manifest.csv"; }
};

struct PipelineConfig {
  // data
  std::string manifest;
  std::string out_dir = "out";
  double window_seconds = 0.0;  // 0 keeps the full record

  // ingest
  double target_rate_hz = 250.0;
  bool raw_decimate = false;

  // embedding
  bool auto_embed = true;
  int tau = 8;
  int dim = 3;
  int estimate_samples = 1000;  // parameter-estimation window cap
  int max_dim = 10;

  // recurrence imaging
  double epsilon = 0.0;  // 0 selects the threshold from target_rr
  double target_rr = 0.15;
  int image_size = 224;
  bool dump_dm = false;

  // rqa
  int lmin = 2;
  int vmin = 2;
  bool exclude_loi = true;
  double latent_target_rr = 0.15;

  // autoencoder training
  int ae_epochs = 40;
  int ae_batch = 8;
  double ae_lr = 1e-3;
  double ae_train_fraction = 0.8;

  // classifier
  std::string classifier = "cnn";
  int clf_epochs = 200;
  int clf_batch = 8;
  double clf_lr = 1e-3;
  double test_fraction = 0.2;
  int folds = 5;
  bool in_sample_stacking = false;

  // stats
  bool stats_per_channel = false;
  bool bonferroni = false;

  // synth
  std::string synth_dir;  // empty: <out_dir>/synth
  int synth_per_class = 10;
  double synth_rate_hz = 1000.0;
  double synth_seconds = 8.0;

  // run
  std::uint64_t seed = 0;
  int jobs = 0;  // 0: logical cores
  std::string ae_checkpoint;   // empty: <out_dir>/models/autoencoder.ckpt
  std::string clf_checkpoint;  // empty: <out_dir>/models/<classifier>.ckpt

  PipelinePaths paths() const { return PipelinePaths{out_dir}; }
  std::string ae_ckpt_path() const {
    return ae_checkpoint.empty() ? out_dir + "/models/autoencoder.ckpt" : ae_checkpoint;
  }
  std::string clf_ckpt_path() const {
    return clf_checkpoint.empty() ? out_dir + "/models/" + classifier + ".ckpt" : clf_checkpoint;
  }
  std::string synth_dir_path() const { return synth_dir.empty() ? out_dir + "/synth" : synth_dir; }
};

// Builds the runtime configuration from the parsed key/value form,
// validating ranges up front so every violation names its field.
inline PipelineConfig pipeline_config(const Config& cfg) {
  PipelineConfig p;
  p.manifest = cfg.get_string("data.manifest", "");
  p.out_dir = cfg.get_string("data.out_dir", p.out_dir);
  p.window_seconds = cfg.get_double("data.window_seconds", p.window_seconds);
  p.target_rate_hz = cfg.get_double("ingest.target_rate_hz", p.target_rate_hz);
  p.raw_decimate = cfg.get_bool("ingest.raw_decimate", p.raw_decimate);
  p.auto_embed = cfg.get_bool("embed.auto", p.auto_embed);
  p.tau = cfg.get_int("embed.tau", p.tau);
  p.dim = cfg.get_int("embed.dim", p.dim);
  p.estimate_samples = cfg.get_int("embed.estimate_samples", p.estimate_samples);
  p.max_dim = cfg.get_int("embed.max_dim", p.max_dim);
  p.epsilon = cfg.get_double("recurrence.epsilon", p.epsilon);
  p.target_rr = cfg.get_double("recurrence.target_rr", p.target_rr);
  p.image_size = cfg.get_int("recurrence.image_size", p.image_size);
  p.dump_dm = cfg.get_bool("recurrence.dump_dm", p.dump_dm);
  p.lmin = cfg.get_int("rqa.lmin", p.lmin);
  p.vmin = cfg.get_int("rqa.vmin", p.vmin);
  p.exclude_loi = cfg.get_bool("rqa.exclude_loi", p.exclude_loi);
  p.latent_target_rr = cfg.get_double("rqa.latent_target_rr", p.latent_target_rr);
  p.ae_epochs = cfg.get_int("train.epochs", p.ae_epochs);
  p.ae_batch = cfg.get_int("train.batch", p.ae_batch);
  p.ae_lr = cfg.get_double("train.lr", p.ae_lr);
  p.ae_train_fraction = cfg.get_double("train.train_fraction", p.ae_train_fraction);
  p.classifier = cfg.get_string("classifier.kind", p.classifier);
  p.clf_epochs = cfg.get_int("classifier.epochs", p.clf_epochs);
  p.clf_batch = cfg.get_int("classifier.batch", p.clf_batch);
  p.clf_lr = cfg.get_double("classifier.lr", p.clf_lr);
  p.test_fraction = cfg.get_double("classifier.test_fraction", p.test_fraction);
  p.folds = cfg.get_int("classifier.folds", p.folds);
  p.in_sample_stacking = cfg.get_bool("classifier.in_sample", p.in_sample_stacking);
  p.stats_per_channel = cfg.get_bool("stats.per_channel", p.stats_per_channel);
  p.bonferroni = cfg.get_bool("stats.bonferroni", p.bonferroni);
  p.synth_dir = cfg.get_string("synth.dir", p.synth_dir);
  p.synth_per_class = cfg.get_int("synth.per_class", p.synth_per_class);
  p.synth_rate_hz = cfg.get_double("synth.rate_hz", p.synth_rate_hz);
  p.synth_seconds = cfg.get_double("synth.seconds", p.synth_seconds);
  p.seed = cfg.get_seed("seed.root", p.seed);
  p.jobs = cfg.get_int("run.jobs", p.jobs);
  p.ae_checkpoint = cfg.get_string("models.autoencoder", p.ae_checkpoint);
  p.clf_checkpoint = cfg.get_string("models.classifier", p.clf_checkpoint);

  auto bad = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "' " + why);
  };
  if (p.out_dir.empty()) bad("data.out_dir", "must not be empty");
  if (p.window_seconds < 0.0) bad("data.window_seconds", "must be >= 0");
  if (p.target_rate_hz <= 0.0) bad("ingest.target_rate_hz", "must be positive");
  if (p.tau < 1) bad("embed.tau", "must be >= 1");
  if (p.dim < 1) bad("embed.dim", "must be >= 1");
  if (p.estimate_samples < 32) bad("embed.estimate_samples", "must be >= 32");
  if (p.max_dim < 2) bad("embed.max_dim", "must be >= 2");
  if (p.epsilon < 0.0) bad("recurrence.epsilon", "must be >= 0");
  if (!(p.target_rr > 0.0 && p.target_rr < 1.0)) bad("recurrence.target_rr", "must lie in (0,1)");
  if (p.image_size < 2) bad("recurrence.image_size", "must be >= 2");
  if (p.image_size % 16 != 0)
    bad("recurrence.image_size", "must be a multiple of 16 (the encoder halves it four times)");
  if (p.lmin < 2) bad("rqa.lmin", "must be >= 2");
  if (p.vmin < 2) bad("rqa.vmin", "must be >= 2");
  if (!(p.latent_target_rr > 0.0 && p.latent_target_rr < 1.0))
    bad("rqa.latent_target_rr", "must lie in (0,1)");
  if (p.ae_epochs < 1) bad("train.epochs", "must be >= 1");
  if (p.ae_batch < 1) bad("train.batch", "must be >= 1");
  if (p.ae_lr <= 0.0) bad("train.lr", "must be positive");
  if (!(p.ae_train_fraction > 0.0 && p.ae_train_fraction <= 1.0))
    bad("train.train_fraction", "must lie in (0,1]");
  if (p.classifier != "cnn" && p.classifier != "stacked")
    bad("classifier.kind", "must be 'cnn' or 'stacked', got '" + p.classifier + "'");
  if (p.clf_epochs < 1) bad("classifier.epochs", "must be >= 1");
  if (p.clf_batch < 1) bad("classifier.batch", "must be >= 1");
  if (p.clf_lr <= 0.0) bad("classifier.lr", "must be positive");
  if (!(p.test_fraction > 0.0 && p.test_fraction < 1.0))
    bad("classifier.test_fraction", "must lie in (0,1)");
  if (p.folds < 2) bad("classifier.folds", "must be >= 2");
  if (p.synth_per_class < 4) bad("synth.per_class", "must be >= 4");
  if (p.synth_rate_hz <= 0.0) bad("synth.rate_hz", "must be positive");
  if (p.synth_seconds <= 0.0) bad("synth.seconds", "must be positive");
  if (p.jobs < 0) bad("run.jobs", "must be >= 0");
  return p;
}

namespace detail {

inline void require_artifact(const std::string& path, const std::string& producer) {
  if (!std::filesystem::exists(path))
    throw DataError("missing artifact '" + path + "': run `" + producer + "` first");
}

inline void ensure_dir(const std::string& file_path) {
  std::filesystem::path p(file_path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

inline double parse_double_field(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("malformed numeric field '" + s + "' in " + where);
  }
}

inline long long parse_int_field(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("malformed integer field '" + s + "' in " + where);
  }
}

// Record-level parallelism: results land in per-index slots and shared
// CSVs are assembled afterwards in index order, so scheduling never
// reaches the output bytes.
template <typename Fn>
inline void parallel_over(std::size_t n, int jobs, Fn&& fn) {
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
  if (workers < 1) workers = 1;
  parallel_for(n, workers, std::forward<Fn>(fn));
}

struct IndexRow {
  std::string record;
  ClassLabel label = ClassLabel::HC;
  double rate_hz = 0.0;
  long long n_samples = 0;
  int n_channels = 0;
};

inline std::vector<IndexRow> read_records_index(const PipelinePaths& paths) {
  require_artifact(paths.records_index(), "ingest");
  auto rows = read_csv(paths.records_index());
  std::vector<IndexRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 5)
      throw DataError("records index row " + std::to_string(i + 1) + " has " +
                      std::to_string(r.size()) + " fields, expected 5");
    IndexRow row;
    row.record = r[0];
    row.label = label_from_string(r[1]);
    row.rate_hz = parse_double_field(r[2], paths.records_index());
    row.n_samples = parse_int_field(r[3], paths.records_index());
    row.n_channels = static_cast<int>(parse_int_field(r[4], paths.records_index()));
    out.push_back(row);
  }
  if (out.empty()) throw DataError("records index '" + paths.records_index() + "' lists no records");
  return out;
}

struct EmbedParams {
  int tau = 0;
  int m = 0;
};

inline std::map<std::string, EmbedParams> read_embed_params(const PipelinePaths& paths) {
  require_artifact(paths.embed_params(), "embed-params");
  auto rows = read_csv(paths.embed_params());
  std::map<std::string, EmbedParams> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 4)
      throw DataError("embedding params row " + std::to_string(i + 1) + " needs 4 fields");
    EmbedParams p;
    p.tau = static_cast<int>(parse_int_field(r[2], paths.embed_params()));
    p.m = static_cast<int>(parse_int_field(r[3], paths.embed_params()));
    out[r[0] + "/" + r[1]] = p;
  }
  return out;
}

struct RpParams {
  int tau = 0;
  int m = 0;
  long long k = 0;
  double epsilon = 0.0;
  bool constant = false;
};

inline std::map<std::string, RpParams> read_rp_params(const PipelinePaths& paths) {
  require_artifact(paths.rp_params(), "rp");
  auto rows = read_csv(paths.rp_params());
  std::map<std::string, RpParams> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 7)
      throw DataError("recurrence params row " + std::to_string(i + 1) + " needs 7 fields");
    RpParams p;
    p.tau = static_cast<int>(parse_int_field(r[2], paths.rp_params()));
    p.m = static_cast<int>(parse_int_field(r[3], paths.rp_params()));
    p.k = parse_int_field(r[4], paths.rp_params());
    p.epsilon = parse_double_field(r[5], paths.rp_params());
    p.constant = parse_int_field(r[6], paths.rp_params()) != 0;
    out[r[0] + "/" + r[1]] = p;
  }
  return out;
}

// Reads one subject's channel stack back from the recurrence PNGs in
// canonical channel order and scales to [0,1] floats.
inline std::vector<float> load_subject_stack(const PipelinePaths& paths, const std::string& record,
                                             int image_size) {
  const auto& order = canonical_channel_order();
  std::vector<float> x;
  x.reserve(order.size() * static_cast<std::size_t>(image_size) * image_size);
  for (const auto& ch : order) {
    const std::string png = paths.rp_png(record, ch);
    require_artifact(png, "rp");
    GrayImage img = read_png_gray8(png);
    if (img.width != image_size || img.height != image_size)
      throw DataError("image '" + png + "' is " + std::to_string(img.width) + "x" +
                      std::to_string(img.height) + " but the run expects " +
                      std::to_string(image_size) + "; rerun `rp` with the current config");
    for (uint8_t v : img.pixels) x.push_back(static_cast<float>(v) / 255.0f);
  }
  return x;
}

// Latent embedding rows: record, label, then side*side map values.
struct LatentRow {
  std::string record;
  ClassLabel label = ClassLabel::HC;
  Mat map;
};

inline std::vector<LatentRow> read_embeddings(const PipelinePaths& paths) {
  require_artifact(paths.embeddings(), "encode");
  auto rows = read_csv(paths.embeddings());
  std::vector<LatentRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 3)
      throw DataError("embeddings row " + std::to_string(i + 1) + " is too short");
    const std::size_t d = r.size() - 2;
    const int side = static_cast<int>(std::llround(std::sqrt(static_cast<double>(d))));
    if (static_cast<std::size_t>(side) * static_cast<std::size_t>(side) != d)
      throw DataError("embeddings row " + std::to_string(i + 1) + " holds " + std::to_string(d) +
                      " values, which is not a square map");
    LatentRow row;
    row.record = r[0];
    row.label = label_from_string(r[1]);
    row.map = Mat(side, side);
    for (std::size_t j = 0; j < d; ++j)
      row.map.v[j] = parse_double_field(r[2 + j], paths.embeddings());
    out.push_back(row);
  }
  if (out.empty()) throw DataError("embeddings file '" + paths.embeddings() + "' holds no rows");
  return out;
}

// Feature rows from the RQA table, keyed by record for the latent scope
// or pooled across channels for the per-channel scope.
struct FeatureRow {
  std::string record;
  std::string source;  // channel label or "latent"
  std::vector<double> values;
};

inline std::vector<FeatureRow> read_feature_rows(const PipelinePaths& paths, bool latent_only) {
  require_artifact(paths.features(), "rqa");
  auto rows = read_csv(paths.features());
  std::vector<FeatureRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 13)
      throw DataError("feature row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) +
                      " fields, expected 13");
    const bool is_latent = r[1] == "latent";
    if (latent_only != is_latent) continue;
    FeatureRow row;
    row.record = r[0];
    row.source = r[1];
    for (int j = 0; j < 10; ++j)
      row.values.push_back(parse_double_field(r[static_cast<std::size_t>(2 + j)], paths.features()));
    out.push_back(row);
  }
  return out;
}

struct ManifestItem {
  std::string name;
  std::filesystem::path hea;
  ClassLabel label = ClassLabel::HC;
};

struct FeatureOut {
  std::string source;  // channel label or "latent"
  RqaFeatures f;
};

inline std::map<std::string, ClassLabel> label_map(const std::vector<IndexRow>& index) {
  std::map<std::string, ClassLabel> out;
  for (const auto& row : index) out[row.record] = row.label;
  return out;
}

// The split table pins train/test membership on disk so `evaluate` can
// never drift from what `train-clf` actually held out.
inline void read_split(const PipelinePaths& paths, std::vector<std::string>& train,
                       std::vector<std::string>& test) {
  require_artifact(paths.split_csv(), "train-clf");
  auto rows = read_csv(paths.split_csv());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 2) throw DataError("split row " + std::to_string(i + 1) + " needs 2 fields");
    if (r[1] == "train")
      train.push_back(r[0]);
    else if (r[1] == "test")
      test.push_back(r[0]);
    else
      throw DataError("split row " + std::to_string(i + 1) + " has unknown role '" + r[1] + "'");
  }
  if (test.empty()) throw DataError("split table lists no test records");
}

}  // namespace detail

// synth: writes the generated records plus their manifest and prints the
// manifest path to feed into `ingest`.
inline std::vector<std::string> cmd_synth(const PipelineConfig& cfg) {
  SynthDataset ds = synth_dataset(cfg.synth_dir_path(), seed_for(cfg.seed, "synth"),
                                  cfg.synth_per_class, cfg.synth_rate_hz, cfg.synth_seconds);
  std::printf("synth: %zu records -> %s\n", ds.record_names.size(), ds.manifest_path.c_str());
  return ds.files;
}

// ingest: manifest -> per-record normalized signal CSVs + records index.
inline std::vector<std::string> cmd_ingest(const PipelineConfig& cfg) {
  if (cfg.manifest.empty())
    throw ConfigError("config field 'data.manifest' is required for ingest");
  if (!std::filesystem::exists(cfg.manifest))
    throw DataError("manifest '" + cfg.manifest + "' does not exist: run `synth` to generate a "
                    "dataset, or point data.manifest at your records");
  auto entries = read_manifest(cfg.manifest);

  namespace fs = std::filesystem;
  const fs::path base = fs::path(cfg.manifest).parent_path();
  std::vector<detail::ManifestItem> items;
  for (const auto& e : entries) {
    fs::path p(e.record_path);
    if (p.is_relative()) p = base / p;
    if (p.extension().empty()) p.replace_extension(".hea");
    items.push_back({p.stem().string(), p, e.label});
  }
  std::sort(items.begin(), items.end(),
            [](const detail::ManifestItem& a, const detail::ManifestItem& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < items.size(); ++i)
    if (items[i].name == items[i - 1].name)
      throw DataError("manifest lists record name '" + items[i].name + "' more than once");

  const PipelinePaths paths = cfg.paths();
  fs::create_directories(paths.signals_dir());
  detail::ensure_dir(paths.records_index());

  const auto& order = canonical_channel_order();
  DownsampleConfig down;
  down.anti_alias = !cfg.raw_decimate;

  std::vector<long long> kept_samples(items.size(), 0);
  detail::parallel_over(items.size(), cfg.jobs, [&](std::size_t i) {
    const detail::ManifestItem& item = items[i];
    if (!fs::exists(item.hea))
      throw DataError("record header '" + item.hea.string() + "' from the manifest does not exist");
    RecordHeader header = parse_header(read_file_text(item.hea.string()));
    if (header.n_channels < 1) throw DataError("record '" + item.name + "' declares no channels");
    const std::string dat_name = header.channels[0].file_name;
    for (const auto& ch : header.channels)
      if (ch.file_name != dat_name)
        throw DataError("record '" + item.name + "' splits channels across signal files, which is not supported");
    const fs::path dat = item.hea.parent_path() / dat_name;
    if (!fs::exists(dat))
      throw DataError("signal file '" + dat.string() + "' for record '" + item.name + "' does not exist");
    SignalRecord rec = read_signals(header, read_file_bytes(dat.string()));
    rec = downsample_record(rec, cfg.target_rate_hz, down);

    // Columns go out in canonical channel order so every later stage can
    // address channels positionally.
    std::vector<int> col_of(order.size(), -1);
    for (int c = 0; c < rec.header.n_channels; ++c) {
      int idx = canonical_channel_index(rec.header.channels[static_cast<std::size_t>(c)].label);
      if (idx < 0)
        throw DataError("record '" + item.name + "' has unknown channel label '" +
                        rec.header.channels[static_cast<std::size_t>(c)].label + "'");
      if (col_of[static_cast<std::size_t>(idx)] >= 0)
        throw DataError("record '" + item.name + "' repeats channel '" + order[static_cast<std::size_t>(idx)] + "'");
      col_of[static_cast<std::size_t>(idx)] = c;
    }
    for (std::size_t idx = 0; idx < order.size(); ++idx)
      if (col_of[idx] < 0)
        throw DataError("record '" + item.name + "' is missing channel '" + order[idx] + "'");

    long long keep = rec.n_samples();
    if (cfg.window_seconds > 0.0) {
      long long want = static_cast<long long>(std::llround(cfg.window_seconds * cfg.target_rate_hz));
      keep = std::min(keep, want);
    }
    if (keep < 16)
      throw DataError("record '" + item.name + "' keeps only " + std::to_string(keep) +
                      " samples after windowing; that is too short to analyze");

    SignalTable table;
    table.sampling_rate_hz = cfg.target_rate_hz;
    for (std::size_t idx = 0; idx < order.size(); ++idx) {
      table.channels.push_back(order[idx]);
      const auto& src = rec.samples_mv[static_cast<std::size_t>(col_of[idx])];
      table.columns.emplace_back(src.begin(), src.begin() + keep);
    }
    write_signal_csv(paths.signal_csv(item.name), table);
    kept_samples[i] = keep;
  });

  std::vector<std::string> produced;
  CsvWriter index(paths.records_index());
  index.row({"record", "label", "rate_hz", "n_samples", "n_channels"});
  for (std::size_t i = 0; i < items.size(); ++i) {
    index.row({items[i].name, to_string(items[i].label), fmt_full(cfg.target_rate_hz),
               std::to_string(kept_samples[i]), std::to_string(order.size())});
    produced.push_back(paths.signal_csv(items[i].name));
  }
  produced.push_back(paths.records_index());
  std::printf("ingest: %zu records at %g Hz\n", items.size(), cfg.target_rate_hz);
  return produced;
}

// embed-params: picks tau by the first mutual-information minimum and m
// by Cao's criterion on a capped estimation window, or pins both from
// config when embed.auto is off.
inline std::vector<std::string> cmd_embed_params(const PipelineConfig& cfg) {
  const PipelinePaths paths = cfg.paths();
  auto index = detail::read_records_index(paths);
  const auto& order = canonical_channel_order();

  std::vector<std::vector<detail::EmbedParams>> chosen(index.size());
  detail::parallel_over(index.size(), cfg.jobs, [&](std::size_t i) {
    const auto& rec = index[i];
    detail::require_artifact(paths.signal_csv(rec.record), "ingest");
    SignalTable table = read_signal_csv(paths.signal_csv(rec.record));
    chosen[i].resize(order.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
      const auto& x = table.columns[c];
      detail::EmbedParams p;
      if (cfg.auto_embed) {
        const std::size_t est = std::min(x.size(), static_cast<std::size_t>(cfg.estimate_samples));
        std::vector<double> head(x.begin(), x.begin() + static_cast<long long>(est));
        p.tau = select_delay(head);
        // The dimension scan needs max_dim*tau + a few points; slow channels
        // can pick a delay the capped window cannot support, so widen the
        // window (never past the signal) before scanning.
        const std::size_t need = static_cast<std::size_t>(cfg.max_dim) *
                                     static_cast<std::size_t>(p.tau) + 16;
        if (head.size() < need && x.size() > head.size())
          head.assign(x.begin(), x.begin() + static_cast<long long>(std::min(x.size(), need)));
        p.m = cao_dimension(head, p.tau, cfg.max_dim).dimension;
      } else {
        p.tau = cfg.tau;
        p.m = cfg.dim;
      }
      const long long k = static_cast<long long>(x.size()) - static_cast<long long>(p.m - 1) * p.tau;
      if (k < 2)
        throw DataError("record '" + rec.record + "' channel '" + order[c] + "': m=" +
                        std::to_string(p.m) + ", tau=" + std::to_string(p.tau) +
                        " leaves no states in " + std::to_string(x.size()) + " samples");
      chosen[i][c] = p;
    }
  });

  detail::ensure_dir(paths.embed_params());
  CsvWriter out(paths.embed_params());
  out.row({"record", "channel", "tau", "m"});
  for (std::size_t i = 0; i < index.size(); ++i)
    for (std::size_t c = 0; c < order.size(); ++c)
      out.row({index[i].record, order[c], std::to_string(chosen[i][c].tau),
               std::to_string(chosen[i][c].m)});
  std::printf("embed-params: %zu records x %zu channels (%s)\n", index.size(), order.size(),
              cfg.auto_embed ? "auto" : "pinned");
  return {paths.embed_params()};
}

// rp: signals + embedding params -> one grayscale recurrence image per
// channel plus the parameter table that lets `rqa` rebuild each plot.
inline std::vector<std::string> cmd_rp(const PipelineConfig& cfg) {
  const PipelinePaths paths = cfg.paths();
  auto index = detail::read_records_index(paths);
  auto params = detail::read_embed_params(paths);
  const auto& order = canonical_channel_order();
  std::filesystem::create_directories(paths.rp_dir());

  std::vector<std::vector<detail::RpParams>> results(index.size());
  detail::parallel_over(index.size(), cfg.jobs, [&](std::size_t i) {
    const auto& rec = index[i];
    detail::require_artifact(paths.signal_csv(rec.record), "ingest");
    SignalTable table = read_signal_csv(paths.signal_csv(rec.record));
    results[i].resize(order.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
      auto it = params.find(rec.record + "/" + order[c]);
      if (it == params.end())
        throw DataError("no embedding parameters for '" + rec.record + "/" + order[c] +
                        "': run `embed-params` first");
      const int tau = it->second.tau, m = it->second.m;
      Mat states = embed(table.columns[c], m, tau);
      Mat dm = distance_matrix(states);
      double eps;
      if (cfg.epsilon > 0.0) {
        eps = cfg.epsilon;
      } else {
        eps = epsilon_for_target_rr(dm, cfg.target_rr).epsilon;
      }
      RecurrenceImage img = resize_to_image(dm, cfg.image_size, static_cast<int>(c));
      write_png_gray8(paths.rp_png(rec.record, order[c]), img.pixels.data(), img.size, img.size);
      if (cfg.dump_dm) write_dm_dump(paths.rp_dm(rec.record, order[c]), dm);

      detail::RpParams p;
      p.tau = tau;
      p.m = m;
      p.k = dm.rows;
      p.epsilon = eps;
      p.constant = img.constant_input;
      results[i][c] = p;
    }
  });

  std::vector<std::string> produced;
  CsvWriter out(paths.rp_params());
  out.row({"record", "channel", "tau", "m", "k", "epsilon", "constant"});
  for (std::size_t i = 0; i < index.size(); ++i)
    for (std::size_t c = 0; c < order.size(); ++c) {
      const auto& p = results[i][c];
      out.row({index[i].record, order[c], std::to_string(p.tau), std::to_string(p.m),
               std::to_string(p.k), fmt_full(p.epsilon), p.constant ? "1" : "0"});
      produced.push_back(paths.rp_png(index[i].record, order[c]));
      if (cfg.dump_dm) produced.push_back(paths.rp_dm(index[i].record, order[c]));
    }
  produced.push_back(paths.rp_params());
  std::printf("rp: %zu images at %dx%d\n", index.size() * order.size(), cfg.image_size,
              cfg.image_size);
  return produced;
}

// rqa: rebuilds each channel plot from signals + stored parameters and
// scans it, then appends latent-map rows when embeddings exist. Invalid
// features are written as nan so downstream consumers can impute or drop
// them; the flags column records which of the ten are meaningful.
inline std::vector<std::string> cmd_rqa(const PipelineConfig& cfg) {
  const PipelinePaths paths = cfg.paths();
  auto index = detail::read_records_index(paths);
  auto params = detail::read_rp_params(paths);
  const auto& order = canonical_channel_order();

  std::vector<std::vector<detail::FeatureOut>> channel_rows(index.size());
  detail::parallel_over(index.size(), cfg.jobs, [&](std::size_t i) {
    const auto& rec = index[i];
    detail::require_artifact(paths.signal_csv(rec.record), "ingest");
    SignalTable table = read_signal_csv(paths.signal_csv(rec.record));
    for (std::size_t c = 0; c < order.size(); ++c) {
      auto it = params.find(rec.record + "/" + order[c]);
      if (it == params.end())
        throw DataError("no recurrence parameters for '" + rec.record + "/" + order[c] +
                        "': run `rp` first");
      const auto& p = it->second;
      Mat states = embed(table.columns[c], p.m, p.tau);
      Mat dm = distance_matrix(states);
      if (dm.rows != p.k)
        throw DataError("signals for '" + rec.record + "' changed since `rp` ran (k " +
                        std::to_string(dm.rows) + " vs " + std::to_string(p.k) +
                        "); rerun `rp`");
      BinaryRecurrencePlot plot = threshold(dm, p.epsilon);
      detail::FeatureOut row;
      row.source = order[c];
      row.f = rqa_features(plot, cfg.lmin, cfg.vmin, cfg.exclude_loi);
      channel_rows[i].push_back(row);
    }
  });

  std::vector<detail::FeatureOut> latent_rows;
  std::vector<std::string> latent_records;
  if (std::filesystem::exists(paths.embeddings())) {
    auto latents = detail::read_embeddings(paths);
    LatentBinarization rule;
    rule.target_rr = cfg.latent_target_rr;
    for (const auto& lr : latents) {
      detail::FeatureOut row;
      row.source = "latent";
      row.f = latent_rqa(lr.map, rule, cfg.lmin, cfg.vmin);
      latent_rows.push_back(row);
      latent_records.push_back(lr.record);
    }
  }

  detail::ensure_dir(paths.features());
  CsvWriter out(paths.features());
  std::vector<std::string> header = {"record", "channel_or_latent"};
  for (int j = 1; j <= 10; ++j) header.push_back("F" + std::to_string(j));
  header.push_back("flags");
  out.row(header);
  auto emit = [&](const std::string& record, const detail::FeatureOut& row) {
    std::vector<std::string> fields = {record, row.source};
    auto vals = row.f.values();
    for (int j = 0; j < 10; ++j)
      fields.push_back(row.f.valid[static_cast<std::size_t>(j)]
                           ? fmt_full(vals[static_cast<std::size_t>(j)])
                           : "nan");
    fields.push_back(row.f.flag_string());
    out.row(fields);
  };
  for (std::size_t i = 0; i < index.size(); ++i)
    for (const auto& row : channel_rows[i]) emit(index[i].record, row);
  for (std::size_t i = 0; i < latent_rows.size(); ++i) emit(latent_records[i], latent_rows[i]);

  std::printf("rqa: %zu channel rows, %zu latent rows\n", index.size() * order.size(),
              latent_rows.size());
  return {paths.features()};
}

// train-ae: recurrence image stacks -> trained autoencoder checkpoint
// plus its loss curve.
inline std::vector<std::string> cmd_train_ae(const PipelineConfig& cfg) {
  const PipelinePaths paths = cfg.paths();
  auto index = detail::read_records_index(paths);

  std::vector<std::vector<float>> subjects(index.size());
  detail::parallel_over(index.size(), cfg.jobs, [&](std::size_t i) {
    subjects[i] = detail::load_subject_stack(paths, index[i].record, cfg.image_size);
  });

  TrainConfig tc;
  tc.epochs = cfg.ae_epochs;
  tc.batch_size = cfg.ae_batch;
  tc.learning_rate = cfg.ae_lr;
  tc.train_fraction = cfg.ae_train_fraction;
  tc.seed = seed_for(cfg.seed, "train-ae");

  Autoencoder<float> ae(cfg.image_size, static_cast<int>(canonical_channel_order().size()));
  LossCurve curve = train_autoencoder(ae, subjects, tc);

  const std::string ckpt = cfg.ae_ckpt_path();
  detail::ensure_dir(ckpt);
  save_checkpoint(ckpt, ae.to_checkpoint());
  detail::ensure_dir(paths.ae_loss());
  write_loss_curve(paths.ae_loss(), curve);
  std::printf("train-ae: %zu subjects, %d epochs, final train loss %.6f\n", subjects.size(),
              cfg.ae_epochs, curve.train.empty() ? 0.0 : curve.train.back());
  return {ckpt, paths.ae_loss()};
}

// encode: checkpoint + image stacks -> one latent map row per record.
inline std::vector<std::string> cmd_encode(const PipelineConfig& cfg) {
  const PipelinePaths paths = cfg.paths();
  auto index = detail::read_records_index(paths);
  const std::string ckpt = cfg.ae_ckpt_path();
  detail::require_artifact(ckpt, "train-ae");
  Autoencoder<float> ae = Autoencoder<float>::from_checkpoint(load_checkpoint(ckpt));

  std::vector<Mat> latents(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    std::vector<float> x = detail::load_subject_stack(paths, index[i].record, ae.image_size);
    latents[i] = ae.encode(x);
  }

  detail::ensure_dir(paths.embeddings());
  CsvWriter out(paths.embeddings());
  const std::size_t d = latents.empty() ? 0 : latents[0].v.size();
  std::vector<std::string> header = {"record", "label"};
  for (std::size_t j = 0; j < d; ++j) header.push_back("z" + std::to_string(j));
  out.row(header);
  for (std::size_t i = 0; i < index.size(); ++i) {
    std::vector<std::string> fields = {index[i].record, to_string(index[i].label)};
    for (double v : latents[i].v) fields.push_back(fmt_full(v));
    out.row(fields);
  }
  std::printf("encode: %zu records -> %zu latent values each\n", index.size(), d);
  return {paths.embeddings()};
}

// stats: grouped feature rows -> pairwise rank-sum significance table
// plus five-number summaries for box plots.
inline std::vector<std::string> cmd_stats(const PipelineConfig& cfg) {
  const PipelinePaths paths = cfg.paths();
  auto index = detail::read_records_index(paths);
  auto labels = detail::label_map(index);
  auto rows = detail::read_feature_rows(paths, !cfg.stats_per_channel);
  if (rows.empty()) {
    if (cfg.stats_per_channel)
      throw DataError("no per-channel feature rows in '" + paths.features() + "': run `rqa` first");
    throw DataError("no latent feature rows in '" + paths.features() +
                    "': run `encode`, then rerun `rqa`");
  }

  ClassSamples samples;
  for (const auto& row : rows) {
    auto it = labels.find(row.record);
    if (it == labels.end())
      throw DataError("feature row for unknown record '" + row.record + "'; rerun `rqa`");
    samples[static_cast<std::size_t>(it->second)].push_back(row.values);
  }

  SignificanceTable table = significance_table(samples, cfg.bonferroni);
  detail::ensure_dir(paths.significance());
  write_significance_csv(paths.significance(), table);
  auto boxes = boxplot_data(samples);
  write_boxplot_csv(paths.boxplot(), boxes);

  std::size_t n_significant = 0;
  for (const auto& row : table.cells)
    for (const auto& cell : row) n_significant += cell.significant ? 1 : 0;
  std::printf("stats: %zu pairs x %d features, %zu significant at alpha %.4g\n",
              table.pairs.size(), table.n_features, n_significant, table.alpha);
  return {paths.significance(), paths.boxplot()};
}

// train-clf: stratified split, then either the small CNN on latent maps
// or the stacked ensemble on latent RQA features.
inline std::vector<std::string> cmd_train_clf(const PipelineConfig& cfg) {
  const PipelinePaths paths = cfg.paths();
  auto index = detail::read_records_index(paths);

  Dataset skeleton(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) skeleton[i].label = index[i].label;
  SplitResult split = stratified_split(skeleton, cfg.test_fraction, seed_for(cfg.seed, "split"));
  std::vector<char> in_test(index.size(), 0);
  for (int i : split.test) in_test[static_cast<std::size_t>(i)] = 1;

  detail::ensure_dir(paths.split_csv());
  CsvWriter split_out(paths.split_csv());
  split_out.row({"record", "role"});
  for (std::size_t i = 0; i < index.size(); ++i)
    split_out.row({index[i].record, in_test[i] ? "test" : "train"});

  std::vector<std::string> produced = {paths.split_csv()};
  const std::string ckpt = cfg.clf_ckpt_path();
  detail::ensure_dir(ckpt);

  if (cfg.classifier == "cnn") {
    auto latents = detail::read_embeddings(paths);
    std::map<std::string, const Mat*> by_record;
    for (const auto& lr : latents) by_record[lr.record] = &lr.map;
    std::vector<Mat> train_x;
    std::vector<ClassLabel> train_y;
    for (int i : split.train) {
      auto it = by_record.find(index[static_cast<std::size_t>(i)].record);
      if (it == by_record.end())
        throw DataError("no latent embedding for record '" +
                        index[static_cast<std::size_t>(i)].record + "': run `encode` first");
      train_x.push_back(*it->second);
      train_y.push_back(index[static_cast<std::size_t>(i)].label);
    }
    TrainConfig tc;
    tc.epochs = cfg.clf_epochs;
    tc.batch_size = cfg.clf_batch;
    tc.learning_rate = cfg.clf_lr;
    tc.seed = seed_for(cfg.seed, "train-clf");
    CnnClassifier<float> clf(train_x.empty() ? 14 : static_cast<int>(train_x[0].rows));
    LossCurve curve = train_cnn_classifier(clf, train_x, train_y, tc);
    save_checkpoint(ckpt, clf.to_checkpoint());
    detail::ensure_dir(paths.clf_loss());
    write_loss_curve(paths.clf_loss(), curve);
    produced.push_back(ckpt);
    produced.push_back(paths.clf_loss());
    std::printf("train-clf: cnn on %zu training records, %d epochs\n", train_x.size(),
                cfg.clf_epochs);
  } else {
    auto rows = detail::read_feature_rows(paths, true);
    if (rows.empty())
      throw DataError("no latent feature rows in '" + paths.features() +
                      "': run `encode`, then rerun `rqa`");
    std::map<std::string, const std::vector<double>*> by_record;
    for (const auto& row : rows) by_record[row.record] = &row.values;
    Dataset train_rows;
    for (int i : split.train) {
      auto it = by_record.find(index[static_cast<std::size_t>(i)].record);
      if (it == by_record.end())
        throw DataError("no latent RQA features for record '" +
                        index[static_cast<std::size_t>(i)].record +
                        "': run `encode`, then rerun `rqa`");
      FeatureVector fv;
      fv.values = *it->second;
      fv.label = index[static_cast<std::size_t>(i)].label;
      train_rows.push_back(fv);
    }
    StackedConfig sc;
    sc.folds = cfg.folds;
    sc.in_sample = cfg.in_sample_stacking;
    sc.seed = seed_for(cfg.seed, "train-clf");
    StackedModel model;
    model.fit(train_rows, sc);
    save_checkpoint(ckpt, model.to_checkpoint());
    produced.push_back(ckpt);
    std::printf("train-clf: stacked ensemble on %zu training records, %d folds\n",
                train_rows.size(), cfg.folds);
  }
  return produced;
}

// evaluate: held-out predictions -> confusion matrix, per-class metric
// table, and a per-(classifier, seed) accuracy row.
inline std::vector<std::string> cmd_evaluate(const PipelineConfig& cfg) {
  const PipelinePaths paths = cfg.paths();
  auto index = detail::read_records_index(paths);
  auto labels = detail::label_map(index);

  std::vector<std::string> train_recs, test_recs;
  detail::read_split(paths, train_recs, test_recs);

  std::vector<ClassLabel> truth;
  for (const auto& rec : test_recs) {
    auto it = labels.find(rec);
    if (it == labels.end())
      throw DataError("split table names unknown record '" + rec + "'; rerun `train-clf`");
    truth.push_back(it->second);
  }

  const std::string ckpt = cfg.clf_ckpt_path();
  detail::require_artifact(ckpt, "train-clf");
  std::vector<ClassLabel> predicted;
  if (cfg.classifier == "cnn") {
    CnnClassifier<float> clf = CnnClassifier<float>::from_checkpoint(load_checkpoint(ckpt));
    auto latents = detail::read_embeddings(paths);
    std::map<std::string, const Mat*> by_record;
    for (const auto& lr : latents) by_record[lr.record] = &lr.map;
    for (const auto& rec : test_recs) {
      auto it = by_record.find(rec);
      if (it == by_record.end())
        throw DataError("no latent embedding for record '" + rec + "': run `encode` first");
      predicted.push_back(clf.predict_label(*it->second));
    }
  } else {
    StackedModel model = StackedModel::from_checkpoint(load_checkpoint(ckpt));
    auto rows = detail::read_feature_rows(paths, true);
    std::map<std::string, const std::vector<double>*> by_record;
    for (const auto& row : rows) by_record[row.record] = &row.values;
    for (const auto& rec : test_recs) {
      auto it = by_record.find(rec);
      if (it == by_record.end())
        throw DataError("no latent RQA features for record '" + rec +
                        "': run `encode`, then rerun `rqa`");
      predicted.push_back(model.predict(*it->second));
    }
  }

  EvaluationReport report = evaluate(truth, predicted);
  detail::ensure_dir(paths.confusion());
  write_confusion_csv(paths.confusion(), report);
  detail::ensure_dir(paths.report_txt());
  {
    std::ofstream txt(paths.report_txt(), std::ios::binary);
    if (!txt) throw DataError("cannot open '" + paths.report_txt() + "' for writing");
    txt << report_table(report);
  }

  // The runs table is keyed, not appended, so reruns stay idempotent.
  std::map<std::string, std::vector<std::string>> runs;
  if (std::filesystem::exists(paths.runs_csv())) {
    auto rows = read_csv(paths.runs_csv());
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].size() == 4) runs[rows[i][0] + "," + rows[i][1]] = rows[i];
  }
  const std::string seed_str = std::to_string(cfg.seed);
  runs[cfg.classifier + "," + seed_str] = {cfg.classifier, seed_str, fmt_full(report.accuracy),
                                           std::to_string(report.total)};
  CsvWriter runs_out(paths.runs_csv());
  runs_out.row({"classifier", "seed", "test_accuracy", "n_test"});
  for (const auto& [key, row] : runs) runs_out.row(row);

  long long correct = 0;
  for (int c = 0; c < kNumClasses; ++c)
    correct += report.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
  std::printf("evaluate: %s test accuracy %.4f (%lld/%lld)\n", cfg.classifier.c_str(),
              report.accuracy, correct, report.total);
  return {paths.confusion(), paths.report_txt(), paths.runs_csv()};
}

// export-embeddings: stable, single-file copy of the latent table for
// external projection tools.
inline std::vector<std::string> cmd_export_embeddings(const PipelineConfig& cfg) {
  const PipelinePaths paths = cfg.paths();
  detail::require_artifact(paths.embeddings(), "encode");
  auto rows = read_csv(paths.embeddings());
  detail::ensure_dir(paths.export_csv());
  CsvWriter out(paths.export_csv());
  for (const auto& row : rows) out.row(row);
  std::printf("export-embeddings: %zu rows -> %s\n",
              rows.empty() ? static_cast<std::size_t>(0) : rows.size() - 1,
              paths.export_csv().c_str());
  return {paths.export_csv()};
}

inline const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {
      "synth",  "ingest", "embed-params", "rp",        "rqa",
      "train-ae", "encode", "stats",        "train-clf", "evaluate",
      "export-embeddings"};
  return names;
}

// Runs one subcommand and records every produced file in the run
// manifest. Files whose recorded hash differs from the fresh one are
// counted so a rerun makes unexpected drift visible.
inline void run_subcommand(const std::string& name, const PipelineConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();

  std::vector<std::string> produced;
  if (name == "synth")
    produced = cmd_synth(cfg);
  else if (name == "ingest")
    produced = cmd_ingest(cfg);
  else if (name == "embed-params")
    produced = cmd_embed_params(cfg);
  else if (name == "rp")
    produced = cmd_rp(cfg);
  else if (name == "rqa")
    produced = cmd_rqa(cfg);
  else if (name == "train-ae")
    produced = cmd_train_ae(cfg);
  else if (name == "encode")
    produced = cmd_encode(cfg);
  else if (name == "stats")
    produced = cmd_stats(cfg);
  else if (name == "train-clf")
    produced = cmd_train_clf(cfg);
  else if (name == "evaluate")
    produced = cmd_evaluate(cfg);
  else if (name == "export-embeddings")
    produced = cmd_export_embeddings(cfg);
  else {
    std::string all;
    for (const auto& n : subcommand_names()) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError("unknown subcommand '" + name + "' (expected one of: " + all + ")");
  }

  const PipelinePaths paths = cfg.paths();
  detail::ensure_dir(paths.run_manifest());
  auto before = read_run_manifest(paths.run_manifest());
  std::size_t changed = 0;
  for (const auto& file : produced) {
    std::string key = file;
    if (key.rfind(cfg.out_dir, 0) == 0) {
      key = key.substr(cfg.out_dir.size());
      while (!key.empty() && (key.front() == '/' || key.front() == '\\')) key.erase(key.begin());
    }
    auto it = before.find(key);
    if (it != before.end() && it->second != hash_hex(hash_file(file))) ++changed;
  }
  update_run_manifest(paths.run_manifest(), produced, cfg.out_dir);

  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("[%s] %zu artifacts, %zu changed, %.1f s\n", name.c_str(), produced.size(), changed,
              secs);
}

}  // namespace rqae
