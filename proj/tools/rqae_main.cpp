// rqae: recurrence-image pipeline for multichannel physiological signals.
// One subcommand per pipeline stage; a sectioned config file supplies the
// parameters and command-line flags override individual fields, so the
// archived config stays the canonical record of a run.

#include <cstdio>
#include <string>
#include <vector>

#include "rqae/config.hpp"
#include "rqae/pipeline.hpp"

namespace {

void print_usage() {
  std::puts(
      "usage: rqae <subcommand> [--config FILE] [flags]\n"
      "\n"
      "subcommands (in pipeline order):\n"
      "  synth               generate the five-family synthetic dataset\n"
      "  ingest              parse records, downsample, write signal CSVs\n"
      "  embed-params        pick delay/dimension per channel (or pin them)\n"
      "  rp                  render recurrence images per channel\n"
      "  rqa                 quantify recurrence features (channels + latent)\n"
      "  train-ae            train the convolutional autoencoder\n"
      "  encode              project image stacks to latent maps\n"
      "  stats               pairwise rank-sum significance + box summaries\n"
      "  train-clf           train the cnn or stacked classifier\n"
      "  evaluate            held-out confusion matrix and metric report\n"
      "  export-embeddings   copy the latent table for external projection\n"
      "\n"
      "common flags:\n"
      "  --config FILE           sectioned key/value config (flags win)\n"
      "  --set SECTION.KEY=VAL   override any single config field\n"
      "  --manifest FILE         record list with labels (ingest)\n"
      "  --out DIR               output directory (default: out)\n"
      "  --window-seconds S      keep only the first S seconds per record\n"
      "  --rate HZ               downsample target rate (default: 250)\n"
      "  --raw-decimate          skip the anti-alias filter\n"
      "  --tau N / --dim N       pin embedding parameters (disables auto)\n"
      "  --auto-embed BOOL       select tau and m from the data\n"
      "  --epsilon E             pin the recurrence threshold\n"
      "  --target-rr R           threshold from a target recurrence rate\n"
      "  --image-size N          recurrence image side (default: 224)\n"
      "  --dump-dm               also write raw distance-matrix dumps\n"
      "  --lmin N / --vmin N     minimum diagonal / vertical line lengths\n"
      "  --exclude-loi BOOL      drop the identity line from RQA scans\n"
      "  --latent-target-rr R    binarization rate for latent maps\n"
      "  --epochs N / --batch N / --lr X   training knobs for the step\n"
      "  --checkpoint FILE       model file for the step\n"
      "  --classifier KIND       cnn or stacked\n"
      "  --folds N               out-of-fold stacking folds (default: 5)\n"
      "  --in-sample-stacking    meta-features from in-sample predictions\n"
      "  --test-fraction F       held-out share per class (default: 0.2)\n"
      "  --per-channel           stats over channel rows instead of latent\n"
      "  --bonferroni            per-cell alpha divided by table size\n"
      "  --records N             synthetic records per class (default: 10)\n"
      "  --synth-dir DIR         where synth writes its dataset\n"
      "  --seed N                root seed for every stage\n"
      "  --jobs N                worker threads (default: logical cores)\n"
      "\n"
      "exit codes: 0 ok, 2 config error, 3 data error, 4 numerical divergence");
}

struct FlagDef {
  const char* flag;
  const char* key;  // config key, or "" for command-dependent mapping
  bool takes_value;
};

// Flags that resolve to one fixed config key.
const FlagDef kFlags[] = {
    {"--manifest", "data.manifest", true},
    {"--out", "data.out_dir", true},
    {"--window-seconds", "data.window_seconds", true},
    {"--rate", "ingest.target_rate_hz", true},
    {"--raw-decimate", "ingest.raw_decimate", false},
    {"--auto-embed", "embed.auto", true},
    {"--estimate-samples", "embed.estimate_samples", true},
    {"--epsilon", "recurrence.epsilon", true},
    {"--target-rr", "recurrence.target_rr", true},
    {"--image-size", "recurrence.image_size", true},
    {"--dump-dm", "recurrence.dump_dm", false},
    {"--lmin", "rqa.lmin", true},
    {"--vmin", "rqa.vmin", true},
    {"--exclude-loi", "rqa.exclude_loi", true},
    {"--latent-target-rr", "rqa.latent_target_rr", true},
    {"--seed", "seed.root", true},
    {"--classifier", "classifier.kind", true},
    {"--folds", "classifier.folds", true},
    {"--in-sample-stacking", "classifier.in_sample", false},
    {"--test-fraction", "classifier.test_fraction", true},
    {"--per-channel", "stats.per_channel", false},
    {"--bonferroni", "stats.bonferroni", false},
    {"--records", "synth.per_class", true},
    {"--synth-dir", "synth.dir", true},
    {"--jobs", "run.jobs", true},
};

std::string take_value(const std::vector<std::string>& args, std::size_t& i,
                       const std::string& flag) {
  if (i + 1 >= args.size()) throw rqae::ConfigError("flag '" + flag + "' needs a value");
  return args[++i];
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rqae;
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) {
    print_usage();
    return 2;
  }
  const std::string cmd = args[0];
  if (cmd == "help" || cmd == "--help" || cmd == "-h") {
    print_usage();
    return 0;
  }

  try {
    Config cfg;
    // The config file loads first so every flag can override it.
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] != "--config") continue;
      std::string path = take_value(args, i, "--config");
      try {
        cfg = load_config(path);
      } catch (const ParseError& e) {
        throw ConfigError(std::string("config file '") + path + "': " + e.what());
      }
    }

    // Training knobs and checkpoints belong to whichever trainer the
    // subcommand drives.
    const bool clf_step = cmd == "train-clf" || cmd == "evaluate";
    for (std::size_t i = 1; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a == "--config") {
        ++i;
        continue;
      }
      if (a == "--set") {
        apply_override(cfg, take_value(args, i, "--set"));
        continue;
      }
      if (a == "--tau") {
        cfg.set("embed.tau", take_value(args, i, a));
        cfg.set("embed.auto", "false");
        continue;
      }
      if (a == "--dim") {
        cfg.set("embed.dim", take_value(args, i, a));
        cfg.set("embed.auto", "false");
        continue;
      }
      if (a == "--epochs") {
        cfg.set(clf_step ? "classifier.epochs" : "train.epochs", take_value(args, i, a));
        continue;
      }
      if (a == "--batch") {
        cfg.set(clf_step ? "classifier.batch" : "train.batch", take_value(args, i, a));
        continue;
      }
      if (a == "--lr") {
        cfg.set(clf_step ? "classifier.lr" : "train.lr", take_value(args, i, a));
        continue;
      }
      if (a == "--checkpoint") {
        cfg.set(clf_step ? "models.classifier" : "models.autoencoder", take_value(args, i, a));
        continue;
      }
      bool matched = false;
      for (const auto& def : kFlags) {
        if (a != def.flag) continue;
        cfg.set(def.key, def.takes_value ? take_value(args, i, a) : "true");
        matched = true;
        break;
      }
      if (!matched)
        throw ConfigError("unknown flag '" + a + "' (see `rqae help`)");
    }

    PipelineConfig pipeline = pipeline_config(cfg);
    run_subcommand(cmd, pipeline);
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "numerical divergence: %s\n", e.what());
    return 4;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
