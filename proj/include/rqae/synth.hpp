#pragma once

// Synthetic five-class dataset generator. Each class is a distinct signal
// family whose recurrence structure separates it from the others, written
// out as standard format-16 records plus a labeled manifest so the full
// pipeline can run end to end without any clinical data.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rqae/common.hpp"
#include "rqae/csv.hpp"
#include "rqae/recurrence.hpp"
#include "rqae/rng.hpp"
#include "rqae/wfdb.hpp"

namespace rqae {

namespace detail {

// Family waveforms on t in seconds, nominal amplitude around 1 mV.
// frac is t/duration for the swept family.
inline double synth_wave(ClassLabel family, double t, double frac, double f0, double phase,
                         double noise) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  switch (family) {
    case ClassLabel::HC:
      return std::sin(two_pi * f0 * t + phase);
    case ClassLabel::MI:
      // Equal-strength third harmonic: the recurrence texture gains clear
      // sub-period bands that the fundamental alone never produces.
      return std::sin(two_pi * f0 * t + phase) + std::sin(two_pi * 3.0 * f0 * t + 3.0 * phase);
    case ClassLabel::BBB: {
      // Linear sweep 0.9 -> 2.1 Hz; phase is the integral of the
      // instantaneous frequency so the sweep stays continuous.
      const double fa = 0.9, fb = 2.1;
      return std::sin(two_pi * (fa * t + 0.5 * (fb - fa) * frac * t) + phase);
    }
    case ClassLabel::CM: {
      double s = 0.5 + 0.5 * std::sin(two_pi * f0 * t + phase);
      double p = s * s;  // pow(s, 8) via three squarings
      p = p * p;
      p = p * p;
      return 2.0 * p - 0.5;
    }
    case ClassLabel::DR:
      // Noise-dominated: diagonal lines in the recurrence plot break into
      // speckle, which is the family's signature.
      return 0.5 * std::sin(two_pi * f0 * t + phase) + 0.8 * noise;
  }
  return 0.0;
}

inline std::string synth_admission_text(ClassLabel family) {
  switch (family) {
    case ClassLabel::HC: return "Reason for admission: Healthy control";
    case ClassLabel::MI: return "Reason for admission: Myocardial infarction";
    case ClassLabel::BBB: return "Reason for admission: Bundle branch block";
    case ClassLabel::CM: return "Reason for admission: Cardiomyopathy";
    case ClassLabel::DR: return "Reason for admission: Dysrhythmia";
  }
  return "Reason for admission: n/a";
}

}  // namespace detail

// One synthetic subject. The generator draws the family base frequency
// once per record and a phase plus gain perturbation per channel, so the
// fifteen channels look like views of one underlying rhythm rather than
// fifteen unrelated traces. All draws come from a generator seeded by the
// record name, which makes every record a pure function of (seed, name).
inline SignalRecord synth_record(ClassLabel family, const std::string& name, std::uint64_t seed,
                                 double rate_hz = 1000.0, double seconds = 8.0) {
  if (rate_hz <= 0.0) throw ConfigError("synthesis rate must be positive");
  if (seconds <= 0.0) throw ConfigError("synthesis duration must be positive");
  const long long n = static_cast<long long>(std::llround(rate_hz * seconds));
  if (n < 16) throw ConfigError("synthesis window is too short to hold a waveform");

  Rng rng(seed_for(seed, "synth.rec." + name));
  const double f0 = rng.uniform(0.9, 1.3);

  const auto& order = canonical_channel_order();
  SignalRecord rec;
  rec.header.record_name = name;
  rec.header.n_channels = static_cast<int>(order.size());
  rec.header.sampling_rate_hz = rate_hz;
  rec.header.n_samples = n;
  rec.header.comments.push_back(detail::synth_admission_text(family));
  rec.class_label = family;
  rec.samples_mv.resize(order.size());

  const double duration = static_cast<double>(n) / rate_hz;
  for (std::size_t c = 0; c < order.size(); ++c) {
    ChannelSpec ch;
    ch.file_name = name + ".dat";
    ch.gain_adu_per_mv = kWfdbDefaultGain;
    ch.adc_resolution_bits = 16;
    ch.label = order[c];
    rec.header.channels.push_back(ch);

    const double phase = rng.uniform(0.0, 6.283185307179586);
    const double gain = rng.uniform(0.7, 1.3);
    auto& col = rec.samples_mv[c];
    col.resize(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / rate_hz;
      const double noise = family == ClassLabel::DR ? rng.uniform(-1.0, 1.0) : 0.0;
      col[static_cast<std::size_t>(i)] =
          gain * detail::synth_wave(family, t, t / duration, f0, phase, noise);
    }
  }
  return rec;
}

struct SynthDataset {
  std::vector<std::string> record_names;
  std::string manifest_path;
  std::vector<std::string> files;  // everything written, manifest included
};

// Writes n_per_class records per family under <out_dir>/records plus
// <out_dir>/manifest.csv. Same seed, same bytes: regeneration is the
// documented way to reproduce a dataset, so nothing here depends on
// iteration order of anything unordered.
inline SynthDataset synth_dataset(const std::string& out_dir, std::uint64_t seed, int n_per_class,
                                  double rate_hz = 1000.0, double seconds = 8.0) {
  if (n_per_class < 4)
    throw ConfigError("synthetic dataset needs at least 4 records per class, got " +
                      std::to_string(n_per_class));

  namespace fs = std::filesystem;
  const fs::path records_dir = fs::path(out_dir) / "records";
  fs::create_directories(records_dir);

  SynthDataset out;
  const fs::path manifest_path = fs::path(out_dir) / "manifest.csv";
  CsvWriter manifest(manifest_path.string());
  manifest.row({"record_path", "label"});

  const ClassLabel families[] = {ClassLabel::HC, ClassLabel::MI, ClassLabel::BBB, ClassLabel::CM,
                                 ClassLabel::DR};
  for (ClassLabel family : families) {
    std::string prefix = to_string(family);
    for (char& c : prefix) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (int i = 0; i < n_per_class; ++i) {
      char idx[16];
      std::snprintf(idx, sizeof(idx), "%04d", i);
      const std::string name = prefix + "_" + idx;
      SignalRecord rec = synth_record(family, name, seed, rate_hz, seconds);
      WfdbFiles files = write_record(rec);

      const fs::path hea = records_dir / (name + ".hea");
      const fs::path dat = records_dir / (name + ".dat");
      std::ofstream head(hea, std::ios::binary);
      head << files.header_text;
      if (!head) throw DataError("cannot write '" + hea.string() + "'");
      std::ofstream sig(dat, std::ios::binary);
      sig.write(reinterpret_cast<const char*>(files.signal_bytes.data()),
                static_cast<std::streamsize>(files.signal_bytes.size()));
      if (!sig) throw DataError("cannot write '" + dat.string() + "'");

      manifest.row({"records/" + name + ".hea", to_string(family)});
      out.record_names.push_back(name);
      out.files.push_back(hea.string());
      out.files.push_back(dat.string());
    }
  }

  out.manifest_path = manifest_path.string();
  out.files.push_back(out.manifest_path);
  return out;
}

}  // namespace rqae
