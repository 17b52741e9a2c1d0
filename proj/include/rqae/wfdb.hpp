#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rqae/common.hpp"
#include "rqae/csv.hpp"

namespace rqae {

// WFDB invalid-sample sentinel for format 16.
inline constexpr int16_t kWfdbInvalidSample = -32768;
// Default ADC gain when the header omits the field or states zero.
inline constexpr double kWfdbDefaultGain = 200.0;

struct ChannelSpec {
  std::string file_name;
  int storage_format = 16;
  double gain_adu_per_mv = kWfdbDefaultGain;
  int baseline_adu = 0;
  int adc_resolution_bits = 12;
  int adc_zero = 0;
  int init_value = 0;
  std::string units = "mV";
  std::string label;
};

struct RecordHeader {
  std::string record_name;
  int n_channels = 0;
  double sampling_rate_hz = 250.0;
  long long n_samples = 0;
  std::vector<ChannelSpec> channels;
  std::vector<std::string> comments;  // '#' lines, leading marker stripped
};

struct SignalRecord {
  RecordHeader header;
  std::vector<std::vector<double>> samples_mv;  // [channel][sample]
  std::optional<ClassLabel> class_label;

  long long n_samples() const {
    return samples_mv.empty() ? 0 : static_cast<long long>(samples_mv[0].size());
  }
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream iss(line);
  std::string t;
  while (iss >> t) toks.push_back(t);
  return toks;
}

inline bool parse_int(const std::string& s, long long& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stoll(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

}  // namespace detail

// Parses a WFDB .hea payload. Only the fields the pipeline needs are
// interpreted; remaining optional fields are accepted and ignored.
inline RecordHeader parse_header(const std::string& text) {
  RecordHeader hdr;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool record_line_seen = false;
  int signal_lines = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string c = line.substr(1);
      while (!c.empty() && c.front() == ' ') c.erase(c.begin());
      hdr.comments.push_back(c);
      continue;
    }

    auto toks = detail::tokenize(line);
    if (!record_line_seen) {
      // record line: name nsig [fs [counter] [nsamp ...]]
      if (toks.size() < 2) throw ParseError("record line needs a name and a signal count", line_no);
      hdr.record_name = toks[0];
      // a segmented record name would carry '/'; multi-segment is unsupported
      if (hdr.record_name.find('/') != std::string::npos)
        throw ParseError("multi-segment records are not supported", line_no);
      long long nsig = 0;
      if (!detail::parse_int(toks[1], nsig) || nsig < 1)
        throw ParseError("invalid signal count '" + toks[1] + "'", line_no);
      hdr.n_channels = static_cast<int>(nsig);
      if (toks.size() >= 3) {
        // sampling frequency, possibly "fs/counter"
        std::string fs = toks[2];
        auto slash = fs.find('/');
        if (slash != std::string::npos) fs = fs.substr(0, slash);
        double rate = 0.0;
        if (!detail::parse_double(fs, rate) || rate <= 0.0)
          throw ParseError("invalid sampling rate '" + toks[2] + "'", line_no);
        hdr.sampling_rate_hz = rate;
      }
      if (toks.size() >= 4) {
        long long ns = 0;
        if (!detail::parse_int(toks[3], ns) || ns < 0)
          throw ParseError("invalid sample count '" + toks[3] + "'", line_no);
        hdr.n_samples = ns;
      }
      record_line_seen = true;
      continue;
    }

    if (signal_lines >= hdr.n_channels)
      throw ParseError("unexpected extra signal line", line_no);

    // signal line: fname format [gain[(baseline)][/units] [adcres [adczero [init [cksum [bsize [desc]]]]]]]
    if (toks.size() < 2) throw ParseError("signal line needs a file name and a format", line_no);
    ChannelSpec ch;
    ch.file_name = toks[0];

    std::string fmt = toks[1];
    // strip samples-per-frame / skew / offset decorations (xN, :N, +N)
    auto deco = fmt.find_first_of("x:+");
    std::string fmt_code = (deco == std::string::npos) ? fmt : fmt.substr(0, deco);
    long long code = 0;
    if (!detail::parse_int(fmt_code, code))
      throw ParseError("invalid storage format '" + fmt + "'", line_no);
    ch.storage_format = static_cast<int>(code);
    if (ch.storage_format != 16)
      throw DataError("unsupported WFDB storage format " + std::to_string(ch.storage_format) +
                      " in record '" + hdr.record_name + "' (only format 16 is supported)");
    if (deco != std::string::npos && fmt[deco] == 'x') {
      long long spf = 0;
      std::string rest = fmt.substr(deco + 1);
      auto next = rest.find_first_of(":+");
      if (!detail::parse_int(next == std::string::npos ? rest : rest.substr(0, next), spf) || spf != 1)
        throw DataError("unsupported samples-per-frame in record '" + hdr.record_name + "'");
    }

    bool have_baseline = false;
    if (toks.size() >= 3) {
      // gain, optionally "gain(baseline)/units"
      std::string g = toks[2];
      auto slash = g.find('/');
      if (slash != std::string::npos) {
        ch.units = g.substr(slash + 1);
        g = g.substr(0, slash);
      }
      auto open = g.find('(');
      if (open != std::string::npos) {
        auto close = g.find(')', open);
        if (close == std::string::npos) throw ParseError("unbalanced '(' in gain field", line_no);
        long long base = 0;
        if (!detail::parse_int(g.substr(open + 1, close - open - 1), base))
          throw ParseError("invalid baseline in gain field", line_no);
        ch.baseline_adu = static_cast<int>(base);
        have_baseline = true;
        g = g.substr(0, open);
      }
      double gain = 0.0;
      if (!detail::parse_double(g, gain))
        throw ParseError("invalid gain '" + toks[2] + "'", line_no);
      ch.gain_adu_per_mv = (gain == 0.0) ? kWfdbDefaultGain : gain;
    }
    if (toks.size() >= 4) {
      long long res = 0;
      if (!detail::parse_int(toks[3], res) || res < 0)
        throw ParseError("invalid ADC resolution '" + toks[3] + "'", line_no);
      if (res > 0) ch.adc_resolution_bits = static_cast<int>(res);
    }
    if (toks.size() >= 5) {
      long long zero = 0;
      if (!detail::parse_int(toks[4], zero))
        throw ParseError("invalid ADC zero '" + toks[4] + "'", line_no);
      ch.adc_zero = static_cast<int>(zero);
      if (!have_baseline) ch.baseline_adu = ch.adc_zero;
    }
    if (toks.size() >= 6) {
      long long iv = 0;
      if (detail::parse_int(toks[5], iv)) ch.init_value = static_cast<int>(iv);
    }
    // checksum and block size (toks 6, 7) are accepted unchecked
    if (toks.size() >= 9) {
      // description is free text: rejoin everything from token 8 on
      std::string desc = toks[8];
      for (std::size_t i = 9; i < toks.size(); ++i) desc += " " + toks[i];
      ch.label = desc;
    }
    if (ch.label.empty()) ch.label = "ch" + std::to_string(signal_lines);

    hdr.channels.push_back(std::move(ch));
    ++signal_lines;
  }

  if (!record_line_seen) throw ParseError("empty header: no record line", line_no);
  if (signal_lines != hdr.n_channels)
    throw DataError("header of '" + hdr.record_name + "' declares " +
                    std::to_string(hdr.n_channels) + " channels but has " +
                    std::to_string(signal_lines) + " signal lines");
  return hdr;
}

// Decodes a format-16 signal payload (16-bit LE two's complement,
// channel-interleaved frames) into millivolts. Invalid-sample sentinels
// are linearly interpolated; a record with more than 1% invalid samples
// is rejected.
inline SignalRecord read_signals(const RecordHeader& header, const std::vector<uint8_t>& bytes) {
  const int nch = header.n_channels;
  if (nch < 1) throw DataError("record '" + header.record_name + "' has no channels");
  const std::size_t frame_bytes = 2 * static_cast<std::size_t>(nch);
  if (bytes.size() % frame_bytes != 0)
    throw DataError("signal payload of '" + header.record_name + "' is truncated: " +
                    std::to_string(bytes.size()) + " bytes is not a multiple of " +
                    std::to_string(frame_bytes));
  const long long frames = static_cast<long long>(bytes.size() / frame_bytes);
  if (header.n_samples > 0 && frames != header.n_samples)
    throw DataError("signal payload of '" + header.record_name + "' holds " +
                    std::to_string(frames) + " frames but the header declares " +
                    std::to_string(header.n_samples));

  SignalRecord rec;
  rec.header = header;
  rec.header.n_samples = frames;
  rec.samples_mv.assign(nch, std::vector<double>(frames, 0.0));

  std::vector<std::vector<long long>> missing(nch);
  long long n_missing = 0;
  for (long long t = 0; t < frames; ++t) {
    const uint8_t* frame = bytes.data() + static_cast<std::size_t>(t) * frame_bytes;
    for (int c = 0; c < nch; ++c) {
      uint16_t raw_u = static_cast<uint16_t>(frame[2 * c]) |
                       (static_cast<uint16_t>(frame[2 * c + 1]) << 8);
      int16_t raw = static_cast<int16_t>(raw_u);
      if (raw == kWfdbInvalidSample) {
        missing[c].push_back(t);
        ++n_missing;
        rec.samples_mv[c][t] = std::numeric_limits<double>::quiet_NaN();
      } else {
        const ChannelSpec& ch = header.channels[c];
        rec.samples_mv[c][t] = (static_cast<double>(raw) - ch.baseline_adu) / ch.gain_adu_per_mv;
      }
    }
  }

  const long long total = frames * nch;
  if (total > 0 && n_missing * 100 > total)
    throw DataError("record '" + header.record_name + "' has " + std::to_string(n_missing) +
                    " invalid samples (more than 1% of " + std::to_string(total) + ")");

  // linear interpolation across sentinel gaps, nearest valid at the edges
  for (int c = 0; c < nch; ++c) {
    if (missing[c].empty()) continue;
    auto& x = rec.samples_mv[c];
    long long n = frames;
    long long prev_valid = -1;
    for (long long t = 0; t < n; ++t) {
      if (!std::isnan(x[t])) {
        prev_valid = t;
        continue;
      }
      long long next_valid = t + 1;
      while (next_valid < n && std::isnan(x[next_valid])) ++next_valid;
      if (prev_valid < 0 && next_valid >= n)
        throw DataError("channel " + std::to_string(c) + " of '" + header.record_name +
                        "' has no valid samples");
      for (long long u = t; u < std::min(next_valid, n); ++u) {
        if (prev_valid < 0) {
          x[u] = x[next_valid];
        } else if (next_valid >= n) {
          x[u] = x[prev_valid];
        } else {
          double w = static_cast<double>(u - prev_valid) / static_cast<double>(next_valid - prev_valid);
          x[u] = x[prev_valid] + w * (x[next_valid] - x[prev_valid]);
        }
      }
      t = next_valid - 1;
    }
  }
  return rec;
}

// Converts a millivolt sample back to its raw ADC code.
inline int16_t mv_to_raw(double mv, const ChannelSpec& ch) {
  double raw = mv * ch.gain_adu_per_mv + ch.baseline_adu;
  long long r = std::llround(raw);
  if (r > 32767) r = 32767;
  if (r < -32767) r = -32767;  // -32768 is the invalid-sample sentinel
  return static_cast<int16_t>(r);
}

// Serializes a record to WFDB text header + format-16 payload. The
// synthetic-dataset generator and the round-trip tests both use this.
struct WfdbFiles {
  std::string header_text;
  std::vector<uint8_t> signal_bytes;
};

inline WfdbFiles write_record(const SignalRecord& rec) {
  const RecordHeader& hdr = rec.header;
  const int nch = hdr.n_channels;
  const long long n = rec.n_samples();

  WfdbFiles out;
  out.signal_bytes.resize(static_cast<std::size_t>(n) * nch * 2);
  std::vector<int32_t> checksum(nch, 0);
  std::vector<int16_t> first(nch, 0);
  for (long long t = 0; t < n; ++t) {
    for (int c = 0; c < nch; ++c) {
      int16_t raw = mv_to_raw(rec.samples_mv[c][t], hdr.channels[c]);
      if (t == 0) first[c] = raw;
      checksum[c] = static_cast<int32_t>((checksum[c] + raw) & 0xffff);
      std::size_t off = (static_cast<std::size_t>(t) * nch + c) * 2;
      out.signal_bytes[off] = static_cast<uint8_t>(raw & 0xff);
      out.signal_bytes[off + 1] = static_cast<uint8_t>((raw >> 8) & 0xff);
    }
  }

  std::ostringstream head;
  head << hdr.record_name << ' ' << nch << ' ' << fmt_full(hdr.sampling_rate_hz) << ' ' << n << '\n';
  for (int c = 0; c < nch; ++c) {
    const ChannelSpec& ch = hdr.channels[c];
    int16_t cks = static_cast<int16_t>(checksum[c]);
    head << hdr.record_name << ".dat 16 " << fmt_full(ch.gain_adu_per_mv);
    if (ch.baseline_adu != ch.adc_zero) head << '(' << ch.baseline_adu << ')';
    head << "/mV " << ch.adc_resolution_bits << ' ' << ch.adc_zero << ' ' << first[c] << ' '
         << cks << " 0 " << ch.label << '\n';
  }
  for (const auto& c : hdr.comments) head << "# " << c << '\n';
  out.header_text = head.str();
  return out;
}

// Maps the free-text admission-reason comment to a diagnostic class.
inline std::optional<ClassLabel> extract_label_from_comments(const RecordHeader& hdr) {
  auto lower = [](std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
  };
  for (const auto& comment : hdr.comments) {
    std::string c = lower(comment);
    if (c.find("reason for admission") == std::string::npos) continue;
    if (c.find("myocardial infarction") != std::string::npos) return ClassLabel::MI;
    if (c.find("bundle branch block") != std::string::npos) return ClassLabel::BBB;
    if (c.find("cardiomyopathy") != std::string::npos) return ClassLabel::CM;
    if (c.find("heart failure") != std::string::npos) return ClassLabel::CM;
    if (c.find("dysrhythmia") != std::string::npos) return ClassLabel::DR;
    if (c.find("healthy control") != std::string::npos) return ClassLabel::HC;
  }
  return std::nullopt;
}

struct ManifestEntry {
  std::string record_path;  // path of the .hea file, extension optional
  ClassLabel label;
};

// Manifest CSV: record_path,label. A header row is recognized and skipped.
inline std::vector<ManifestEntry> read_manifest(const std::string& path) {
  auto rows = read_csv(path);
  std::vector<ManifestEntry> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() < 2)
      throw DataError("manifest row " + std::to_string(i + 1) + " needs record_path,label");
    if (i == 0 && (row[1] == "label" || row[0] == "record_path")) continue;
    out.push_back({row[0], label_from_string(row[1])});
  }
  if (out.empty()) throw DataError("manifest '" + path + "' lists no records");
  return out;
}

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline std::string read_file_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rqae
