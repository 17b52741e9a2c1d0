#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "rqae/common.hpp"
#include "rqae/csv.hpp"
#include "rqae/hash.hpp"
#include "rqae/wfdb.hpp"

namespace rqae {

// ---- per-record signal table ----

struct SignalTable {
  std::vector<std::string> channels;
  std::vector<std::vector<double>> columns;  // [channel][sample]
  double sampling_rate_hz = 0.0;

  long long n_samples() const {
    return columns.empty() ? 0 : static_cast<long long>(columns[0].size());
  }
};

// Header row carries the channel labels; a leading comment row pins the
// sampling rate so downstream commands need no side channel.
inline void write_signal_csv(const std::string& path, const SignalTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "# rate_hz=" << fmt_full(table.sampling_rate_hz) << "\n";
  for (std::size_t c = 0; c < table.channels.size(); ++c) {
    if (c) out << ',';
    out << table.channels[c];
  }
  out << '\n';
  const long long n = table.n_samples();
  for (long long i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << ',';
      out << fmt_full(table.columns[c][static_cast<std::size_t>(i)]);
    }
    out << '\n';
  }
  if (!out.flush()) throw DataError("write to '" + path + "' failed");
}

inline SignalTable read_signal_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open signal table '" + path + "'");
  SignalTable table;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find("rate_hz=");
      if (eq != std::string::npos) table.sampling_rate_hz = std::stod(line.substr(eq + 8));
      continue;
    }
    const auto fields = split_csv_line(line);
    if (table.channels.empty()) {
      table.channels = fields;
      table.columns.assign(fields.size(), {});
      continue;
    }
    if (fields.size() != table.channels.size())
      throw ParseError("signal row has " + std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(table.channels.size()),
                       line_no);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      try {
        table.columns[c].push_back(std::stod(fields[c]));
      } catch (const std::exception&) {
        throw ParseError("signal value '" + fields[c] + "' is not numeric", line_no);
      }
    }
  }
  if (table.channels.empty()) throw DataError("signal table '" + path + "' is empty");
  return table;
}

// ---- distance-matrix dump ----

// Layout: u32 k, u32 reserved (zero), then k*k little-endian f32 values
// row-major.
inline void write_dm_dump(const std::string& path, const Mat& dm) {
  if (dm.rows != dm.cols) throw ShapeError("distance matrix must be square");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  const std::uint32_t k = static_cast<std::uint32_t>(dm.rows);
  const std::uint32_t reserved = 0;
  unsigned char word[4];
  auto put_u32 = [&](std::uint32_t v) {
    word[0] = static_cast<unsigned char>(v);
    word[1] = static_cast<unsigned char>(v >> 8);
    word[2] = static_cast<unsigned char>(v >> 16);
    word[3] = static_cast<unsigned char>(v >> 24);
    out.write(reinterpret_cast<const char*>(word), 4);
  };
  put_u32(k);
  put_u32(reserved);
  for (double v : dm.v) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(bits);
  }
  if (!out.flush()) throw DataError("write to '" + path + "' failed");
}

inline Mat read_dm_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open matrix dump '" + path + "'");
  unsigned char word[4];
  auto get_u32 = [&](std::uint32_t& v) {
    in.read(reinterpret_cast<char*>(word), 4);
    if (!in) throw DataError("matrix dump '" + path + "' is truncated");
    v = static_cast<std::uint32_t>(word[0]) | (static_cast<std::uint32_t>(word[1]) << 8) |
        (static_cast<std::uint32_t>(word[2]) << 16) | (static_cast<std::uint32_t>(word[3]) << 24);
  };
  std::uint32_t k = 0, reserved = 0;
  get_u32(k);
  get_u32(reserved);
  Mat dm;
  dm.rows = dm.cols = static_cast<long long>(k);
  dm.v.resize(static_cast<std::size_t>(k) * k);
  for (auto& v : dm.v) {
    std::uint32_t bits = 0;
    get_u32(bits);
    float f;
    std::memcpy(&f, &bits, 4);
    v = static_cast<double>(f);
  }
  return dm;
}

// ---- run manifest ----

// Every subcommand lists its outputs here with content hashes; reruns
// with unchanged inputs must reproduce the same hashes.
inline std::map<std::string, std::string> read_run_manifest(const std::string& path) {
  std::map<std::string, std::string> entries;
  std::ifstream probe(path, std::ios::binary);
  if (!probe) return entries;  // absent manifest reads as empty
  probe.close();
  for (const auto& row : read_csv(path)) {
    if (row.size() < 2 || row[0] == "path") continue;
    entries[row[0]] = row[1];
  }
  return entries;
}

inline void update_run_manifest(const std::string& manifest_path,
                                const std::vector<std::string>& produced_files,
                                const std::string& relative_to = "") {
  auto entries = read_run_manifest(manifest_path);
  for (const auto& file : produced_files) {
    std::string key = file;
    if (!relative_to.empty() && key.rfind(relative_to, 0) == 0) {
      key = key.substr(relative_to.size());
      while (!key.empty() && (key.front() == '/' || key.front() == '\\')) key.erase(key.begin());
    }
    entries[key] = hash_hex(hash_file(file));
  }
  CsvWriter out(manifest_path);
  out.row({"path", "fnv1a64"});
  for (const auto& [path, digest] : entries) out.row({path, digest});
}

}  // namespace rqae
