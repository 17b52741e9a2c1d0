#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "rqae/config.hpp"
#include "rqae/hash.hpp"
#include "rqae/io.hpp"
#include "rqae/rng.hpp"

using namespace rqae;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config parses sections, comments and typed values") {
  Config cfg = parse_config_text(
      "# run settings\n"
      "[data]\n"
      "out_dir = /tmp/run1\n"
      "window_seconds = 12.5\n"
      "\n"
      "[embed]\n"
      "auto = false   \n"
      "tau=7\n"
      "[seed]\n"
      "root = 12345678901234567890\n");
  REQUIRE(cfg.get_string("data.out_dir", "") == "/tmp/run1");
  REQUIRE(cfg.get_double("data.window_seconds", 0.0) == 12.5);
  REQUIRE(cfg.get_bool("embed.auto", true) == false);
  REQUIRE(cfg.get_int("embed.tau", 0) == 7);
  REQUIRE(cfg.get_seed("seed.root", 0) == 12345678901234567890ull);
}

TEST_CASE("config falls back when a key is absent") {
  Config cfg = parse_config_text("[a]\nx = 1\n");
  REQUIRE(cfg.get_int("a.y", 42) == 42);
  REQUIRE(cfg.get_string("b.z", "dflt") == "dflt");
  REQUIRE(cfg.get_bool("a.flag", true));
  REQUIRE_FALSE(cfg.has("a.y"));
  REQUIRE(cfg.has("a.x"));
}

TEST_CASE("later keys win inside and across sections") {
  Config cfg = parse_config_text("[a]\nx = 1\nx = 2\n[b]\ny = 3\n[a]\nx = 4\n");
  REQUIRE(cfg.get_int("a.x", 0) == 4);
  REQUIRE(cfg.get_int("b.y", 0) == 3);
}

TEST_CASE("typed getters name the offending field") {
  Config cfg = parse_config_text("[a]\nx = soon\n");
  try {
    cfg.get_double("a.x", 0.0);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("a.x") != std::string::npos);
    REQUIRE(msg.find("soon") != std::string::npos);
  }
  REQUIRE_THROWS_AS(cfg.get_int("a.x", 0), ConfigError);
  REQUIRE_THROWS_AS(cfg.get_bool("a.x", false), ConfigError);
  REQUIRE_THROWS_AS(cfg.get_seed("a.x", 0), ConfigError);
}

TEST_CASE("boolean spellings are accepted in both polarities") {
  Config cfg = parse_config_text("[f]\na=true\nb=1\nc=yes\nd=on\ne=false\ng=0\nh=no\ni=off\n");
  for (const char* k : {"f.a", "f.b", "f.c", "f.d"}) REQUIRE(cfg.get_bool(k, false));
  for (const char* k : {"f.e", "f.g", "f.h", "f.i"}) REQUIRE_FALSE(cfg.get_bool(k, true));
}

TEST_CASE("malformed config lines carry their line number") {
  REQUIRE_THROWS_AS(parse_config_text("[a]\nno equals sign\n"), ParseError);
  REQUIRE_THROWS_AS(parse_config_text("[never closed\nx = 1\n"), ParseError);
  REQUIRE_THROWS_AS(parse_config_text("[a]\n= value\n"), ParseError);
  try {
    parse_config_text("[a]\nx = 1\nbroken line\n");
    FAIL("expected a ParseError");
  } catch (const ParseError& e) {
    REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("keys outside any section are rejected") {
  REQUIRE_THROWS_AS(parse_config_text("x = 1\n"), ParseError);
}

TEST_CASE("missing config file raises a config error") {
  REQUIRE_THROWS_AS(load_config("/nonexistent/rqae.conf"), ConfigError);
}

TEST_CASE("config file loads from disk") {
  auto dir = temp_dir("rqae_config_load");
  auto path = dir / "run.conf";
  {
    std::ofstream out(path);
    out << "[data]\nout_dir = here\n";
  }
  Config cfg = load_config(path.string());
  REQUIRE(cfg.get_string("data.out_dir", "") == "here");
  std::filesystem::remove_all(dir);
}

TEST_CASE("overrides replace file values and validate their shape") {
  Config cfg = parse_config_text("[a]\nx = 1\n");
  apply_override(cfg, "a.x=9");
  apply_override(cfg, "b.new=hello");
  REQUIRE(cfg.get_int("a.x", 0) == 9);
  REQUIRE(cfg.get_string("b.new", "") == "hello");
  REQUIRE_THROWS_AS(apply_override(cfg, "justakey"), ConfigError);
  REQUIRE_THROWS_AS(apply_override(cfg, "nodot=5"), ConfigError);
  REQUIRE_THROWS_AS(apply_override(cfg, "=5"), ConfigError);
}

TEST_CASE("signal csv round-trips channels, rate and exact sample values") {
  auto dir = temp_dir("rqae_io_signal");
  SignalTable table;
  table.sampling_rate_hz = 250.0;
  table.channels = {"i", "ii", "v1"};
  Rng rng(3);
  table.columns.resize(3);
  for (auto& col : table.columns)
    for (int t = 0; t < 17; ++t) col.push_back(rng.normal() * 4.0 - 1.0);

  auto path = (dir / "rec.csv").string();
  write_signal_csv(path, table);
  SignalTable back = read_signal_csv(path);
  REQUIRE(back.sampling_rate_hz == 250.0);
  REQUIRE(back.channels == table.channels);
  REQUIRE(back.columns.size() == 3);
  for (std::size_t c = 0; c < 3; ++c) {
    REQUIRE(back.columns[c].size() == 17);
    for (std::size_t t = 0; t < 17; ++t) REQUIRE(back.columns[c][t] == table.columns[c][t]);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("signal csv rejects ragged and non-numeric rows") {
  auto dir = temp_dir("rqae_io_bad_signal");
  auto ragged = dir / "ragged.csv";
  {
    std::ofstream out(ragged);
    out << "# rate_hz=250\ni,ii\n1,2\n3\n";
  }
  REQUIRE_THROWS_AS(read_signal_csv(ragged.string()), ParseError);

  auto alpha = dir / "alpha.csv";
  {
    std::ofstream out(alpha);
    out << "# rate_hz=250\ni,ii\n1,two\n";
  }
  REQUIRE_THROWS_AS(read_signal_csv(alpha.string()), ParseError);

  auto empty = dir / "empty.csv";
  { std::ofstream out(empty); }
  REQUIRE_THROWS_AS(read_signal_csv(empty.string()), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("distance matrix dump round-trips at f32 precision") {
  auto dir = temp_dir("rqae_io_dm");
  Mat dm(4, 4);
  for (long long i = 0; i < 4; ++i)
    for (long long j = 0; j < 4; ++j) dm(i, j) = static_cast<float>(0.25 * (i * 4 + j));
  auto path = (dir / "a.dm").string();
  write_dm_dump(path, dm);
  Mat back = read_dm_dump(path);
  REQUIRE(back.rows == 4);
  REQUIRE(back.cols == 4);
  for (std::size_t i = 0; i < back.v.size(); ++i) REQUIRE(back.v[i] == dm.v[i]);

  // Truncated payloads must not read as valid matrices.
  auto bytes = slurp(path);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 7));
  }
  REQUIRE_THROWS_AS(read_dm_dump(path), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("run manifest records hashes, merges updates and stays sorted") {
  auto dir = temp_dir("rqae_io_manifest");
  auto file_a = dir / "a.txt";
  auto file_b = dir / "sub" / "b.txt";
  std::filesystem::create_directories(file_b.parent_path());
  { std::ofstream(file_a) << "alpha"; }
  { std::ofstream(file_b) << "beta"; }

  auto manifest = (dir / "run_manifest.csv").string();
  update_run_manifest(manifest, {file_a.string(), file_b.string()}, dir.string());
  auto entries = read_run_manifest(manifest);
  REQUIRE(entries.size() == 2);
  REQUIRE(entries.at("a.txt") == hash_hex(hash_file(file_a.string())));
  REQUIRE(entries.at("sub/b.txt") == hash_hex(hash_file(file_b.string())));

  // Rewriting one file and updating only it keeps the other entry.
  { std::ofstream(file_a) << "alpha v2"; }
  update_run_manifest(manifest, {file_a.string()}, dir.string());
  auto merged = read_run_manifest(manifest);
  REQUIRE(merged.size() == 2);
  REQUIRE(merged.at("a.txt") == hash_hex(hash_file(file_a.string())));
  REQUIRE(merged.at("sub/b.txt") == entries.at("sub/b.txt"));

  // Keys come out sorted under the header row.
  auto text = slurp(manifest);
  REQUIRE(text.rfind("path,fnv1a64\na.txt,", 0) == 0);
  REQUIRE(text.find("sub/b.txt,") != std::string::npos);

  REQUIRE(read_run_manifest((dir / "absent.csv").string()).empty());
  std::filesystem::remove_all(dir);
}
