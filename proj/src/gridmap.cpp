#include "actgan/gridmap.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "actgan/util.hpp"

namespace actgan {

namespace {

void put_u32(std::ofstream& f, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  f.write(b, 4);
}

uint32_t get_u32(std::ifstream& f, const std::string& path) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) fail_invalid("map file: truncated header in " + path);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

std::vector<uint8_t> quantize(const GridMap& map) {
  std::vector<uint8_t> bytes(static_cast<size_t>(map.pixels()));
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize_gray(map.values[i]);
  return bytes;
}

GridMap from_bytes(int h, int w, const std::vector<uint8_t>& bytes) {
  GridMap m(h, w);
  for (size_t i = 0; i < bytes.size(); ++i) m.values[i] = static_cast<float>(bytes[i]) / 255.0f;
  return m;
}

}  // namespace

uint8_t quantize_gray(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(c * 255.0f));
}

void write_rmap(const GridMap& map, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail_runtime("map file: cannot open for writing: " + path);
  f.write("RMAP", 4);
  put_u32(f, static_cast<uint32_t>(map.width));
  put_u32(f, static_cast<uint32_t>(map.height));
  auto bytes = quantize(map);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail_runtime("map file: write failed: " + path);
}

GridMap read_rmap(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_runtime("map file: cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "RMAP") fail_invalid("map file: bad magic in " + path);
  const uint32_t w = get_u32(f, path);
  const uint32_t h = get_u32(f, path);
  if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16)
    fail_invalid("map file: unreasonable dimensions in " + path);
  std::vector<uint8_t> bytes(static_cast<size_t>(w) * h);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (f.gcount() != static_cast<std::streamsize>(bytes.size()))
    fail_invalid("map file: truncated payload in " + path);
  return from_bytes(static_cast<int>(h), static_cast<int>(w), bytes);
}

void write_pgm(const GridMap& map, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail_runtime("map file: cannot open for writing: " + path);
  f << "P5\n" << map.width << " " << map.height << "\n255\n";
  auto bytes = quantize(map);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail_runtime("map file: write failed: " + path);
}

GridMap read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_runtime("map file: cannot open: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") fail_invalid("map file: expected binary PGM (P5) in " + path);
  auto next_token = [&]() {
    std::string tok;
    while (f >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(f, rest);
        continue;
      }
      return tok;
    }
    fail_invalid("map file: truncated PGM header in " + path);
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0) fail_invalid("map file: bad PGM dimensions in " + path);
  if (maxval != 255) fail_invalid("map file: only 8-bit PGM supported: " + path);
  f.get();  // single whitespace after maxval
  std::vector<uint8_t> bytes(static_cast<size_t>(w) * h);
  f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (f.gcount() != static_cast<std::streamsize>(bytes.size()))
    fail_invalid("map file: truncated PGM payload in " + path);
  return from_bytes(h, w, bytes);
}

void write_map(const GridMap& map, const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm")
    write_pgm(map, path);
  else
    write_rmap(map, path);
}

GridMap read_map(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_runtime("map file: cannot open: " + path);
  char magic[2] = {0, 0};
  f.read(magic, 2);
  f.close();
  if (magic[0] == 'P' && magic[1] == '5') return read_pgm(path);
  return read_rmap(path);
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail_runtime("manifest: cannot open for writing: " + path);
  f << "region_id,tx_row,tx_col,buildings_path,gain_path\n";
  for (const auto& e : entries)
    f << e.region_id << "," << e.tx_row << "," << e.tx_col << "," << e.buildings_path << ","
      << e.gain_path << "\n";
  if (!f) fail_runtime("manifest: write failed: " + path);
}

std::vector<ManifestEntry> load_manifest(const std::string& path_or_dir) {
  namespace fs = std::filesystem;
  fs::path p(path_or_dir);
  if (fs::is_directory(p)) p /= "manifest.csv";
  std::ifstream f(p);
  if (!f) fail_runtime("manifest: cannot open: " + p.string());
  std::string line;
  if (!std::getline(f, line)) fail_invalid("manifest: empty file: " + p.string());
  if (line != "region_id,tx_row,tx_col,buildings_path,gain_path")
    fail_invalid("manifest: unexpected header: " + line);
  std::vector<ManifestEntry> out;
  const std::string base = p.parent_path().string();
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5)
      fail_invalid("manifest: line " + std::to_string(line_no) + " has " +
                   std::to_string(fields.size()) + " fields, expected 5");
    ManifestEntry e;
    e.region_id = std::stoi(fields[0]);
    e.tx_row = std::stoi(fields[1]);
    e.tx_col = std::stoi(fields[2]);
    e.buildings_path = base.empty() ? fields[3] : base + "/" + fields[3];
    e.gain_path = base.empty() ? fields[4] : base + "/" + fields[4];
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace actgan
