#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace actgan {

enum class MapKind { buildings, tx_onehot, pathloss, samples, other };

// H x W single-channel field map in normalized gray scale [0,1].
// One pixel corresponds to one meter.
struct GridMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // row-major
  MapKind kind = MapKind::other;
  std::optional<std::pair<int, int>> tx;  // (row, col)

  GridMap() = default;
  GridMap(int h, int w, MapKind k = MapKind::other)
      : width(w), height(h), values(static_cast<size_t>(h) * w, 0.0f), kind(k) {}

  float& at(int r, int c) { return values[static_cast<size_t>(r) * width + c]; }
  float at(int r, int c) const { return values[static_cast<size_t>(r) * width + c]; }
  int64_t pixels() const { return static_cast<int64_t>(width) * height; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
};

// Binary map files: magic "RMAP", u32 width, u32 height (little-endian), then
// width*height bytes row-major; values quantized to 8 bits. Standard 8-bit
// binary PGM (P5) is accepted for interoperability.
void write_rmap(const GridMap& map, const std::string& path);
GridMap read_rmap(const std::string& path);
void write_pgm(const GridMap& map, const std::string& path);
GridMap read_pgm(const std::string& path);

// Dispatch by extension (write) or magic bytes (read).
void write_map(const GridMap& map, const std::string& path);
GridMap read_map(const std::string& path);

uint8_t quantize_gray(float v);

// Dataset manifest: UTF-8 CSV with header
// region_id,tx_row,tx_col,buildings_path,gain_path. Paths are relative to the
// manifest location.
struct ManifestEntry {
  int region_id = 0;
  int tx_row = 0;
  int tx_col = 0;
  std::string buildings_path;
  std::string gain_path;
};

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> load_manifest(const std::string& path_or_dir);

}  // namespace actgan
