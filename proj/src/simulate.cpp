#include "actgan/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "actgan/util.hpp"

namespace actgan {

void SimParams::validate() const {
  if (pl_min_db >= pl_max_db) fail_invalid("sim params: pl_min_db must be < pl_max_db");
  if (pathloss_exponent <= 0) fail_invalid("sim params: pathloss exponent must be > 0");
  if (per_wall_db < 0) fail_invalid("sim params: per-wall attenuation must be >= 0");
}

int count_wall_crossings(const GridMap& buildings, int r0, int c0, int r1, int c1) {
  int walls = 0;
  int dr = std::abs(r1 - r0), dc = std::abs(c1 - c0);
  const int sr = r0 < r1 ? 1 : -1;
  const int sc = c0 < c1 ? 1 : -1;
  int err = (dc > dr ? dc : -dr) / 2;
  int r = r0, c = c0;
  while (!(r == r1 && c == c1)) {
    const int e = err;
    if (e > -dc) {
      err -= dr;
      c += sc;
    }
    if (e < dr) {
      err += dc;
      r += sr;
    }
    if (r == r1 && c == c1) break;  // endpoints excluded
    if (buildings.at(r, c) > 0.5f) ++walls;
  }
  return walls;
}

GridMap simulate_map(const GridMap& buildings, std::pair<int, int> tx, const SimParams& p) {
  p.validate();
  const auto [tr, tc] = tx;
  if (!buildings.in_bounds(tr, tc)) fail_invalid("simulate_map: transmitter outside the map");
  if (buildings.at(tr, tc) > 0.5f) fail_invalid("simulate_map: transmitter inside a building");
  GridMap out(buildings.height, buildings.width, MapKind::pathloss);
  out.tx = tx;
  const double inv_range = 1.0 / (p.pl_max_db - p.pl_min_db);
  parallel_for(buildings.height, [&](int64_t lo, int64_t hi) {
    for (int r = static_cast<int>(lo); r < static_cast<int>(hi); ++r) {
      for (int c = 0; c < buildings.width; ++c) {
        if (buildings.at(r, c) > 0.5f) {
          out.at(r, c) = 0.0f;
          continue;
        }
        const double d = std::hypot(static_cast<double>(r - tr), static_cast<double>(c - tc));
        const int walls = count_wall_crossings(buildings, tr, tc, r, c);
        const double pl = p.reference_loss_db +
                          10.0 * p.pathloss_exponent * std::log10(std::max(d, 1.0)) +
                          walls * p.per_wall_db;
        const double gray = (p.pl_max_db - pl) * inv_range;
        out.at(r, c) = static_cast<float>(std::clamp(gray, 0.0, 1.0));
      }
    }
  });
  return out;
}

double noise_floor_db(double bandwidth_hz, double noise_psd, double noise_figure_db) {
  if (bandwidth_hz <= 0 || noise_psd <= 0)
    fail_invalid("noise_floor_db: bandwidth and noise PSD must be positive");
  return 10.0 * std::log10(bandwidth_hz * noise_psd) + noise_figure_db;
}

double pathloss_threshold_db(double p_tx_db, double snr_thr_db, double delta_db) {
  return -p_tx_db + snr_thr_db + delta_db;
}

double normalized_threshold(double pl_thr_db, const SimParams& p) {
  p.validate();
  return std::clamp((p.pl_max_db - pl_thr_db) / (p.pl_max_db - p.pl_min_db), 0.0, 1.0);
}

GridMap apply_threshold(const GridMap& map, double thr) {
  if (thr < 0.0 || thr >= 1.0) fail_invalid("apply_threshold: threshold must lie in [0,1)");
  GridMap out = map;
  const float t = static_cast<float>(thr);
  const float rescale = 1.0f / (1.0f - t);
  for (auto& v : out.values) v = v < t ? 0.0f : (v - t) * rescale;
  for (auto& v : out.values) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

}  // namespace actgan
