#pragma once

#include <utility>

#include "actgan/gridmap.hpp"

namespace actgan {

// Synthetic propagation model: log-distance path loss plus a fixed per-wall
// penalty for every building pixel crossed on the transmitter-pixel segment.
// Maps are normalized to gray via (pl_max_db - PL_db) / (pl_max_db - pl_min_db).
struct SimParams {
  double tx_power_db = 23.0;        // P_Tx at the emission source
  double pathloss_exponent = 3.0;   // n
  double reference_loss_db = 40.0;  // loss at 1 m
  double per_wall_db = 10.0;
  double pl_min_db = 40.0;
  double pl_max_db = 120.0;
  double noise_bandwidth_hz = 1e6;  // W
  double noise_psd_w_per_hz = 4e-21;  // N0
  double noise_figure_db = 7.0;     // NF

  void validate() const;
};

// Building pixels strictly between the two endpoints along the Bresenham
// segment.
int count_wall_crossings(const GridMap& buildings, int r0, int c0, int r1, int c1);

GridMap simulate_map(const GridMap& buildings, std::pair<int, int> tx, const SimParams& p);

// Background noise level in dB: 10*log10(W*N0) + NF.
double noise_floor_db(double bandwidth_hz, double noise_psd, double noise_figure_db);

// Path-loss threshold: PL_thr = -(P_Tx)_dB + SNR_thr + delta_dB.
double pathloss_threshold_db(double p_tx_db, double snr_thr_db, double delta_db);

// dB threshold mapped into the simulator's normalized gray space.
double normalized_threshold(double pl_thr_db, const SimParams& p);

// Truncate-and-rescale: values below thr go to 0, the rest map to
// (v - thr)/(1 - thr). thr must lie in [0,1).
GridMap apply_threshold(const GridMap& map, double thr);

}  // namespace actgan
