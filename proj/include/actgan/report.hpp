#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace actgan {

// One evaluated (map, method, campaign cell) combination.
struct EvalRecord {
  int region_id = 0;
  int tx_index = 0;
  int scenario = 1;
  std::string method;   // actgan | idw | rbf | kriging | zeros
  std::string setting;  // a | b | c | fixed | blocks | none
  double threshold = 0.0;
  double rate = 0.0;
  int omega = 0;
  double sigma = 0.0;
  double rmse_paper = 0.0;
  double rmse_global = 0.0;
  double nmse = 0.0;
  bool nmse_valid = true;
  double loc_err_px = 0.0;
  bool has_loc = false;
  int64_t clamped_px = 0;
};

// Aggregate over every record sharing a campaign cell and method.
struct EvalAggregate {
  int scenario = 1;
  std::string method;
  std::string setting;
  double threshold = 0.0;
  double rate = 0.0;
  int omega = 0;
  double sigma = 0.0;
  int64_t count = 0;
  double mean_rmse_paper = 0.0, median_rmse_paper = 0.0;
  double mean_rmse_global = 0.0, median_rmse_global = 0.0;
  double mean_nmse = 0.0, median_nmse = 0.0;
  int64_t nmse_excluded = 0;
  double mean_loc_err = 0.0;
  int64_t loc_count = 0;
};

struct EvalReport {
  std::string model_id;  // checkpoint path or "none"
  uint64_t seed = 0;
  uint64_t config_digest = 0;
  std::vector<EvalRecord> records;
  std::vector<EvalAggregate> aggregates;

  // Rebuilds `aggregates` from `records`, grouped by campaign cell + method.
  void compute_aggregates();

  // Fixed-column CSV: one row per record, then an aggregates footer block.
  void write_csv(std::ostream& os) const;
  void save_csv(const std::string& path) const;
};

}  // namespace actgan
