#include "actgan/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

#include "actgan/util.hpp"

namespace actgan {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void EvalReport::compute_aggregates() {
  using Key = std::tuple<int, std::string, std::string, double, double, int, double>;
  std::map<Key, std::vector<const EvalRecord*>> groups;
  for (const auto& r : records)
    groups[{r.scenario, r.method, r.setting, r.threshold, r.rate, r.omega, r.sigma}].push_back(&r);

  aggregates.clear();
  for (const auto& [key, recs] : groups) {
    EvalAggregate a;
    std::tie(a.scenario, a.method, a.setting, a.threshold, a.rate, a.omega, a.sigma) = key;
    a.count = static_cast<int64_t>(recs.size());
    std::vector<double> rp, rg, nm, le;
    for (const auto* r : recs) {
      rp.push_back(r->rmse_paper);
      rg.push_back(r->rmse_global);
      if (r->nmse_valid)
        nm.push_back(r->nmse);
      else
        ++a.nmse_excluded;
      if (r->has_loc) le.push_back(r->loc_err_px);
    }
    auto mean = [](const std::vector<double>& v) {
      if (v.empty()) return 0.0;
      double acc = 0.0;
      for (double x : v) acc += x;
      return acc / static_cast<double>(v.size());
    };
    a.mean_rmse_paper = mean(rp);
    a.median_rmse_paper = median(rp);
    a.mean_rmse_global = mean(rg);
    a.median_rmse_global = median(rg);
    a.mean_nmse = mean(nm);
    a.median_nmse = median(nm);
    a.mean_loc_err = mean(le);
    a.loc_count = static_cast<int64_t>(le.size());
    aggregates.push_back(std::move(a));
  }
}

void EvalReport::write_csv(std::ostream& os) const {
  os << "# model=" << (model_id.empty() ? "none" : model_id) << " seed=" << seed
     << " config_digest=" << config_digest << "\n";
  os << "kind,region,tx,scenario,method,setting,threshold,rate,omega,sigma,"
        "rmse_paper,rmse_global,nmse,loc_err_px,clamped_px,count,nmse_excluded,loc_count\n";
  for (const auto& r : records) {
    os << "record," << r.region_id << "," << r.tx_index << "," << r.scenario << "," << r.method
       << "," << r.setting << "," << fmt(r.threshold) << "," << fmt(r.rate) << "," << r.omega
       << "," << fmt(r.sigma) << "," << fmt(r.rmse_paper) << "," << fmt(r.rmse_global) << ",";
    if (r.nmse_valid) os << fmt(r.nmse);
    os << ",";
    if (r.has_loc) os << fmt(r.loc_err_px);
    os << "," << r.clamped_px << ",,,\n";
  }
  for (const auto& a : aggregates) {
    os << "aggregate,,," << a.scenario << "," << a.method << "," << a.setting << ","
       << fmt(a.threshold) << "," << fmt(a.rate) << "," << a.omega << "," << fmt(a.sigma) << ","
       << fmt(a.mean_rmse_paper) << "," << fmt(a.mean_rmse_global) << "," << fmt(a.mean_nmse)
       << "," << fmt(a.mean_loc_err) << ",," << a.count << "," << a.nmse_excluded << ","
       << a.loc_count << "\n";
    os << "aggregate_median,,," << a.scenario << "," << a.method << "," << a.setting << ","
       << fmt(a.threshold) << "," << fmt(a.rate) << "," << a.omega << "," << fmt(a.sigma) << ","
       << fmt(a.median_rmse_paper) << "," << fmt(a.median_rmse_global) << ","
       << fmt(a.median_nmse) << ",,," << a.count << "," << a.nmse_excluded << "," << a.loc_count
       << "\n";
  }
}

void EvalReport::save_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail_runtime("report: cannot open for writing: " + path);
  write_csv(f);
  if (!f) fail_runtime("report: write failed: " + path);
}

}  // namespace actgan
