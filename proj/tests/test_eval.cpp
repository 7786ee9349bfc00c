#include <algorithm>
#include <cmath>
#include <sstream>

#include "actgan/localize.hpp"
#include "actgan/metrics.hpp"
#include "actgan/report.hpp"
#include "actgan/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace actgan;

namespace {

GridMap from_values(int h, int w, std::vector<float> v) {
  GridMap m(h, w);
  m.values = std::move(v);
  return m;
}

GridMap random_map(int h, int w, Rng& rng) {
  GridMap m(h, w);
  for (auto& v : m.values) v = static_cast<float>(rng.uniform());
  return m;
}

}  // namespace

TEST_CASE("rmse variants at hand-computable points") {
  auto truth = from_values(2, 2, {0, 0, 0, 0});
  CHECK(rmse_paper(truth, truth) == 0.0);
  CHECK(rmse_global(truth, truth) == 0.0);

  // Row errors [[1,1],[0,0]]: per-row RMSE 1 and 0, mean 0.5.
  auto pred = from_values(2, 2, {1, 1, 0, 0});
  CHECK(rmse_paper(pred, truth) == doctest::Approx(0.5));
  CHECK(rmse_global(pred, truth) == doctest::Approx(std::sqrt(0.5)));

  // Constant error c gives c in both variants.
  auto a = from_values(3, 4, std::vector<float>(12, 0.75f));
  auto b = from_values(3, 4, std::vector<float>(12, 0.25f));
  CHECK(rmse_paper(a, b) == doctest::Approx(0.5));
  CHECK(rmse_global(a, b) == doctest::Approx(0.5));

  CHECK_THROWS_AS(rmse_paper(a, truth), InvalidArgument);
  CHECK_THROWS_AS(rmse_global(a, truth), InvalidArgument);
}

TEST_CASE("metrics match brute-force summation on random 4x4 maps") {
  Rng rng(55);
  for (int trial = 0; trial < 1000; ++trial) {
    auto pred = random_map(4, 4, rng);
    auto truth = random_map(4, 4, rng);
    CHECK(std::fabs(rmse_paper(pred, truth) -
                    oracle::brute_rmse_rows(pred.values, truth.values, 4, 4)) < 1e-12);
    CHECK(std::fabs(rmse_global(pred, truth) -
                    oracle::brute_rmse_pooled(pred.values, truth.values)) < 1e-12);
    auto nm = nmse(pred, truth);
    REQUIRE(!nm.constant_truth);
    CHECK(std::fabs(nm.value - oracle::brute_nmse(pred.values, truth.values)) < 1e-12);
  }
}

TEST_CASE("nmse of the mean predictor is exactly 1; constant truth is flagged") {
  Rng rng(56);
  auto truth = random_map(8, 8, rng);
  double mean = 0.0;
  for (float v : truth.values) mean += v;
  mean /= 64.0;
  auto pred = from_values(8, 8, std::vector<float>(64, static_cast<float>(mean)));
  // The mean is computed in double on the float-rounded predictor, so compare
  // against the same rounded constant.
  GridMap exact_pred = pred;
  auto nm = nmse(exact_pred, truth);
  // Numerator = sum (mean_f - t)^2, denominator = sum (t - mean)^2 with mean
  // in double; equal up to the float rounding of the constant.
  CHECK(nm.value == doctest::Approx(1.0).epsilon(1e-5));

  auto flat = from_values(4, 4, std::vector<float>(16, 0.3f));
  auto res = nmse(random_map(4, 4, rng), flat);
  CHECK(res.constant_truth);
}

TEST_CASE("nmse is exactly 1 when the predictor equals the truth mean bit-for-bit") {
  // Construct a truth whose mean is exactly representable.
  auto truth = from_values(2, 2, {0.25f, 0.75f, 0.25f, 0.75f});  // mean 0.5
  auto pred = from_values(2, 2, std::vector<float>(4, 0.5f));
  CHECK(nmse(pred, truth).value == 1.0);
}

TEST_CASE("nmse is invariant under affine co-scaling") {
  Rng rng(57);
  auto pred = random_map(6, 6, rng);
  auto truth = random_map(6, 6, rng);
  auto scale_map = [](const GridMap& m, float s) {
    GridMap out = m;
    for (auto& v : out.values) v *= s;
    return out;
  };
  const double base = nmse(pred, truth).value;
  const double scaled = nmse(scale_map(pred, 0.25f), scale_map(truth, 0.25f)).value;
  CHECK(base == doctest::Approx(scaled).epsilon(1e-6));
}

TEST_CASE("locate_source finds deltas, breaks ties lexicographically") {
  GridMap m(32, 32);
  m.at(10, 20) = 1.0f;
  CHECK(locate_source(m) == std::pair{10, 20});

  GridMap flat(16, 16);
  for (auto& v : flat.values) v = 0.5f;
  CHECK(locate_source(flat) == std::pair{0, 0});
}

TEST_CASE("locate_source prefers a bright plateau over an isolated hot pixel") {
  GridMap m(40, 40);
  m.at(5, 5) = 1.0f;  // isolated speck ("255" artifact)
  for (int r = 25; r < 30; ++r)
    for (int c = 25; c < 30; ++c) m.at(r, c) = 0.8f;
  m.at(27, 27) = 0.95f;  // plateau's own maximum
  CHECK(locate_source(m) == std::pair{27, 27});
}

TEST_CASE("locate_source is translation-covariant on interior content") {
  Rng rng(58);
  GridMap base(48, 48);
  for (int r = 20; r < 28; ++r)
    for (int c = 20; c < 28; ++c) base.at(r, c) = 0.5f + 0.05f * static_cast<float>(rng.uniform());
  base.at(23, 24) = 0.9f;
  auto p0 = locate_source(base);
  for (auto [dr, dc] : {std::pair{5, 3}, {-4, 7}, {9, -6}}) {
    GridMap shifted(48, 48);
    for (int r = 0; r < 48; ++r)
      for (int c = 0; c < 48; ++c) {
        const int sr = r - dr, sc = c - dc;
        if (sr >= 0 && sr < 48 && sc >= 0 && sc < 48) shifted.at(r, c) = base.at(sr, sc);
      }
    auto p = locate_source(shifted);
    CHECK(p.first == p0.first + dr);
    CHECK(p.second == p0.second + dc);
  }
}

TEST_CASE("localization error is the mean euclidean distance in meters") {
  CHECK(localization_error({{3, 4}}, {{0, 0}}) == doctest::Approx(5.0));
  CHECK(localization_error({{7, 9}, {2, 2}}, {{7, 9}, {2, 2}}) == 0.0);
  CHECK(localization_error({{0, 0}, {3, 4}}, {{0, 0}, {0, 0}}) == doctest::Approx(2.5));
  CHECK_THROWS_AS(localization_error({{0, 0}}, {}), InvalidArgument);
}

TEST_CASE("report aggregates equal recomputation from records") {
  EvalReport rep;
  rep.model_id = "test";
  Rng rng(59);
  for (int i = 0; i < 17; ++i) {
    EvalRecord r;
    r.region_id = i;
    r.scenario = 2;
    r.method = i % 2 ? "idw" : "actgan";
    r.setting = "fixed";
    r.rate = 0.1;
    r.rmse_paper = rng.uniform();
    r.rmse_global = rng.uniform();
    r.nmse = rng.uniform();
    r.nmse_valid = i != 4;
    r.has_loc = i % 3 == 0;
    r.loc_err_px = rng.uniform() * 10;
    rep.records.push_back(r);
  }
  rep.compute_aggregates();
  REQUIRE(rep.aggregates.size() == 2);
  for (const auto& a : rep.aggregates) {
    double acc = 0.0;
    int64_t n = 0, excl = 0;
    double nacc = 0.0;
    for (const auto& r : rep.records) {
      if (r.method != a.method) continue;
      acc += r.rmse_global;
      ++n;
      if (r.nmse_valid)
        nacc += r.nmse;
      else
        ++excl;
    }
    CHECK(a.count == n);
    CHECK(a.nmse_excluded == excl);
    CHECK(std::fabs(a.mean_rmse_global - acc / static_cast<double>(n)) < 1e-12);
    CHECK(std::fabs(a.mean_nmse - nacc / static_cast<double>(n - excl)) < 1e-12);
  }

  std::ostringstream s1, s2;
  rep.write_csv(s1);
  rep.write_csv(s2);
  const std::string csv = s1.str();
  CHECK(csv == s2.str());
  CHECK(csv.find("kind,region,tx,scenario,method,setting") != std::string::npos);
  const size_t lines = static_cast<size_t>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(lines == 2 + 17 + 2 * 2);  // header comment + header + records + 2 lines per aggregate
}
