#include "actgan/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "actgan/util.hpp"

namespace actgan {

namespace {

struct SamplePoint {
  int r = 0, c = 0;
  double v = 0.0;
};

// Canonical (row, col) order makes every interpolator exactly invariant to
// the order samples arrive in.
std::vector<SamplePoint> collect(const GridMap& samples, const SampleMask& mask) {
  if (samples.width != mask.width || samples.height != mask.height)
    fail_invalid("baseline: samples and mask dimensions differ");
  std::vector<SamplePoint> pts;
  pts.reserve(mask.points.size());
  for (const auto& [r, c] : mask.points)
    pts.push_back({r, c, static_cast<double>(samples.at(r, c))});
  std::sort(pts.begin(), pts.end(), [](const SamplePoint& a, const SamplePoint& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const SamplePoint& a, const SamplePoint& b) {
                          return a.r == b.r && a.c == b.c;
                        }),
            pts.end());
  if (pts.empty()) fail_invalid("baseline: no samples to interpolate from");
  return pts;
}

double dist2(const SamplePoint& s, int r, int c) {
  const double dr = s.r - r, dc = s.c - c;
  return dr * dr + dc * dc;
}

// Bucket grid over sample positions for k-nearest queries. Ties at equal
// distance resolve by (row, col), so results do not depend on sample order.
class NeighborIndex {
 public:
  NeighborIndex(const std::vector<SamplePoint>& pts, int height, int width) : pts_(pts) {
    cell_ = std::max(1, static_cast<int>(std::sqrt(
                            static_cast<double>(height) * width / static_cast<double>(pts.size()))));
    rows_ = (height + cell_ - 1) / cell_;
    cols_ = (width + cell_ - 1) / cell_;
    buckets_.resize(static_cast<size_t>(rows_) * cols_);
    for (size_t i = 0; i < pts.size(); ++i)
      buckets_[bucket_of(pts[i].r, pts[i].c)].push_back(static_cast<int>(i));
  }

  std::vector<int> nearest(int r, int c, int k) const {
    k = std::min<int>(k, static_cast<int>(pts_.size()));
    const int br = std::min(r / cell_, rows_ - 1);
    const int bc = std::min(c / cell_, cols_ - 1);
    std::vector<int> cand;
    int ring = 0;
    const int max_ring = std::max(rows_, cols_);
    auto kth_dist = [&]() {
      std::vector<double> d;
      d.reserve(cand.size());
      for (int i : cand) d.push_back(dist2(pts_[static_cast<size_t>(i)], r, c));
      std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
      return d[static_cast<size_t>(k - 1)];
    };
    while (true) {
      add_ring(br, bc, ring, cand);
      const bool enough = static_cast<int>(cand.size()) >= k;
      // Everything outside ring R is at least (R*cell - cell + 1) away from
      // the query cell; stop once that bound exceeds the k-th distance.
      if (enough) {
        const double bound = static_cast<double>(ring) * cell_ - cell_ + 1;
        if (bound > 0 && bound * bound > kth_dist()) break;
      }
      ++ring;
      if (ring > max_ring) break;
    }
    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
      const double da = dist2(pts_[static_cast<size_t>(a)], r, c);
      const double db = dist2(pts_[static_cast<size_t>(b)], r, c);
      if (da != db) return da < db;
      const auto& pa = pts_[static_cast<size_t>(a)];
      const auto& pb = pts_[static_cast<size_t>(b)];
      return pa.r != pb.r ? pa.r < pb.r : pa.c < pb.c;
    });
    cand.resize(static_cast<size_t>(k));
    return cand;
  }

 private:
  size_t bucket_of(int r, int c) const {
    return static_cast<size_t>(std::min(r / cell_, rows_ - 1)) * cols_ +
           static_cast<size_t>(std::min(c / cell_, cols_ - 1));
  }

  void add_ring(int br, int bc, int ring, std::vector<int>& out) const {
    for (int i = br - ring; i <= br + ring; ++i) {
      if (i < 0 || i >= rows_) continue;
      for (int j = bc - ring; j <= bc + ring; ++j) {
        if (j < 0 || j >= cols_) continue;
        if (std::max(std::abs(i - br), std::abs(j - bc)) != ring) continue;
        const auto& b = buckets_[static_cast<size_t>(i) * cols_ + j];
        out.insert(out.end(), b.begin(), b.end());
      }
    }
  }

  const std::vector<SamplePoint>& pts_;
  int cell_ = 1, rows_ = 1, cols_ = 1;
  std::vector<std::vector<int>> buckets_;
};

BaselineResult make_result(const GridMap& samples) {
  BaselineResult res;
  res.map = GridMap(samples.height, samples.width, MapKind::pathloss);
  res.clamped.assign(static_cast<size_t>(samples.pixels()), 0);
  return res;
}

void clamp_pixel(BaselineResult& res, int r, int c, double v) {
  if (v < 0.0 || v > 1.0) {
    res.clamped[static_cast<size_t>(r) * res.map.width + c] = 1;
    v = std::clamp(v, 0.0, 1.0);
  }
  res.map.at(r, c) = static_cast<float>(v);
}

}  // namespace

std::vector<double> solve_linear_system(std::vector<double> a, std::vector<double> b) {
  const size_t n = b.size();
  if (a.size() != n * n) fail_invalid("solve_linear_system: non-square system");
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) fail_runtime("solve_linear_system: zero matrix");
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
    if (std::fabs(a[piv * n + col]) < 1e-13 * scale)
      fail_runtime("solve_linear_system: singular system (pivot " +
                   std::to_string(a[piv * n + col]) + " at column " + std::to_string(col) + ")");
    if (piv != col) {
      for (size_t j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
      std::swap(b[col], b[piv]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (size_t j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (size_t j = i + 1; j < n; ++j) acc -= a[i * n + j] * x[j];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

BaselineResult idw(const GridMap& samples, const SampleMask& mask, const IdwParams& p) {
  if (p.power <= 0) fail_invalid("idw: power must be positive");
  auto pts = collect(samples, mask);
  auto res = make_result(samples);
  parallel_for(samples.height, [&](int64_t lo, int64_t hi) {
    for (int r = static_cast<int>(lo); r < static_cast<int>(hi); ++r) {
      for (int c = 0; c < samples.width; ++c) {
        if (mask.covers(r, c)) {
          res.map.at(r, c) = samples.at(r, c);  // exact at sample pixels
          continue;
        }
        double num = 0.0, den = 0.0;
        for (const auto& s : pts) {
          const double w = std::pow(dist2(s, r, c), -0.5 * p.power);
          num += w * s.v;
          den += w;
        }
        clamp_pixel(res, r, c, num / den);
      }
    }
  });
  for (uint8_t f : res.clamped) res.clamped_pixels += f;
  return res;
}

namespace {

double rbf_kernel(RbfParams::Kernel k, double eps, double d) {
  const double t = eps * d;
  return k == RbfParams::Kernel::gaussian ? std::exp(-t * t) : std::sqrt(1.0 + t * t);
}

double median_distance_epsilon(const std::vector<SamplePoint>& pts) {
  // Median pairwise distance over a deterministic subsample.
  std::vector<const SamplePoint*> sub;
  const size_t stride = std::max<size_t>(1, pts.size() / 200);
  for (size_t i = 0; i < pts.size(); i += stride) sub.push_back(&pts[i]);
  std::vector<double> d;
  for (size_t i = 0; i < sub.size(); ++i)
    for (size_t j = i + 1; j < sub.size(); ++j)
      d.push_back(std::sqrt(dist2(*sub[i], sub[j]->r, sub[j]->c)));
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  const double med = d[d.size() / 2];
  return med > 0 ? 1.0 / med : 1.0;
}

std::vector<double> rbf_fit(const std::vector<SamplePoint>& pts, const RbfParams& p, double eps) {
  const size_t n = pts.size();
  std::vector<double> a(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      a[i * n + j] = rbf_kernel(p.kernel, eps, std::sqrt(dist2(pts[i], pts[j].r, pts[j].c))) +
                     (i == j ? p.ridge : 0.0);
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = pts[i].v;
  try {
    return solve_linear_system(std::move(a), std::move(v));
  } catch (const RuntimeFailure& e) {
    fail_runtime(std::string("rbf: kernel system is singular beyond ridge repair (") + e.what() +
                 ")");
  }
}

}  // namespace

BaselineResult rbf(const GridMap& samples, const SampleMask& mask, const RbfParams& p) {
  auto pts = collect(samples, mask);
  const double eps = p.epsilon > 0 ? p.epsilon : median_distance_epsilon(pts);
  auto res = make_result(samples);

  if (static_cast<int>(pts.size()) <= p.dense_limit) {
    auto alpha = rbf_fit(pts, p, eps);
    parallel_for(samples.height, [&](int64_t lo, int64_t hi) {
      for (int r = static_cast<int>(lo); r < static_cast<int>(hi); ++r)
        for (int c = 0; c < samples.width; ++c) {
          double acc = 0.0;
          for (size_t i = 0; i < pts.size(); ++i)
            acc += alpha[i] * rbf_kernel(p.kernel, eps, std::sqrt(dist2(pts[i], r, c)));
          clamp_pixel(res, r, c, acc);
        }
    });
  } else {
    NeighborIndex index(pts, samples.height, samples.width);
    parallel_for(samples.height, [&](int64_t lo, int64_t hi) {
      for (int r = static_cast<int>(lo); r < static_cast<int>(hi); ++r)
        for (int c = 0; c < samples.width; ++c) {
          auto nb = index.nearest(r, c, p.neighbors);
          std::vector<SamplePoint> local;
          local.reserve(nb.size());
          for (int i : nb) local.push_back(pts[static_cast<size_t>(i)]);
          auto alpha = rbf_fit(local, p, eps);
          double acc = 0.0;
          for (size_t i = 0; i < local.size(); ++i)
            acc += alpha[i] * rbf_kernel(p.kernel, eps, std::sqrt(dist2(local[i], r, c)));
          clamp_pixel(res, r, c, acc);
        }
    });
  }
  for (uint8_t f : res.clamped) res.clamped_pixels += f;
  return res;
}

double VariogramParams::operator()(double d) const {
  return nugget + (sill - nugget) * (1.0 - std::exp(-d / range));
}

void VariogramParams::validate() const {
  if (nugget < 0 || sill <= 0 || range <= 0 || sill < nugget)
    fail_invalid("variogram: need 0 <= nugget <= sill, sill > 0, range > 0");
}

VariogramParams fit_variogram(const std::vector<std::pair<int, int>>& points,
                              const std::vector<double>& values, int lags) {
  if (points.size() != values.size() || points.size() < 2)
    fail_invalid("fit_variogram: need >= 2 points with matching values");
  if (lags < 2) fail_invalid("fit_variogram: need >= 2 lags");

  // Empirical semivariogram over a bounded deterministic pair subsample.
  const size_t stride = std::max<size_t>(1, points.size() / 1500);
  std::vector<size_t> idx;
  for (size_t i = 0; i < points.size(); i += stride) idx.push_back(i);
  double max_d = 0.0;
  for (size_t a = 0; a < idx.size(); ++a)
    for (size_t b = a + 1; b < idx.size(); ++b) {
      const double dr = points[idx[a]].first - points[idx[b]].first;
      const double dc = points[idx[a]].second - points[idx[b]].second;
      max_d = std::max(max_d, std::hypot(dr, dc));
    }
  if (max_d <= 0) fail_invalid("fit_variogram: all points coincide");
  const double cutoff = max_d * 0.75;
  std::vector<double> gamma(static_cast<size_t>(lags), 0.0);
  std::vector<double> dist(static_cast<size_t>(lags), 0.0);
  std::vector<int64_t> count(static_cast<size_t>(lags), 0);
  for (size_t a = 0; a < idx.size(); ++a)
    for (size_t b = a + 1; b < idx.size(); ++b) {
      const double dr = points[idx[a]].first - points[idx[b]].first;
      const double dc = points[idx[a]].second - points[idx[b]].second;
      const double d = std::hypot(dr, dc);
      if (d > cutoff) continue;
      const int bin = std::min(lags - 1, static_cast<int>(d / cutoff * lags));
      const double dv = values[idx[a]] - values[idx[b]];
      gamma[static_cast<size_t>(bin)] += 0.5 * dv * dv;
      dist[static_cast<size_t>(bin)] += d;
      ++count[static_cast<size_t>(bin)];
    }

  std::vector<double> gh, dh, wh;
  for (int k = 0; k < lags; ++k) {
    if (count[static_cast<size_t>(k)] == 0) continue;
    gh.push_back(gamma[static_cast<size_t>(k)] / count[static_cast<size_t>(k)]);
    dh.push_back(dist[static_cast<size_t>(k)] / count[static_cast<size_t>(k)]);
    wh.push_back(static_cast<double>(count[static_cast<size_t>(k)]));
  }
  if (gh.size() < 2) fail_invalid("fit_variogram: not enough populated lags");

  // Exponential model is linear in (nugget, sill-nugget) given the range:
  // grid-search the range, weighted least squares for the rest.
  VariogramParams best;
  double best_sse = -1.0;
  for (int t = 0; t < 40; ++t) {
    const double range = cutoff * std::pow(10.0, -2.0 + 2.3 * t / 39.0);
    double s_ww = 0, s_wx = 0, s_wy = 0, s_wxx = 0, s_wxy = 0;
    for (size_t i = 0; i < gh.size(); ++i) {
      const double x = 1.0 - std::exp(-dh[i] / range);
      s_ww += wh[i];
      s_wx += wh[i] * x;
      s_wy += wh[i] * gh[i];
      s_wxx += wh[i] * x * x;
      s_wxy += wh[i] * x * gh[i];
    }
    const double det = s_ww * s_wxx - s_wx * s_wx;
    double nugget, partial;
    if (std::fabs(det) < 1e-30) {
      nugget = 0.0;
      partial = s_wxx > 0 ? s_wxy / s_wxx : 0.0;
    } else {
      nugget = (s_wy * s_wxx - s_wx * s_wxy) / det;
      partial = (s_ww * s_wxy - s_wx * s_wy) / det;
    }
    nugget = std::max(0.0, nugget);
    partial = std::max(1e-12, partial);
    VariogramParams vp{nugget, nugget + partial, range};
    double sse = 0.0;
    for (size_t i = 0; i < gh.size(); ++i) {
      const double e = vp(dh[i]) - gh[i];
      sse += wh[i] * e * e;
    }
    if (best_sse < 0 || sse < best_sse) {
      best_sse = sse;
      best = vp;
    }
  }
  return best;
}

namespace {

// Ordinary-kriging weights for one query against a fixed point set.
std::vector<double> kriging_weights(const std::vector<SamplePoint>& pts,
                                    const VariogramParams& vp, int qr, int qc, double ridge) {
  const size_t n = pts.size();
  std::vector<double> a((n + 1) * (n + 1), 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j)
      a[i * (n + 1) + j] =
          i == j ? ridge : vp(std::sqrt(dist2(pts[i], pts[j].r, pts[j].c)));
    a[i * (n + 1) + n] = 1.0;
    a[n * (n + 1) + i] = 1.0;
  }
  std::vector<double> b(n + 1);
  for (size_t i = 0; i < n; ++i) b[i] = vp(std::sqrt(dist2(pts[i], qr, qc)));
  b[n] = 1.0;
  return solve_linear_system(std::move(a), std::move(b));
}

double kriging_predict(const std::vector<SamplePoint>& pts, const VariogramParams& vp, int qr,
                       int qc) {
  std::vector<double> w;
  try {
    w = kriging_weights(pts, vp, qr, qc, 0.0);
  } catch (const RuntimeFailure&) {
    // Ridge-regularized retry before giving up.
    w = kriging_weights(pts, vp, qr, qc, 1e-10 * std::max(1.0, vp.sill));
  }
  double acc = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) acc += w[i] * pts[i].v;
  return acc;
}

}  // namespace

BaselineResult kriging(const GridMap& samples, const SampleMask& mask, const KrigingParams& p) {
  auto pts = collect(samples, mask);
  VariogramParams vp;
  if (p.variogram) {
    vp = *p.variogram;
    vp.validate();
  } else if (pts.size() >= 2) {
    std::vector<std::pair<int, int>> coords;
    std::vector<double> vals;
    for (const auto& s : pts) {
      coords.emplace_back(s.r, s.c);
      vals.push_back(s.v);
    }
    vp = fit_variogram(coords, vals, p.fit_lags);
  }
  auto res = make_result(samples);

  if (pts.size() == 1) {
    // Unbiasedness with a single sample: constant field.
    for (int r = 0; r < samples.height; ++r)
      for (int c = 0; c < samples.width; ++c) clamp_pixel(res, r, c, pts[0].v);
    for (uint8_t f : res.clamped) res.clamped_pixels += f;
    return res;
  }

  if (static_cast<int>(pts.size()) <= p.dense_limit) {
    parallel_for(samples.height, [&](int64_t lo, int64_t hi) {
      for (int r = static_cast<int>(lo); r < static_cast<int>(hi); ++r)
        for (int c = 0; c < samples.width; ++c)
          clamp_pixel(res, r, c, kriging_predict(pts, vp, r, c));
    });
  } else {
    NeighborIndex index(pts, samples.height, samples.width);
    parallel_for(samples.height, [&](int64_t lo, int64_t hi) {
      for (int r = static_cast<int>(lo); r < static_cast<int>(hi); ++r)
        for (int c = 0; c < samples.width; ++c) {
          auto nb = index.nearest(r, c, p.neighbors);
          std::vector<SamplePoint> local;
          local.reserve(nb.size());
          for (int i : nb) local.push_back(pts[static_cast<size_t>(i)]);
          clamp_pixel(res, r, c, kriging_predict(local, vp, r, c));
        }
    });
  }
  for (uint8_t f : res.clamped) res.clamped_pixels += f;
  return res;
}

}  // namespace actgan
