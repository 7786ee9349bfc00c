#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "actgan/tensor.hpp"
#include "actgan/util.hpp"

#ifdef ACTGAN_USE_OPENBLAS
#include <cblas.h>
extern "C" void openblas_set_num_threads(int);
#endif

namespace actgan::detail {

#ifdef ACTGAN_USE_OPENBLAS
// BLAS is pinned to one thread; parallelism lives at the batch level where
// the work split cannot change summation order.
inline void ensure_blas_single_thread() {
  static const bool once = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)once;
}

inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
                 int lda, const float* b, int ldb, float beta, float* c, int ldc) {
  ensure_blas_single_thread();
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha, const double* a,
                 int lda, const double* b, int ldb, double beta, double* c, int ldc) {
  ensure_blas_single_thread();
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
#else
template <typename T>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a, int lda,
          const T* b, int ldb, T beta, T* c, int ldc) {
  std::vector<T> at, bt;
  if (trans_a) {
    at.resize(static_cast<size_t>(m) * k);
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p) at[static_cast<size_t>(i) * k + p] = a[static_cast<size_t>(p) * lda + i];
    a = at.data();
    lda = k;
  }
  if (trans_b) {
    bt.resize(static_cast<size_t>(k) * n);
    for (int p = 0; p < k; ++p)
      for (int j = 0; j < n; ++j) bt[static_cast<size_t>(p) * n + j] = b[static_cast<size_t>(j) * ldb + p];
    b = bt.data();
    ldb = n;
  }
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<size_t>(i) * ldc;
    if (beta == T(0))
      std::fill(crow, crow + n, T(0));
    else if (beta != T(1))
      for (int j = 0; j < n; ++j) crow[j] *= beta;
    for (int p = 0; p < k; ++p) {
      const T av = alpha * a[static_cast<size_t>(i) * lda + p];
      const T* brow = b + static_cast<size_t>(p) * ldb;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}
#endif

// Geometry of a direct convolution. Transposed convolution reuses the same
// dims with input/output roles swapped.
struct Conv2dDims {
  int batch = 0;
  int in_ch = 0, in_h = 0, in_w = 0;
  int out_ch = 0;
  int kh = 0, kw = 0;
  int stride = 1, dilation = 1, padding = 0;
  int out_h = 0, out_w = 0;

  int64_t col_rows() const { return static_cast<int64_t>(in_ch) * kh * kw; }
  int64_t out_spatial() const { return static_cast<int64_t>(out_h) * out_w; }
  int64_t in_spatial() const { return static_cast<int64_t>(in_h) * in_w; }
};

template <typename T>
void im2col(const T* x, const Conv2dDims& d, T* cols) {
  const int64_t os = d.out_spatial();
  for (int c = 0; c < d.in_ch; ++c) {
    const T* xc = x + static_cast<int64_t>(c) * d.in_spatial();
    for (int u = 0; u < d.kh; ++u) {
      for (int v = 0; v < d.kw; ++v) {
        T* row = cols + (static_cast<int64_t>(c * d.kh + u) * d.kw + v) * os;
        for (int i = 0; i < d.out_h; ++i) {
          const int ih = i * d.stride + u * d.dilation - d.padding;
          T* out = row + static_cast<int64_t>(i) * d.out_w;
          if (ih < 0 || ih >= d.in_h) {
            std::fill(out, out + d.out_w, T(0));
            continue;
          }
          const T* xrow = xc + static_cast<int64_t>(ih) * d.in_w;
          for (int j = 0; j < d.out_w; ++j) {
            const int iw = j * d.stride + v * d.dilation - d.padding;
            out[j] = (iw >= 0 && iw < d.in_w) ? xrow[iw] : T(0);
          }
        }
      }
    }
  }
}

// Scatter-add inverse of im2col. `x` must be zeroed by the caller.
template <typename T>
void col2im(const T* cols, const Conv2dDims& d, T* x) {
  const int64_t os = d.out_spatial();
  for (int c = 0; c < d.in_ch; ++c) {
    T* xc = x + static_cast<int64_t>(c) * d.in_spatial();
    for (int u = 0; u < d.kh; ++u) {
      for (int v = 0; v < d.kw; ++v) {
        const T* row = cols + (static_cast<int64_t>(c * d.kh + u) * d.kw + v) * os;
        for (int i = 0; i < d.out_h; ++i) {
          const int ih = i * d.stride + u * d.dilation - d.padding;
          if (ih < 0 || ih >= d.in_h) continue;
          T* xrow = xc + static_cast<int64_t>(ih) * d.in_w;
          const T* in = row + static_cast<int64_t>(i) * d.out_w;
          for (int j = 0; j < d.out_w; ++j) {
            const int iw = j * d.stride + v * d.dilation - d.padding;
            if (iw >= 0 && iw < d.in_w) xrow[iw] += in[j];
          }
        }
      }
    }
  }
}

// y[b,o,:] = kernel[o,:] * im2col(x[b]) + bias[o]
template <typename T>
void conv_forward_core(const T* x, const T* kernel, const T* bias, const Conv2dDims& d, T* y) {
  const int64_t kcols = d.col_rows();
  const int64_t os = d.out_spatial();
  const int64_t in_sz = static_cast<int64_t>(d.in_ch) * d.in_spatial();
  const int64_t out_sz = static_cast<int64_t>(d.out_ch) * os;
  parallel_for(d.batch, [&](int64_t lo, int64_t hi) {
    std::vector<T> cols(static_cast<size_t>(kcols * os));
    for (int64_t b = lo; b < hi; ++b) {
      im2col(x + b * in_sz, d, cols.data());
      T* yb = y + b * out_sz;
      gemm(false, false, d.out_ch, static_cast<int>(os), static_cast<int>(kcols), T(1), kernel,
           static_cast<int>(kcols), cols.data(), static_cast<int>(os), T(0), yb,
           static_cast<int>(os));
      if (bias) {
        for (int o = 0; o < d.out_ch; ++o) {
          T* row = yb + static_cast<int64_t>(o) * os;
          const T bv = bias[o];
          for (int64_t t = 0; t < os; ++t) row[t] += bv;
        }
      }
    }
  });
}

// dx[b] = col2im(kernel^T * dy[b]); dx is written, not accumulated.
template <typename T>
void conv_backward_input_core(const T* dy, const T* kernel, const Conv2dDims& d, T* dx) {
  const int64_t kcols = d.col_rows();
  const int64_t os = d.out_spatial();
  const int64_t in_sz = static_cast<int64_t>(d.in_ch) * d.in_spatial();
  const int64_t out_sz = static_cast<int64_t>(d.out_ch) * os;
  parallel_for(d.batch, [&](int64_t lo, int64_t hi) {
    std::vector<T> cols(static_cast<size_t>(kcols * os));
    for (int64_t b = lo; b < hi; ++b) {
      gemm(true, false, static_cast<int>(kcols), static_cast<int>(os), d.out_ch, T(1), kernel,
           static_cast<int>(kcols), dy + b * out_sz, static_cast<int>(os), T(0), cols.data(),
           static_cast<int>(os));
      T* xb = dx + b * in_sz;
      std::fill(xb, xb + in_sz, T(0));
      col2im(cols.data(), d, xb);
    }
  });
}

// dk = sum_b dy[b] * im2col(x[b])^T, accumulated in batch order.
template <typename T>
void conv_backward_kernel_core(const T* dy, const T* x, const Conv2dDims& d, T* dk) {
  const int64_t kcols = d.col_rows();
  const int64_t os = d.out_spatial();
  const int64_t in_sz = static_cast<int64_t>(d.in_ch) * d.in_spatial();
  const int64_t out_sz = static_cast<int64_t>(d.out_ch) * os;
  const int64_t ksz = static_cast<int64_t>(d.out_ch) * kcols;
  std::vector<std::vector<T>> partial(static_cast<size_t>(d.batch));
  parallel_for(d.batch, [&](int64_t lo, int64_t hi) {
    std::vector<T> cols(static_cast<size_t>(kcols * os));
    for (int64_t b = lo; b < hi; ++b) {
      im2col(x + b * in_sz, d, cols.data());
      auto& pk = partial[static_cast<size_t>(b)];
      pk.assign(static_cast<size_t>(ksz), T(0));
      gemm(false, true, d.out_ch, static_cast<int>(kcols), static_cast<int>(os), T(1),
           dy + b * out_sz, static_cast<int>(os), cols.data(), static_cast<int>(os), T(0),
           pk.data(), static_cast<int>(kcols));
    }
  });
  std::fill(dk, dk + ksz, T(0));
  for (const auto& pk : partial)
    for (int64_t i = 0; i < ksz; ++i) dk[i] += pk[static_cast<size_t>(i)];
}

template <typename T>
void sum_per_channel(const T* dy, int batch, int ch, int64_t spatial, T* db) {
  std::fill(db, db + ch, T(0));
  for (int b = 0; b < batch; ++b) {
    for (int o = 0; o < ch; ++o) {
      const T* row = dy + (static_cast<int64_t>(b) * ch + o) * spatial;
      T acc = T(0);
      for (int64_t t = 0; t < spatial; ++t) acc += row[t];
      db[o] += acc;
    }
  }
}

}  // namespace actgan::detail
