// Copyright 2026 The Geodex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "geodex/kernels.h"

#include <algorithm>
#include <cmath>
#include <vector>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace geodex::kernels {

namespace {

constexpr int kRowBlock = 8;
constexpr int kColBlock = 16;

// Accumulators start from `init` row r at init + r * init_stride, so a
// stride of 0 broadcasts a bias row and a stride of `out` accumulates into an
// existing matrix.
struct Init {
  const double* data;
  long stride;
  const double* Row(int r) const { return data + r * stride; }
};

#if defined(__AVX512F__)
// Full 8 x 16 tile held in sixteen zmm accumulators. Each lane performs the
// same fma sequence as the portable version below, so results are identical.
// `panel` holds the tile's 16 weight columns packed as (in x 16).
inline void DenseTile(const double* x, int in, const double* panel, Init init, int out,
                      double* y) {
  __m512d lo[kRowBlock], hi[kRowBlock];
#pragma GCC unroll 8
  for (int r = 0; r < kRowBlock; ++r) {
    lo[r] = _mm512_loadu_pd(init.Row(r));
    hi[r] = _mm512_loadu_pd(init.Row(r) + 8);
  }
  for (int k = 0; k < in; ++k) {
    const double* wk = panel + static_cast<long>(k) * kColBlock;
    const __m512d w_lo = _mm512_loadu_pd(wk);
    const __m512d w_hi = _mm512_loadu_pd(wk + 8);
#pragma GCC unroll 8
    for (int r = 0; r < kRowBlock; ++r) {
      const __m512d xv = _mm512_set1_pd(x[static_cast<long>(r) * in + k]);
      lo[r] = _mm512_fmadd_pd(xv, w_lo, lo[r]);
      hi[r] = _mm512_fmadd_pd(xv, w_hi, hi[r]);
    }
  }
#pragma GCC unroll 8
  for (int r = 0; r < kRowBlock; ++r) {
    _mm512_storeu_pd(y + static_cast<long>(r) * out, lo[r]);
    _mm512_storeu_pd(y + static_cast<long>(r) * out + 8, hi[r]);
  }
}
#else
// Portable 8 x 16 tile over a packed (in x 16) weight panel.
inline void DenseTile(const double* x, int in, const double* panel, Init init,
                      int out, double* y) {
  double acc[kRowBlock][kColBlock];
  for (int r = 0; r < kRowBlock; ++r) {
    for (int j = 0; j < kColBlock; ++j) acc[r][j] = init.Row(r)[j];
  }
  for (int k = 0; k < in; ++k) {
    const double* wk = panel + static_cast<long>(k) * kColBlock;
    for (int r = 0; r < kRowBlock; ++r) {
      const double xv = x[static_cast<long>(r) * in + k];
#pragma omp simd
      for (int j = 0; j < kColBlock; ++j) acc[r][j] = std::fma(xv, wk[j], acc[r][j]);
    }
  }
  for (int r = 0; r < kRowBlock; ++r) {
    for (int j = 0; j < kColBlock; ++j) y[static_cast<long>(r) * out + j] = acc[r][j];
  }
}
#endif

inline void DenseEdge(const double* x, int nr, int in, const double* w, Init init,
                      int out, int nj, double* y) {
  double acc[kRowBlock][kColBlock];
  for (int r = 0; r < nr; ++r) {
    for (int j = 0; j < nj; ++j) acc[r][j] = init.Row(r)[j];
  }
  for (int k = 0; k < in; ++k) {
    const double* wk = w + static_cast<long>(k) * out;
    for (int r = 0; r < nr; ++r) {
      const double xv = x[static_cast<long>(r) * in + k];
      for (int j = 0; j < nj; ++j) acc[r][j] = std::fma(xv, wk[j], acc[r][j]);
    }
  }
  for (int r = 0; r < nr; ++r) {
    for (int j = 0; j < nj; ++j) y[static_cast<long>(r) * out + j] = acc[r][j];
  }
}

// Copies the full 16-column tiles of w into contiguous (in x 16) panels, so
// the tile loop streams through memory instead of striding by `out`.
const double* PackPanels(const double* w, int in, int out) {
  thread_local std::vector<double> packed;
  const int tiles = out / kColBlock;
  packed.resize(static_cast<std::size_t>(tiles) * in * kColBlock);
  for (int t = 0; t < tiles; ++t) {
    double* panel = packed.data() + static_cast<std::size_t>(t) * in * kColBlock;
    for (int k = 0; k < in; ++k) {
      std::copy_n(w + static_cast<long>(k) * out + t * kColBlock, kColBlock,
                  panel + static_cast<long>(k) * kColBlock);
    }
  }
  return packed.data();
}

void DenseRowBlock(const double* x, int r0, int rows, int in, const double* w,
                   const double* panels, Init init, int out, double* y) {
  const int nr = std::min(kRowBlock, rows - r0);
  const double* xr = x + static_cast<long>(r0) * in;
  double* yr = y + static_cast<long>(r0) * out;
  const Init block_init{init.Row(r0), init.stride};
  for (int j0 = 0; j0 < out; j0 += kColBlock) {
    const int nj = std::min(kColBlock, out - j0);
    const Init tile_init{block_init.data + j0, init.stride};
    if (nr == kRowBlock && nj == kColBlock) {
      DenseTile(xr, in, panels + static_cast<long>(j0) * in, tile_init, out, yr + j0);
    } else {
      DenseEdge(xr, nr, in, w + j0, tile_init, out, nj, yr + j0);
    }
  }
}

void DenseParallel(const double* x, int rows, int in, const double* w, Init init,
                   int out, double* y) {
  const int blocks = (rows + kRowBlock - 1) / kRowBlock;
  const double* panels = rows >= kRowBlock ? PackPanels(w, in, out) : nullptr;
#pragma omp parallel for schedule(static) if (blocks > 8)
  for (int blk = 0; blk < blocks; ++blk) {
    DenseRowBlock(x, blk * kRowBlock, rows, in, w, panels, init, out, y);
  }
}

void DenseSerial(const double* x, int rows, int in, const double* w, Init init,
                 int out, double* y) {
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < out; ++j) {
      double acc = init.Row(r)[j];
      for (int k = 0; k < in; ++k) {
        acc = std::fma(x[static_cast<long>(r) * in + k], w[static_cast<long>(k) * out + j], acc);
      }
      y[static_cast<long>(r) * out + j] = acc;
    }
  }
}

void MaxPoolItem(const double* x, int points, int width, double* out, int* argmax) {
  for (int c = 0; c < width; ++c) {
    out[c] = x[c];
    argmax[c] = 0;
  }
  for (int p = 1; p < points; ++p) {
    const double* row = x + static_cast<long>(p) * width;
    for (int c = 0; c < width; ++c) {
      if (row[c] > out[c]) {
        out[c] = row[c];
        argmax[c] = p;
      }
    }
  }
}

}  // namespace

void DenseForward(const double* x, int rows, int in, const double* w,
                  const double* b, int out, double* y) {
  DenseParallel(x, rows, in, w, {b, 0}, out, y);
}

void DenseForwardSerial(const double* x, int rows, int in, const double* w,
                        const double* b, int out, double* y) {
  DenseSerial(x, rows, in, w, {b, 0}, out, y);
}

void MatMulAccumulate(const double* a, int rows, int inner, const double* b, int cols,
                      double* c) {
  DenseParallel(a, rows, inner, b, {c, cols}, cols, c);
}

void MatMulAccumulateSerial(const double* a, int rows, int inner, const double* b,
                            int cols, double* c) {
  DenseSerial(a, rows, inner, b, {c, cols}, cols, c);
}

void Transpose(const double* x, int rows, int cols, double* out) {
  constexpr int kTile = 32;
  for (int r0 = 0; r0 < rows; r0 += kTile) {
    for (int c0 = 0; c0 < cols; c0 += kTile) {
      const int r1 = std::min(rows, r0 + kTile), c1 = std::min(cols, c0 + kTile);
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
          out[static_cast<long>(c) * rows + r] = x[static_cast<long>(r) * cols + c];
        }
      }
    }
  }
}

void ColumnSumsAccumulate(const double* x, int rows, int cols, double* out) {
  for (int r = 0; r < rows; ++r) {
    const double* row = x + static_cast<long>(r) * cols;
    for (int c = 0; c < cols; ++c) out[c] += row[c];
  }
}

void MaxPoolRows(const double* x, int items, int points, int width,
                 double* out, int* argmax) {
#pragma omp parallel for schedule(static) if (items > 4)
  for (int i = 0; i < items; ++i) {
    MaxPoolItem(x + static_cast<long>(i) * points * width, points, width,
                out + static_cast<long>(i) * width, argmax + static_cast<long>(i) * width);
  }
}

void MaxPoolRowsSerial(const double* x, int items, int points, int width,
                       double* out, int* argmax) {
  for (int i = 0; i < items; ++i) {
    const double* item = x + static_cast<long>(i) * points * width;
    for (int c = 0; c < width; ++c) {
      double best = item[c];
      int best_row = 0;
      for (int p = 1; p < points; ++p) {
        const double v = item[static_cast<long>(p) * width + c];
        if (v > best) {
          best = v;
          best_row = p;
        }
      }
      out[static_cast<long>(i) * width + c] = best;
      argmax[static_cast<long>(i) * width + c] = best_row;
    }
  }
}

}  // namespace geodex::kernels
