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

#ifndef GEODEX_KERNELS_H_
#define GEODEX_KERNELS_H_

#include <span>

// Data-parallel inner loops. Each OpenMP kernel has a plain serial
// counterpart with the same per-element floating-point operation order, so
// the two agree bit-for-bit; tests hold them to that.
namespace geodex::kernels {

// y[r, j] = b[j] + sum_k x[r, k] * w[k, j], accumulated with fused
// multiply-add in ascending k. `w` is (in x out) row-major, `x` is
// (rows x in) row-major. Every output row is computed independently of the
// others, so results do not depend on batch composition.
void DenseForward(const double* x, int rows, int in, const double* w,
                  const double* b, int out, double* y);
void DenseForwardSerial(const double* x, int rows, int in, const double* w,
                        const double* b, int out, double* y);

// c[r, j] += sum_k a[r, k] * b[k, j] with the same fused, ascending-k
// accumulation as DenseForward (starting from the existing c). All matrices
// row-major: a is (rows x inner), b is (inner x cols), c is (rows x cols).
void MatMulAccumulate(const double* a, int rows, int inner, const double* b, int cols,
                      double* c);
void MatMulAccumulateSerial(const double* a, int rows, int inner, const double* b,
                            int cols, double* c);

// out (cols x rows) = transpose of x (rows x cols).
void Transpose(const double* x, int rows, int cols, double* out);

// out[c] += sum_r x[r, c], rows in ascending order.
void ColumnSumsAccumulate(const double* x, int rows, int cols, double* out);

// For each of `items` blocks of `points` rows of width `width`, writes the
// column-wise maximum to out[item, :] and the row achieving it (lowest index
// on ties) to argmax[item, :].
void MaxPoolRows(const double* x, int items, int points, int width,
                 double* out, int* argmax);
void MaxPoolRowsSerial(const double* x, int items, int points, int width,
                       double* out, int* argmax);

}  // namespace geodex::kernels

#endif  // GEODEX_KERNELS_H_
