// Copyright 2026 The rydsq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RYDSQ_KRYLOV_H
#define RYDSQ_KRYLOV_H

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rydsq {

using cplx = std::complex<double>;
using SparseHermitian = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct ExpvStats {
    int substeps = 0;
    int matvecs = 0;
};

/// v <- exp(-i t H) v for Hermitian H using Lanczos with adaptive substeps.
/// `tol` bounds the local error estimate per unit time.
ExpvStats expv_hermitian(
    const SparseHermitian &h, double t, Eigen::VectorXcd &v, double tol = 1e-12, int krylov_dim = 30);

}  // namespace rydsq

#endif
