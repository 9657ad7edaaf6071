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

#include "rydsq/krylov.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rydsq/least_squares.h"

namespace rydsq {

namespace {

double one_norm(const SparseHermitian &h) {
    double best = 0;
    for (Eigen::Index r = 0; r < h.outerSize(); r++) {
        double s = 0;
        for (SparseHermitian::InnerIterator it(h, r); it; ++it) {
            s += std::abs(it.value());
        }
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

ExpvStats expv_hermitian(const SparseHermitian &h, double t, Eigen::VectorXcd &v, double tol, int krylov_dim) {
    if (h.rows() != h.cols() || h.rows() != v.size()) {
        throw std::invalid_argument("expv: dimension mismatch");
    }
    if (t < 0) {
        throw std::invalid_argument("expv: negative time");
    }
    ExpvStats stats;
    double hnorm = one_norm(h);
    double beta0 = v.norm();
    if (t == 0 || hnorm == 0 || beta0 == 0) {
        return stats;
    }
    int n = (int)v.size();
    int m_max = std::max(2, std::min(krylov_dim, n));
    double remaining = t;
    double tau = std::min(t, 0.5 * m_max / hnorm);

    Eigen::MatrixXcd basis(n, m_max + 1);
    while (remaining > 0) {
        double beta = v.norm();
        basis.col(0) = v / beta;
        Eigen::VectorXd alpha_diag(m_max), beta_off(m_max);
        int m = m_max;
        double beta_last = 0;
        for (int j = 0; j < m_max; j++) {
            Eigen::VectorXcd w = h * basis.col(j);
            stats.matvecs++;
            // Full reorthogonalization keeps the small basis orthonormal.
            for (int pass = 0; pass < 2; pass++) {
                for (int k = 0; k <= j; k++) {
                    cplx c = basis.col(k).dot(w);
                    w -= c * basis.col(k);
                    if (pass == 0 && k == j) {
                        alpha_diag[j] = c.real();
                    } else if (k == j) {
                        alpha_diag[j] += c.real();
                    }
                }
            }
            double b = w.norm();
            beta_off[j] = b;
            if (b < 1e-13 * hnorm) {
                m = j + 1;
                beta_last = 0;
                break;
            }
            basis.col(j + 1) = w / b;
            beta_last = b;
        }
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < m; j++) {
            tri(j, j) = alpha_diag[j];
            if (j + 1 < m) {
                tri(j, j + 1) = tri(j + 1, j) = beta_off[j];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri);
        const auto &lam = eig.eigenvalues();
        const auto &q = eig.eigenvectors();

        while (true) {
            double step = std::min(tau, remaining);
            Eigen::VectorXcd phase(m);
            for (int k = 0; k < m; k++) {
                phase[k] = std::exp(cplx(0, -lam[k] * step)) * q(0, k);
            }
            Eigen::VectorXcd y = q.cast<cplx>() * phase;
            double err = beta * beta_last * std::abs(y[m - 1]);
            if (err <= tol * step / t * beta0) {
                v = beta * (basis.leftCols(m) * y);
                remaining -= step;
                stats.substeps++;
                if (err < 0.1 * tol * step / t * beta0) {
                    tau = step * 1.5;
                } else {
                    tau = step;
                }
                break;
            }
            tau = step * 0.5;
            if (tau < 1e-15 * t) {
                throw NumericalError("Krylov propagation failed to reach the requested accuracy");
            }
        }
    }
    return stats;
}

}  // namespace rydsq
