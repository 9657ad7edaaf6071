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

#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "gtest/gtest.h"
#include "rydsq/least_squares.h"

using namespace rydsq;

namespace {

SparseHermitian random_hermitian(int n, double density, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-1, 1), pick(0, 1);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int i = 0; i < n; i++) {
        t.emplace_back(i, i, 5 * u(rng));
        for (int j = i + 1; j < n; j++) {
            if (pick(rng) < density) {
                cplx v(u(rng), u(rng));
                t.emplace_back(i, j, v);
                t.emplace_back(j, i, std::conj(v));
            }
        }
    }
    SparseHermitian h(n, n);
    h.setFromTriplets(t.begin(), t.end());
    return h;
}

Eigen::VectorXcd dense_reference(const SparseHermitian &h, double t, const Eigen::VectorXcd &v) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd(h) * cplx(0, -t);
    return a.exp() * v;
}

}  // namespace

TEST(krylov, matches_dense_exponential) {
    std::mt19937_64 rng(1);
    for (int n : {5, 40, 150}) {
        auto h = random_hermitian(n, 0.1, rng);
        Eigen::VectorXcd v = Eigen::VectorXcd::Random(n);
        v.normalize();
        for (double t : {0.01, 1.0, 7.5}) {
            Eigen::VectorXcd w = v;
            expv_hermitian(h, t, w);
            EXPECT_LT((w - dense_reference(h, t, v)).norm(), 1e-10) << n << " " << t;
            EXPECT_NEAR(w.norm(), 1, 1e-12);
        }
    }
}

TEST(krylov, zero_time_and_invariant_subspace) {
    std::mt19937_64 rng(2);
    auto h = random_hermitian(30, 0.2, rng);
    Eigen::VectorXcd v = Eigen::VectorXcd::Random(30);
    Eigen::VectorXcd w = v;
    expv_hermitian(h, 0, w);
    EXPECT_EQ((w - v).norm(), 0);

    // An eigenvector only acquires a phase (Krylov space of dimension one).
    SparseHermitian d(4, 4);
    d.insert(0, 0) = 2.0;
    d.insert(1, 1) = -1.0;
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(4);
    e[0] = 1;
    expv_hermitian(d, 0.3, e);
    EXPECT_NEAR(std::abs(e[0] - std::exp(cplx(0, -0.6))), 0, 1e-14);
}

TEST(krylov, rejects_mismatched_sizes) {
    SparseHermitian h(3, 3);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(4);
    EXPECT_THROW(expv_hermitian(h, 1, v), std::invalid_argument);
}
