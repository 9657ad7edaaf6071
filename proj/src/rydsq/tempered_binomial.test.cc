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

#include "rydsq/tempered_binomial.h"

#include <cmath>

#include "gtest/gtest.h"
#include "oracles/binomial_ellipse_oracle.h"

using namespace rydsq;

TEST(tempered_binomial, unit_exponent_is_binomial) {
    TemperedBinomial tb(70);
    for (double p : {0.01, 0.3, 0.5, 0.97}) {
        auto pmf = tb.pmf(p, 1);
        for (int k = 0; k <= 70; k++) {
            EXPECT_NEAR(pmf[k], oracle::binomial_pmf(70, k, p), 1e-14);
        }
    }
}

TEST(tempered_binomial, four_atom_enumeration) {
    // Exhaustive: weights C(4,k)^e p^{ke} q^{(4-k)e} normalized by hand.
    TemperedBinomial tb(4);
    double p = 0.5, e = 4;  // zeta0 = 0.5
    double w[5], z = 0;
    for (int k = 0; k <= 4; k++) {
        w[k] = std::pow(oracle::binomial_pmf(4, k, p), e);
        z += w[k];
    }
    auto pmf = tb.pmf(p, e);
    double mean, var;
    TemperedBinomial::moments(pmf, mean, var);
    double ref_var = 0;
    for (int k = 0; k <= 4; k++) {
        EXPECT_NEAR(pmf[k], w[k] / z, 1e-15);
        ref_var += (k - 2.0) * (k - 2.0) * w[k] / z;
    }
    EXPECT_NEAR(var, ref_var, 1e-14);
    EXPECT_LT(var, 4 * p * (1 - p));
}

TEST(tempered_binomial, boundary_and_errors) {
    TemperedBinomial tb(5);
    auto zero = tb.pmf(0, 3);
    EXPECT_EQ(zero[0], 1);
    auto one = tb.pmf(1, 0.2);
    EXPECT_EQ(one[5], 1);
    EXPECT_THROW(tb.pmf(0.5, 0), std::invalid_argument);
    EXPECT_THROW(tb.pmf(0.5, INFINITY), std::invalid_argument);
    EXPECT_THROW(TemperedBinomial(0), std::invalid_argument);
}

TEST(tempered_binomial, variance_matching) {
    for (double ratio : {0.3, std::pow(10, -0.23), 1.0, 1.5}) {
        double zeta = zeta_for_variance_ratio(70, 0.5, ratio);
        double mean, var;
        TemperedBinomial::moments(TemperedBinomial(70).pmf(0.5, 1 / (zeta * zeta)), mean, var);
        EXPECT_NEAR(var / (70 * 0.25), ratio, 1e-10);
    }
    EXPECT_NEAR(zeta_for_variance_ratio(70, 0.5, 1), 1, 1e-8);
    EXPECT_THROW(zeta_for_variance_ratio(70, 0, 0.5), std::invalid_argument);
}
