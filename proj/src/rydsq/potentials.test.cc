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

#include "rydsq/potentials.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"

using namespace rydsq;

TEST(potentials, lab_units_and_beta) {
    auto p = DressingParams::from_lab_units(5.5, 11, 9.1);
    EXPECT_NEAR(p.omega_r, kTwoPi * 5.5e6, 1e-3);
    EXPECT_NEAR(p.delta, kTwoPi * 11e6, 1e-3);
    EXPECT_NEAR(p.c6 / (kTwoPi * 9.1e9 * 1e-36), 1, 1e-14);
    EXPECT_NEAR(p.beta(), 0.25, 1e-15);
    DressingParams bad;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(potentials, weak_dressing_closed_form) {
    auto p = DressingParams::from_lab_units(5.5, 11, 9.1);
    auto v = weak_dressing_potential(p);
    // beta^3 Omega / 2 pi and (C6 / 2 Delta)^(1/6), written out independently.
    EXPECT_NEAR(v.v0_hz, std::pow(0.25, 3) * 5.5e6, 1e-6);
    EXPECT_NEAR(v.r_b, std::pow(9.1e9 / (2 * 11e6), 1.0 / 6) * 1e-6, 1e-15);
    EXPECT_NEAR(soft_core(v, 0), v.v0_hz, 1e-9);
    EXPECT_NEAR(soft_core(v, v.r_b), v.v0_hz / 2, 1e-9);
    EXPECT_NEAR(soft_core(v, 10 * v.r_b) * 1e6, v.v0_hz, v.v0_hz * 1e-5);
}

TEST(potentials, pair_oscillation_is_half_the_shift_and_soft_core_shaped) {
    auto p = DressingParams::from_lab_units(1.0, 20, 9.1);  // beta = 0.025
    auto v = weak_dressing_potential(p);
    double near = pair_oscillation_frequency(p, 0.2 * v.r_b);
    EXPECT_NEAR(2 * near, v.v0_hz, 0.05 * v.v0_hz);
    double far = pair_oscillation_frequency(p, 3 * v.r_b);
    EXPECT_LT(std::abs(far), 0.01 * std::abs(near));
}

TEST(potentials, fit_recovers_noiseless_curve) {
    PairOscillationData d;
    for (int r = 1; r <= 8; r++) {
        double f = 0.5 * 46.4e3 / (1 + std::pow(r / 4.9, 6));
        d.points.push_back({(double)r, f, 100});
    }
    auto fit = fit_soft_core(d);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.v0_hz, 46.4e3, 1e-3);
    EXPECT_NEAR(fit.rb_lat, 4.9, 1e-8);
    EXPECT_NEAR(fit.chi2, 0, 1e-12);
    EXPECT_GT(fit.v0_err(), 0);
    EXPECT_NEAR(fit.potential(575e-9).r_b, 4.9 * 575e-9, 1e-14);
}

TEST(potentials, fit_uncertainty_is_calibrated) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    int inside = 0, trials = 200;
    for (int t = 0; t < trials; t++) {
        PairOscillationData d;
        for (int r = 1; r <= 8; r++) {
            double f = 0.5 * 46.4e3 / (1 + std::pow(r / 4.9, 6));
            d.points.push_back({(double)r, f + 150 * g(rng), 150});
        }
        auto fit = fit_soft_core(d);
        inside += std::abs(fit.v0_hz - 46.4e3) < fit.v0_err();
    }
    // One-sigma coverage of a near-linear fit: 68% within binomial scatter.
    EXPECT_NEAR(inside / (double)trials, 0.683, 0.1);
}

TEST(potentials, fit_and_csv_validation) {
    PairOscillationData d;
    d.points = {{1, 1, 1}, {2, 1, 1}};
    EXPECT_THROW(fit_soft_core(d), std::invalid_argument);
    d.points = {{1, 1, 1}, {1, 1, 1}, {2, 1, 1}};
    EXPECT_THROW(d.validate(), std::invalid_argument);
    auto parsed = parse_pair_oscillation_csv("# comment\nr_lat,freq_hz,err_hz\n1,23000,300\n2,22000,300\n3,15000,300\n");
    ASSERT_EQ(parsed.points.size(), 3u);
    EXPECT_EQ(parsed.points[1].freq_hz, 22000);
    EXPECT_THROW(parse_pair_oscillation_csv(""), std::invalid_argument);
    EXPECT_THROW(parse_pair_oscillation_csv("1,abc,3\n"), std::invalid_argument);
    EXPECT_THROW(read_pair_oscillation_csv("/nonexistent/file.csv"), std::invalid_argument);
}
