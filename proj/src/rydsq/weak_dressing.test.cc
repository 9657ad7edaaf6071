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

#include "rydsq/weak_dressing.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "oracles/spin_echo_oracle.h"

using namespace rydsq;

namespace {

InteractionPhases random_phases(int n, std::mt19937_64 &rng, double scale) {
    std::uniform_real_distribution<double> u(0, scale);
    InteractionPhases ph;
    ph.phi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; i++) {
        for (int j = i + 1; j < n; j++) {
            ph.phi(i, j) = ph.phi(j, i) = u(rng);
        }
    }
    return ph;
}

}  // namespace

TEST(weak_dressing, matches_state_vector_oracle) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ua(0, M_PI);
    for (int trial = 0; trial < 12; trial++) {
        int n = 2 + trial % 8;
        auto ph = random_phases(n, rng, 0.6);
        double alpha = ua(rng);
        auto ref = oracle::brute_force_echo(ph.phi, alpha);
        EXPECT_NEAR(contrast(ph), ref.contrast, 1e-12);
        EXPECT_NEAR(variance_ratio(ph, alpha), ref.var_ratio, 1e-11);
        EXPECT_NEAR(quadrature_coefficients(ph).at(alpha), ref.var_ratio, 1e-11);
        for (int i = 0; i < n; i++) {
            EXPECT_NEAR(single_spin_bloch(ph, i)[0], ref.bloch_x[i], 1e-12);
            for (int j = 0; j < n; j++) {
                if (i != j) {
                    EXPECT_NEAR(g2_correlator(ph, alpha, i, j), ref.g2(i, j), 1e-12);
                }
            }
        }
    }
}

TEST(weak_dressing, echo_cancels_longitudinal_fields) {
    std::mt19937_64 rng(3);
    auto ph = random_phases(5, rng, 0.4);
    auto with = oracle::brute_force_echo(ph.phi, 0.7, {0.3, -1.1, 2.0, 0.5, 0.9});
    EXPECT_NEAR(variance_ratio(ph, 0.7), with.var_ratio, 1e-12);
    EXPECT_NEAR(contrast(ph), with.contrast, 1e-12);
}

TEST(weak_dressing, closed_form_minimum_matches_search) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; trial++) {
        auto ph = random_phases(6 + trial, rng, 0.3);
        auto q = quadrature_coefficients(ph);
        auto best = minimize_over_alpha([&](double a) { return variance_ratio(ph, a); });
        EXPECT_NEAR(best.second, q.minimum(), 1e-10);
        auto w = wineland(ph);
        EXPECT_NEAR(w.xi_w_sq, q.minimum() / (w.contrast * w.contrast), 1e-10);
        EXPECT_EQ(w.alpha_grid.size(), 181u);
    }
}

TEST(weak_dressing, uniform_phases_reduce_to_one_axis_twisting) {
    for (int n : {4, 10, 30}) {
        for (double phi : {0.01, 0.05, 0.1}) {
            auto w = wineland(uniform_phases(n, phi));
            EXPECT_NEAR(w.xi_w_sq, oracle::oat_xi_sq(n, 2 * phi), 1e-10) << n << " " << phi;
            EXPECT_NEAR(w.contrast, std::pow(std::cos(phi), n - 1), 1e-12);
        }
    }
}

TEST(weak_dressing, no_interaction_is_projection_noise) {
    auto ph = uniform_phases(8, 0);
    EXPECT_DOUBLE_EQ(contrast(ph), 1);
    for (double a : {0.0, 0.4, 1.3}) {
        EXPECT_NEAR(variance_ratio(ph, a), 1, 1e-15);
    }
    EXPECT_NEAR(to_db(wineland(ph).xi_w_sq), 0, 1e-12);
}

TEST(weak_dressing, to_db_is_power_convention) {
    EXPECT_NEAR(to_db(0.417), -3.798, 1e-3);
    EXPECT_NEAR(to_db(10), 10, 1e-14);
}

TEST(weak_dressing, couplings_vanish_between_subarrays) {
    SubarrayLayout l;
    l.rows = 2;
    l.cols = 2;
    l.n_subarrays = 2;
    auto g = build_subarrays(l);
    SoftCorePotential v{46.4e3, 4.9 * kDefaultLatticeConstant};
    auto c = couplings_from_potential(g, v);
    for (std::size_t i = 0; i < g.size(); i++) {
        EXPECT_EQ(c.v_hz(i, i), 0);
        for (std::size_t j = 0; j < g.size(); j++) {
            if (g.labels()[i] != g.labels()[j]) {
                EXPECT_EQ(c.v_hz(i, j), 0);
            } else if (i != j) {
                EXPECT_NEAR(c.v_hz(i, j), soft_core(v, g.distance(i, j)), 1e-9);
            }
        }
    }
    auto ph = interaction_phases(c, 2e-6);
    EXPECT_NEAR(ph.phi(0, 1), M_PI * c.v_hz(0, 1) * 2e-6, 1e-15);
}

TEST(weak_dressing, rejects_bad_input) {
    InteractionPhases ph;
    ph.phi = Eigen::MatrixXd::Zero(2, 3);
    EXPECT_THROW(ph.validate(), std::invalid_argument);
    EXPECT_THROW(g2_correlator(uniform_phases(3, 0.1), 0, 1, 1), std::invalid_argument);
    CouplingMatrix c;
    c.v_hz = Eigen::MatrixXd::Zero(2, 2);
    EXPECT_THROW(optimize_time(c, {}), std::invalid_argument);
}

TEST(weak_dressing, optimum_in_time_beats_grid) {
    SubarrayLayout l;
    l.rows = 3;
    l.cols = 3;
    auto g = build_subarrays(l);
    auto c = couplings_from_potential(g, {46.4e3, 4.9 * kDefaultLatticeConstant});
    std::vector<double> grid;
    for (int k = 1; k <= 50; k++) {
        grid.push_back(k * 0.1e-6);
    }
    auto opt = optimize_time(c, grid);
    for (double t : grid) {
        auto ph = interaction_phases(c, t);
        EXPECT_LE(opt.obs.xi_w_sq, quadrature_coefficients(ph).minimum() / std::pow(contrast(ph), 2) + 1e-12);
    }
    EXPECT_LT(opt.obs.xi_w_sq, 1);
}

TEST(weak_dressing, scan_csv_and_g2_map) {
    std::vector<double> grid;
    for (int k = 1; k <= 40; k++) {
        grid.push_back(k * 0.125e-6);
    }
    auto rows = scan_xi_vs_n({{2, 2}, {3, 3}}, {46.4e3, 4.9 * kDefaultLatticeConstant}, grid);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].n, 4);
    EXPECT_EQ(rows[1].n, 9);
    EXPECT_LT(rows[1].xi_w_sq, rows[0].xi_w_sq);
    auto csv = scan_to_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,rows,cols,t_int_us,alpha_opt_deg,contrast,var_ratio_min,xi_db");

    SubarrayLayout l;
    l.rows = 2;
    l.cols = 2;
    auto g = build_subarrays(l);
    auto ph = interaction_phases(couplings_from_potential(g, {46.4e3, 4.9 * kDefaultLatticeConstant}), 1e-6);
    auto map = g2_map(g, ph, {0.3});
    int pairs = 0;
    for (const auto &e : map) {
        pairs += e.pairs;
    }
    EXPECT_EQ(pairs, 12);
}
