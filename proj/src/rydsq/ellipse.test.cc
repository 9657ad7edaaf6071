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

#include "rydsq/ellipse.h"

#include <cmath>
#include <numeric>
#include <random>

#include "gtest/gtest.h"
#include "oracles/binomial_ellipse_oracle.h"
#include "rydsq/tempered_binomial.h"

using namespace rydsq;

namespace {

EllipseModel model(double phi, double c, double y0, int n, double z0 = 1, double z1 = 1) {
    EllipseModel m;
    m.phi = phi;
    m.contrast = c;
    m.y0 = y0;
    m.n_atoms = n;
    m.zeta0 = z0;
    m.zeta1 = z1;
    return m;
}

MeasurementRecord ellipse_record(const EllipseModel &m, int shots, std::uint64_t seed) {
    NoiseSpec n;
    n.laser_phase_mode = LaserPhaseMode::kRandomUniform;
    n.differential_phase = m.phi;
    n.contrast = m.contrast;
    n.y_a = n.y_b = m.y0;
    return m.is_binomial() ? sample_css(m.n_atoms, n, shots, seed) : sample_sss(m.n_atoms, n, m, shots, seed);
}

}  // namespace

TEST(ellipse, pmf_theta_reduces_to_binomial_product) {
    auto m = model(0.4, 0.9, 0.5, 12);
    double theta = 1.1;
    auto f = pmf_theta(m, theta);
    double pa = 0.45 * std::cos(theta) + 0.5, pb = 0.45 * std::cos(theta + 0.4) + 0.5;
    double worst = 0;
    for (int a = 0; a <= 12; a++) {
        for (int b = 0; b <= 12; b++) {
            worst = std::max(worst, std::abs(f[a * 13 + b] - oracle::binomial_pmf(12, a, pa) * oracle::binomial_pmf(12, b, pb)));
        }
    }
    EXPECT_LT(worst, 1e-14);
}

TEST(ellipse, pmfs_normalized_and_nonnegative) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 8; t++) {
        double c = u(rng);
        auto m = model(u(rng) * M_PI, c, c / 2 + (1 - c) * u(rng), 20, 0.3 + u(rng), 0.3 + u(rng));
        for (const auto &f : {pmf_theta(m, u(rng) * 6.28), pmf_marginal(m, 360)}) {
            double s = 0;
            for (double x : f) {
                EXPECT_GE(x, 0);
                s += x;
            }
            EXPECT_NEAR(s, 1, 1e-12);
        }
    }
}

TEST(ellipse, four_atom_tempered_variance_below_binomial) {
    auto m = model(0, 1, 0.5, 4, 0.5, 1);
    auto f = pmf_theta(m, M_PI / 2);
    std::vector<double> pa(5, 0);
    for (int a = 0; a <= 4; a++) {
        for (int b = 0; b <= 4; b++) {
            pa[a] += f[a * 5 + b];
        }
    }
    double mean, var;
    TemperedBinomial::moments(pa, mean, var);
    EXPECT_NEAR(mean, 2, 1e-12);
    EXPECT_LT(var, 4 * 0.25);
}

TEST(ellipse, marginal_properties) {
    auto flat_a = pmf_marginal(model(0.2, 0, 0.5, 10));
    auto flat_b = pmf_marginal(model(2.0, 0, 0.5, 10));
    for (std::size_t k = 0; k < flat_a.size(); k++) {
        EXPECT_NEAR(flat_a[k], flat_b[k], 1e-15);
    }
    EXPECT_LT(marginal_convergence(model(M_PI / 6, 0.95, 0.5, 70)), 1e-10);
    EXPECT_LT(marginal_convergence(model(M_PI / 6, 0.95, 0.5, 70, 0.6, 1.0)), 1e-10);
}

TEST(ellipse, css_likelihood_matches_plain_binomial_oracle) {
    auto truth = model(M_PI / 6, 0.95, 0.5, 30);
    auto rec = ellipse_record(truth, 300, 12);
    std::vector<int> ka, kb;
    for (const auto &s : rec.shots) {
        ka.push_back((int)std::lround(s.p_a * 30));
        kb.push_back((int)std::lround(s.p_b * 30));
    }
    for (double phi : {0.1, 0.5, 1.7}) {
        auto m = truth;
        m.phi = phi;
        double ref = oracle::css_log_likelihood(30, ka, kb, phi, 0.95, 0.5, 720);
        EXPECT_NEAR(log_likelihood(m, rec), ref, 1e-10 * std::abs(ref));
    }
}

TEST(ellipse, likelihood_exchange_symmetry) {
    auto truth = model(0.7, 0.9, 0.52, 20, 0.7, 1.2);
    auto rec = ellipse_record(truth, 200, 4);
    MeasurementRecord swapped = rec;
    for (auto &s : swapped.shots) {
        std::swap(s.p_a, s.p_b);
    }
    auto mirrored = truth;
    mirrored.phi = 2 * M_PI - truth.phi;
    // The theta shift that maps one model onto the other is off the node grid;
    // periodic trapezoid error is spectrally small.
    EXPECT_NEAR(log_likelihood(truth, rec), log_likelihood(mirrored, swapped), 1e-8);
}

TEST(ellipse, mle_recovers_phase) {
    auto truth = model(M_PI / 6, 0.95, 0.5, 70);
    auto rec = ellipse_record(truth, 1000, 21);
    auto fit = fit_mle(rec, initial_model_from_record(rec), ParameterMask::css());
    EXPECT_FALSE(fit.degenerate);
    EXPECT_FALSE(fit.boundary_pinned);
    EXPECT_NEAR(fit.phi_hat, M_PI / 6, 0.05);
    EXPECT_NEAR(fit.model.contrast, 0.95, 0.03);
    // The maximum is at least as good as the truth.
    EXPECT_GE(fit.log_likelihood, log_likelihood(truth, rec) - 1e-9);
}

TEST(ellipse, phase_near_zero_is_biased_upward) {
    auto truth = model(0, 0.95, 0.5, 70);
    double bias = 0;
    int reps = 40;
    for (int r = 0; r < reps; r++) {
        auto rec = ellipse_record(truth, 300, 100 + r);
        bias += fit_mle(rec, truth, ParameterMask::phi_only()).phi_hat;
    }
    EXPECT_GT(bias / reps, 0.01);
}

TEST(ellipse, single_shot_is_degenerate) {
    auto truth = model(0.5, 0.9, 0.5, 10);
    auto rec = ellipse_record(truth, 1, 1);
    auto fit = fit_mle(rec, truth, ParameterMask::phi_only());
    EXPECT_TRUE(fit.degenerate);
}

TEST(ellipse, fisher_information_shape) {
    auto m = model(0, 0.95, 0.5, 70);
    auto i0 = fisher_information_css(m, 0);
    auto i30 = fisher_information_css(m, M_PI / 6);
    auto i330 = fisher_information_css(m, 2 * M_PI - M_PI / 6);
    EXPECT_GE(i0.information, 0);
    EXPECT_LT(i0.information, i30.information);
    EXPECT_NEAR(i30.information, i330.information, 1e-6 * i30.information);
    EXPECT_LT(i30.richardson_rel, 1e-4);
    auto sq = m;
    sq.zeta0 = 0.5;
    EXPECT_THROW(fisher_information_css(sq, 0.5), std::invalid_argument);
    double z0 = zeta0_for_fisher_gain(m, M_PI / 6, 2.0);
    sq.zeta0 = z0;
    EXPECT_NEAR(10 * std::log10(fisher_information(sq, M_PI / 6).information / i30.information), 2.0, 1e-6);
}

TEST(ellipse, bootstrap_sets_depend_only_on_seed) {
    auto a = bootstrap_indices(100, 5, 9), b = bootstrap_indices(100, 5, 9), c = bootstrap_indices(100, 5, 10);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (const auto &set : a) {
        for (int i : set) {
            EXPECT_GE(i, 0);
            EXPECT_LT(i, 100);
        }
    }
}

TEST(ellipse, pipeline_is_deterministic_and_consistent) {
    auto truth = model(M_PI / 6, 0.95, 0.5, 40);
    auto cal = ellipse_record(truth, 300, 1);
    auto meas = ellipse_record(truth, 300, 2);
    PipelineOptions o;
    o.n_bootstrap = 6;
    auto r1 = calibrated_pipeline(cal, meas, o, 5);
    o.jobs = 3;
    auto r2 = calibrated_pipeline(cal, meas, o, 5);
    EXPECT_EQ(r1.phi_hat, r2.phi_hat);
    EXPECT_EQ(r1.jackknife, r2.jackknife);
    EXPECT_EQ(r1.bootstrap_phi, r2.bootstrap_phi);
    EXPECT_NEAR(r1.phi_hat, M_PI / 6, 4 * r1.total_err());
    EXPECT_EQ((int)r1.jackknife.size(), 300);
    // Leave-one-out estimates via interpolation agree with direct refits.
    auto hm = histogram_from_record(meas);
    for (int s : {0, 17, 299}) {
        std::vector<int> keep(300);
        std::iota(keep.begin(), keep.end(), 0);
        keep.erase(keep.begin() + s);
        auto fit = fit_mle(histogram_from_indices(hm, keep), r1.calibration.model, ParameterMask::phi_only());
        double loo = (300 * r1.phi_hat - r1.jackknife[s]) / 299;
        EXPECT_NEAR(loo, fit.phi_hat, 1e-7);
    }
}
