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

#include "rydsq/stability.h"

#include <cmath>
#include <random>

#include <boost/math/special_functions/digamma.hpp>

#include "gtest/gtest.h"
#include "rydsq/weak_dressing.h"

using namespace rydsq;

namespace {

// Direct double loop over window means.
double naive_adev(const std::vector<double> &y, int m) {
    int n = (int)y.size();
    double sum = 0;
    int terms = 0;
    for (int k = 0; k + 2 * m <= n; k++) {
        double a = 0, b = 0;
        for (int i = 0; i < m; i++) {
            a += y[k + i];
            b += y[k + m + i];
        }
        double d = (b - a) / m;
        sum += d * d;
        terms++;
    }
    return std::sqrt(sum / (2.0 * terms));
}

std::vector<double> white(int n, std::uint64_t seed, double sigma = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, sigma);
    std::vector<double> y(n);
    for (double &v : y) {
        v = g(rng);
    }
    return y;
}

}  // namespace

TEST(stability, dz_and_frequency_conversion) {
    MeasurementRecord r;
    r.shots = {{0.5, 0.5, 70, 70}, {1, 0, 70, 70}, {0.2, 0.7, 70, 70}};
    auto dz = dz_from_record(r);
    EXPECT_EQ(dz[0], 0);
    EXPECT_EQ(dz[1], 1);
    EXPECT_NEAR(dz[2], -0.5, 1e-15);
    auto s = freq_series({0.01}, 0.96, 54.5e-3, 1.4);
    EXPECT_NEAR(s.values[0], 0.382, 5e-4);
    EXPECT_THROW(freq_series({0.01}, 0, 1, 1), std::invalid_argument);
    EXPECT_THROW(dz_from_record(MeasurementRecord{}), std::invalid_argument);
    MeasurementRecord swapped = r;
    for (auto &shot : swapped.shots) {
        std::swap(shot.p_a, shot.p_b);
    }
    auto dzs = dz_from_record(swapped);
    for (std::size_t k = 0; k < dz.size(); k++) {
        EXPECT_EQ(dzs[k], -dz[k]);
    }
}

TEST(stability, overlapping_adev_matches_naive_sum) {
    std::vector<std::vector<double>> series{white(300, 1), {}, white(97, 2, 1e-3)};
    for (int k = 0; k < 64; k++) {
        series[1].push_back(k % 2 ? 2.5 : -2.5);
    }
    for (const auto &y : series) {
        auto c = overlapping_adev(y, 1.0, AdevAxis::kTime, AdevSpacing::kAll);
        EXPECT_EQ((int)c.points.size(), (int)y.size() / 3);
        for (const auto &p : c.points) {
            double ref = naive_adev(y, p.m);
            EXPECT_NEAR(p.adev, ref, 1e-12 * std::max(1.0, ref)) << p.m;
        }
    }
    // Alternating +-x: window means cancel for even m, full swing for m = 1.
    auto alt = overlapping_adev(series[1], 1.0);
    EXPECT_NEAR(alt.points[0].adev, 2.5 * std::sqrt(2.0), 1e-12);
}

TEST(stability, constant_and_scaling_invariance) {
    auto y = white(500, 3);
    auto base = overlapping_adev(y, 2.0);
    std::vector<double> shifted = y, scaled = y, flat(500, 4.2);
    for (std::size_t k = 0; k < y.size(); k++) {
        shifted[k] += 1e3;
        scaled[k] *= -3;
    }
    auto cs = overlapping_adev(shifted, 2.0), cx = overlapping_adev(scaled, 2.0), cf = overlapping_adev(flat, 2.0);
    for (std::size_t k = 0; k < base.points.size(); k++) {
        EXPECT_NEAR(cs.points[k].adev, base.points[k].adev, 1e-10);
        EXPECT_NEAR(cx.points[k].adev, 3 * base.points[k].adev, 1e-12);
        EXPECT_NEAR(cf.points[k].adev, 0, 1e-13);
        EXPECT_DOUBLE_EQ(base.points[k].tau, 2.0 * base.points[k].m);
    }
    EXPECT_THROW(overlapping_adev(std::vector<double>(7, 0), 1.0), std::invalid_argument);
}

TEST(stability, white_fm_edf_against_monte_carlo) {
    // 2 (E Q)^2 / Var Q measured over many white-noise draws.
    int n = 64, m = 4, trials = 20000;
    std::vector<double> v(trials);
    for (int t = 0; t < trials; t++) {
        auto y = white(n, 1000 + t);
        double a = naive_adev(y, m);
        v[t] = a * a;
    }
    double mean = 0, var = 0;
    for (double x : v) {
        mean += x;
    }
    mean /= trials;
    for (double x : v) {
        var += (x - mean) * (x - mean);
    }
    var /= trials - 1;
    double edf_mc = 2 * mean * mean / var;
    EXPECT_NEAR(white_fm_edf(n, m) / edf_mc, 1, 0.05);
    EXPECT_NEAR(mean, 1.0 / m, 0.01 / m);
}

TEST(stability, white_noise_identity) {
    auto y = white(10000, 11);
    auto c = overlapping_adev(y, 1.0);
    auto fit = fit_white_noise(c);
    EXPECT_NEAR(fit.amplitude, 1, 0.05);
    EXPECT_NEAR(fit.slope, -0.5, 3 * fit.slope_err);
    EXPECT_TRUE(fit.white);
}

TEST(stability, exact_power_law_recovered) {
    AllanCurve c;
    c.n_samples = 1000;
    for (int m = 1; m <= 256; m *= 2) {
        AllanPoint p;
        p.m = m;
        p.tau = m * 1.4;
        p.edf = white_fm_edf(1000, m);
        // Pre-compensate the log chi-square bias the fit removes.
        p.adev = 2.5 / std::sqrt(p.tau) * std::exp(0.5 * (boost::math::digamma(p.edf / 2) - std::log(p.edf / 2)));
        c.points.push_back(p);
    }
    auto fit = fit_white_noise(c);
    EXPECT_NEAR(fit.amplitude, 2.5, 1e-10);
    EXPECT_NEAR(fit.slope, -0.5, 1e-10);
}

TEST(stability, slope_coverage_over_seeded_trials) {
    int good = 0;
    for (int t = 0; t < 100; t++) {
        auto fit = fit_white_noise(overlapping_adev(white(2000, 500 + t), 1.0));
        good += std::abs(fit.slope + 0.5) <= 2 * fit.slope_err;
    }
    EXPECT_GE(good, 90);
}

TEST(stability, double_exponential_fit) {
    std::vector<XiPoint> pts;
    for (int k = 0; k < 30; k++) {
        double t = k * 0.2;
        pts.push_back({t, 1.2 * std::exp(-1.5 * t) + 0.05 * std::exp(0.4 * t), 0.01});
    }
    auto fit = fit_double_exponential(pts);
    double ga = fit.gamma_a, gb = fit.gamma_b;
    double a = fit.a, b = fit.b;
    if (ga < gb) {
        std::swap(ga, gb);
        std::swap(a, b);
    }
    EXPECT_NEAR(ga, 1.5, 1e-6);
    EXPECT_NEAR(gb, -0.4, 1e-6);
    EXPECT_NEAR(a, 1.2, 1e-6);
    EXPECT_NEAR(b, 0.05, 1e-6);
    double t_ref = std::log(1.2 * 1.5 / (0.05 * 0.4)) / 1.9;
    EXPECT_NEAR(fit.t_opt, t_ref, 1e-6);

    std::vector<XiPoint> mono;
    for (int k = 0; k < 20; k++) {
        mono.push_back({k * 0.1, std::exp(-k * 0.1), 0.01});
    }
    EXPECT_THROW(fit_double_exponential(mono), NumericalError);
    EXPECT_THROW(fit_double_exponential({pts.begin(), pts.begin() + 4}), std::invalid_argument);
}

TEST(stability, double_exponential_on_weak_dressing_curve) {
    SubarrayLayout l;
    l.rows = 4;
    l.cols = 4;
    auto g = build_subarrays(l);
    auto c = couplings_from_potential(g, {46.4e3, 4.9 * kDefaultLatticeConstant});
    std::vector<XiPoint> pts;
    double best_t = 0, best = 1e9;
    for (int k = 1; k <= 400; k++) {
        double t = k * 0.01e-6;
        auto ph = interaction_phases(c, t);
        double xi = quadrature_coefficients(ph).minimum() / std::pow(contrast(ph), 2);
        if (xi < best) {
            best = xi;
            best_t = t;
        }
        if (k % 20 == 0) {
            pts.push_back({t * 1e6, xi, 0.01 * xi});
        }
    }
    auto fit = fit_double_exponential(pts);
    EXPECT_NEAR(fit.t_opt, best_t * 1e6, 0.1 * best_t * 1e6);
}
