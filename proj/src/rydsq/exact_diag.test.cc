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

#include "rydsq/exact_diag.h"

#include <cmath>
#include <cstdio>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "gtest/gtest.h"
#include "oracles/spin_echo_oracle.h"

using namespace rydsq;

namespace {

ArrayGeometry pair_geometry(int dx) {
    return ArrayGeometry(kDefaultLatticeConstant, {{0, 0}, {dx, 0}}, {0, 0});
}

ArrayGeometry line_geometry(int n, int dx) {
    std::vector<LatticeSite> s;
    for (int i = 0; i < n; i++) {
        s.push_back({i * dx, 0});
    }
    return ArrayGeometry(kDefaultLatticeConstant, s, std::vector<int>(n, 0));
}

// Two three-level atoms written out by hand; index = l0 + 3 l1.
Eigen::MatrixXcd two_atom_hamiltonian(double om_r, double delta, double om_c, double u) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(9, 9);
    Eigen::Matrix3d single;
    single << 0, om_c / 2, 0, om_c / 2, 0, om_r / 2, 0, om_r / 2, delta;
    Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
    for (int a = 0; a < 3; a++) {
        for (int b = 0; b < 3; b++) {
            for (int c = 0; c < 3; c++) {
                for (int d = 0; d < 3; d++) {
                    h(a + 3 * b, c + 3 * d) = single(a, c) * id(b, d) + id(a, c) * single(b, d);
                }
            }
        }
    }
    h(8, 8) += u;
    return h;
}

}  // namespace

TEST(exact_diag, hamiltonian_matches_hand_built_pair) {
    auto g = pair_geometry(3);
    double c6 = kTwoPi * 9.1e9 * 1e-36;
    double u = c6 / std::pow(3 * kDefaultLatticeConstant, 6);
    DriveValues d{kTwoPi * 5.5e6, kTwoPi * 11e6, kTwoPi * 0.3e6};
    Eigen::MatrixXcd h = Eigen::MatrixXcd(build_h3(g, c6, d));
    EXPECT_LT((h - two_atom_hamiltonian(d.omega_r, d.delta, d.omega_c, u)).norm(), 1e-6 * h.norm());
}

TEST(exact_diag, block_propagation_matches_dense_exponential) {
    auto g = line_geometry(3, 2);
    double c6 = kTwoPi * 9.1e9 * 1e-36;
    ExactEngine engine(g, c6);
    std::mt19937_64 rng(4);
    QuantumState psi;
    psi.n_atoms = 3;
    psi.amplitudes = Eigen::VectorXcd::Random(27);
    psi.amplitudes.normalize();
    for (DriveValues d : {DriveValues{kTwoPi * 5.5e6, kTwoPi * 11e6, 0}, DriveValues{kTwoPi * 2e6, -kTwoPi * 7e6, kTwoPi * 1e6}}) {
        Eigen::MatrixXcd h = Eigen::MatrixXcd(engine.hamiltonian(d));
        double t = 0.37e-6;
        Eigen::VectorXcd ref = (h * cplx(0, -t)).exp() * psi.amplitudes;
        QuantumState out = psi;
        engine.evolve(out, d, t);
        EXPECT_LT((out.amplitudes - ref).norm(), 1e-9);
    }
}

TEST(exact_diag, step_lists_compose_in_order) {
    auto g = line_geometry(2, 2);
    double c6 = kTwoPi * 9.1e9 * 1e-36;
    ExactEngine engine(g, c6);
    auto p = DressingParams::from_lab_units(5.5, 11, 9.1);
    RampSchedule ramp;
    EXPECT_EQ(ramp.n_steps(), 35);
    auto steps = ramp.ramp_up(p);
    ASSERT_EQ((int)steps.size(), 35);
    EXPECT_NEAR(steps.front().drive.delta, p.delta * (3 - 2.0 * 0.5 / 35), 1e-3);
    QuantumState a = QuantumState::ground(2);
    engine.rotate_clock(a, M_PI / 2, -M_PI / 2);
    QuantumState b = a;
    engine.evolve_steps(a, steps);
    for (const auto &s : steps) {
        Eigen::MatrixXcd h = Eigen::MatrixXcd(engine.hamiltonian(s.drive));
        b.amplitudes = (h * cplx(0, -s.dt)).exp() * b.amplitudes;
    }
    EXPECT_LT((a.amplitudes - b.amplitudes).norm(), 1e-9);
}

TEST(exact_diag, clock_rotation_conventions) {
    auto g = line_geometry(1, 1);
    ExactEngine engine(g, 0);
    QuantumState psi = QuantumState::ground(1);
    engine.rotate_clock(psi, M_PI, 0);
    EXPECT_NEAR(std::norm(psi.amplitudes[kE]), 1, 1e-15);
    psi = QuantumState::ground(1);
    engine.rotate_clock(psi, M_PI / 2, -M_PI / 2);
    auto obs = state_observables(psi);
    EXPECT_NEAR(obs.contrast, 1, 1e-14);
    EXPECT_NEAR(obs.var_ratio_min, 1, 1e-12);
    // Real equal-weight superposition: +x.
    EXPECT_NEAR(psi.amplitudes[kG].real(), M_SQRT1_2, 1e-15);
    EXPECT_NEAR(psi.amplitudes[kE].real(), M_SQRT1_2, 1e-15);
}

TEST(exact_diag, zero_interaction_time_is_coherent_state) {
    auto g = line_geometry(4, 2);
    auto p = DressingParams::from_lab_units(5.5, 11, 9.1);
    auto obs = run_sequence(g, p, PulseSequence::spin_echo(0));
    EXPECT_NEAR(obs.squeezing.contrast, 1, 1e-12);
    EXPECT_NEAR(to_db(obs.squeezing.xi_w_sq), 0, 1e-9);
    EXPECT_NEAR(obs.rydberg_population_final, 0, 1e-15);
}

TEST(exact_diag, ising_limit_matches_oracle) {
    // Strong detuning: the dressed dynamics are an Ising model whose phases
    // are set by the pair light shifts. Check the readout pipeline against the
    // oracle using the exact two-body dressed shifts.
    auto g = line_geometry(3, 3);
    auto p = DressingParams::from_lab_units(1.0, 40, 9.1);
    SequenceOptions o;
    o.ramps = false;
    double t = 2e-6;
    auto obs = run_sequence(g, p, PulseSequence::spin_echo(t), o);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; i++) {
        for (int j = 0; j < 3; j++) {
            if (i != j) {
                phi(i, j) = M_PI * dressed_pair_shift(p, g.distance(i, j)) * t;
            }
        }
    }
    InteractionPhases ph{phi, t};
    // Residual three-body and off-resonant mixing terms are O(beta^2) here.
    EXPECT_NEAR(obs.squeezing.contrast, contrast(ph), 2e-3);
    EXPECT_NEAR(obs.squeezing.var_ratio_min, quadrature_coefficients(ph).minimum(), 5e-3);
}

TEST(exact_diag, readout_distribution_variance_matches_observables) {
    auto g = line_geometry(3, 2);
    auto p = DressingParams::from_lab_units(5.5, 11, 9.1);
    SequenceOptions o;
    o.ramps = false;
    auto obs = run_sequence(g, p, PulseSequence::spin_echo(1e-6), o);
    for (int idx : {0, 30, 120}) {
        double alpha = obs.squeezing.alpha_grid[idx];
        auto dist = readout_distribution(obs.final_state, alpha);
        ASSERT_EQ(dist.size(), 4u);
        double sum = 0, m1 = 0, m2 = 0;
        for (int k = 0; k <= 3; k++) {
            sum += dist[k];
            m1 += dist[k] * (k - 1.5);
            m2 += dist[k] * (k - 1.5) * (k - 1.5);
        }
        EXPECT_NEAR(sum, 1, 1e-12);
        // The measured quadrature is orthogonal to the mean spin.
        EXPECT_NEAR(m1, 0, 1e-9);
        EXPECT_NEAR(4 * m2 / 3, obs.squeezing.var_ratio_grid[idx], 1e-9);
    }
}

TEST(exact_diag, size_cap_and_state_io) {
    EXPECT_THROW(check_exact_size(10), std::invalid_argument);
    EXPECT_NO_THROW(check_exact_size(9));
    QuantumState psi;
    psi.n_atoms = 2;
    psi.amplitudes = Eigen::VectorXcd::Random(9);
    std::string path = ::testing::TempDir() + "state.bin";
    psi.dump(path);
    auto back = QuantumState::load(path, 2);
    EXPECT_EQ((back.amplitudes - psi.amplitudes).norm(), 0);
    EXPECT_THROW(QuantumState::load(path, 3), std::invalid_argument);
    std::remove(path.c_str());
}

TEST(exact_diag, sequence_validation) {
    PulseSequence s;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    EXPECT_THROW(PulseSequence::spin_echo(-1).validate(), std::invalid_argument);
}

TEST(exact_diag, dressed_shift_approaches_soft_core_at_weak_dressing) {
    auto p = DressingParams::from_lab_units(1.0, 20, 9.1);
    auto v = weak_dressing_potential(p);
    for (double r_over_rb : {0.3, 1.0, 1.5}) {
        double r = r_over_rb * v.r_b;
        EXPECT_NEAR(dressed_pair_shift(p, r), soft_core(v, r), 0.08 * v.v0_hz) << r_over_rb;
    }
}
