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

#ifndef RYDSQ_SAMPLER_H
#define RYDSQ_SAMPLER_H

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rydsq/ellipse_model.h"

namespace rydsq {

enum class RecordMode { kQuadrature, kStability, kEllipse };
enum class LaserPhaseMode { kFixed, kWhite, kRandomUniform };

std::string to_string(RecordMode m);
std::string to_string(LaserPhaseMode m);
RecordMode record_mode_from_string(const std::string &s);
LaserPhaseMode laser_phase_mode_from_string(const std::string &s);

struct Shot {
    double p_a = 0;
    double p_b = 0;
    int n_a = 0;
    int n_b = 0;
};

/// Time-ordered single-shot excitation fractions of two ensembles.
struct MeasurementRecord {
    std::vector<Shot> shots;
    RecordMode mode = RecordMode::kQuadrature;
    LaserPhaseMode theta_mode = LaserPhaseMode::kFixed;
    double t_dark = 0;
    double cycle_time = 1.4;
    double phase_offset_deg = 0;
    std::string label = "css";
    /// Number of shots whose probability had to be clipped into [0, 1].
    int clipped = 0;

    void validate() const;
};

/// Per-shot mean excitation law. y_a and y_b are offsets of the excitation
/// fraction: P_A = (C/2) cos(theta) + y_a, P_B = (C/2) cos(theta + phi) + y_b,
/// so |y - 1/2| <= (1 - C)/2 keeps P in [0, 1].
struct NoiseSpec {
    LaserPhaseMode laser_phase_mode = LaserPhaseMode::kFixed;
    double theta0 = 0;       // fixed value or centre of the white law
    double sigma_theta = 0;  // white-law standard deviation
    double differential_phase = 0;
    double contrast = 1;
    double y_a = 0.5;
    double y_b = 0.5;

    void validate() const;
};

/// Independent deterministic stream for (seed, purpose, index).
std::mt19937_64 make_stream(std::uint64_t seed, const std::string &purpose, std::uint64_t index);
/// Uniform double in [0, 1) from 53 random bits.
double uniform01(std::mt19937_64 &rng);
/// Standard normal draw via Box-Muller on uniform01 (platform independent).
double standard_normal(std::mt19937_64 &rng);
/// Inverse-CDF draw from a discrete mass function.
int draw_discrete(const double *pmf, int size, double u);

/// Laser phase for shot `index`; shared by every record generated with the
/// same seed so interleaved CSS and SSS shots probe the same theta.
double draw_theta(const NoiseSpec &noise, std::uint64_t seed, std::uint64_t index);

MeasurementRecord sample_css(int n_atoms, const NoiseSpec &noise, int n_shots, std::uint64_t seed, int jobs = 1);

/// Tempered-binomial shots; contrast, offsets, phase and theta law come from
/// `noise`, the tempering (zeta0, zeta1) from `model`.
MeasurementRecord sample_sss(
    int n_atoms, const NoiseSpec &noise, const EllipseModel &model, int n_shots, std::uint64_t seed, int jobs = 1);

enum class ServoMode { kOff, kIntegrator };

struct StabilityRunParams {
    int n_atoms = 70;
    int n_shots = 1000;
    double t_dark = 54.5e-3;
    double cycle_time = 1.4;
    double contrast = 1;
    double y_a = 0.5;
    double y_b = 0.5;
    double sigma_theta = 0;  // white laser phase noise per shot (rad)
    double freq_offset = 0;  // common laser detuning (Hz)
    double diff_freq = 0;    // differential frequency between A and B (Hz)
    ServoMode servo = ServoMode::kOff;
    double servo_gain = 0.1;
    bool squeezed = false;  // draw tempered shots with zeta0 / zeta1
    double zeta0 = 1;
    double zeta1 = 1;
    std::string label = "css";

    void validate() const;
};

/// Servo-locked Ramsey sequence. The laser phase accumulated in one dark
/// time is theta_k = pi/2 + 2 pi f T - c_k + noise_k; an integrator steers c_k
/// so that the mean excitation of both ensembles sits at 1/2.
MeasurementRecord sample_stability_run(const StabilityRunParams &params, std::uint64_t seed);

/// Shots drawn from given per-ensemble distributions of the excitation count
/// (e.g. from an exact final state).
MeasurementRecord sample_from_distributions(
    const std::vector<double> &dist_a, const std::vector<double> &dist_b, int n_shots, std::uint64_t seed);

std::string record_to_csv(const MeasurementRecord &r);
MeasurementRecord record_from_csv(const std::string &text);
void write_record(const MeasurementRecord &r, const std::string &path);
MeasurementRecord read_record(const std::string &path);

}  // namespace rydsq

#endif
