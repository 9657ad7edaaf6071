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

#ifndef RYDSQ_ELLIPSE_H
#define RYDSQ_ELLIPSE_H

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rydsq/ellipse_model.h"
#include "rydsq/sampler.h"
#include "rydsq/stability.h"

namespace rydsq {

constexpr int kDefaultThetaNodes = 720;

/// Joint mass over (k_A, k_B) at fixed laser phase, row-major with index
/// k_A * (N + 1) + k_B.
std::vector<double> pmf_theta(const EllipseModel &m, double theta);

/// Phase-averaged joint mass (periodic trapezoid over `nodes` points).
std::vector<double> pmf_marginal(const EllipseModel &m, int nodes = kDefaultThetaNodes);

/// Largest entry change when the node count is doubled.
double marginal_convergence(const EllipseModel &m, int nodes = kDefaultThetaNodes);

/// Outcomes of a record binned on the (N + 1)^2 grid.
struct CountHistogram {
    int n_atoms = 0;
    int n_shots = 0;
    std::vector<int> cell;   // occupied cell indices, increasing
    std::vector<int> count;  // multiplicities
    /// Cell of every shot, in record order.
    std::vector<int> shot_cell;
};

CountHistogram histogram_from_record(const MeasurementRecord &r);
CountHistogram histogram_from_indices(const CountHistogram &h, const std::vector<int> &shots);

/// Marginal mass evaluated only at the requested cells.
std::vector<double> marginal_at_cells(const EllipseModel &m, const std::vector<int> &cells, int nodes);

/// sum over shots of log f(k_A, k_B); -inf if any shot has zero mass.
double log_likelihood(const EllipseModel &m, const CountHistogram &h, int nodes = kDefaultThetaNodes);
double log_likelihood(const EllipseModel &m, const MeasurementRecord &r, int nodes = kDefaultThetaNodes);

/// Free-parameter mask in the order (phi, contrast, y0, zeta0, zeta1).
struct ParameterMask {
    bool phi = true;
    bool contrast = true;
    bool y0 = true;
    bool zeta0 = false;
    bool zeta1 = false;

    static ParameterMask css() {
        return {};
    }
    static ParameterMask sss() {
        return {true, true, true, true, true};
    }
    static ParameterMask phi_only() {
        return {true, false, false, false, false};
    }
    int count() const {
        return phi + contrast + y0 + zeta0 + zeta1;
    }
};

struct FitOptions {
    int starts = 5;
    bool coordinate_descent = true;
    bool hessian = true;
    int nodes = kDefaultThetaNodes;
    int max_iterations = 3000;
};

struct LikelihoodResult {
    EllipseModel model;
    double phi_hat = 0;
    double log_likelihood = 0;
    /// Per-parameter std over bootstrap resamples (phi, C, y0, zeta0, zeta1).
    std::array<double, 5> bootstrap_spread{};
    int evaluations = 0;
    bool boundary_pinned = false;
    bool degenerate = false;

    std::string to_json() const;
};

/// Maximum likelihood over the free parameters with phi restricted to
/// [0, pi]. Several simplex starts are refined by coordinate descent; a
/// phi-only fit uses a grid plus Brent search instead.
LikelihoodResult fit_mle(
    const CountHistogram &h, const EllipseModel &init, const ParameterMask &free, const FitOptions &options = {});
LikelihoodResult fit_mle(
    const MeasurementRecord &r, const EllipseModel &init, const ParameterMask &free, const FitOptions &options = {});

/// Moment-based starting point: y0 from the mean fraction, C from the excess
/// variance over projection noise.
EllipseModel initial_model_from_record(const MeasurementRecord &r);

struct PipelineOptions {
    int n_bootstrap = 50;
    bool squeezed_model = false;
    int jobs = 1;
    int nodes = kDefaultThetaNodes;
    int chebyshev_nodes = 24;
};

struct PipelineResult {
    double phi_hat = 0;
    double stat_err = 0;
    double calib_err = 0;
    LikelihoodResult calibration;
    std::vector<double> bootstrap_phi;
    std::vector<double> jackknife;
    double jackknife_mean = 0;
    AllanCurve adev;
    WhiteNoiseFit adev_fit;

    double total_err() const;
    std::string to_json() const;
};

/// Resample index sets of the calibration bootstrap. They depend only on the
/// seed and the record length, so CSS and SSS pipelines run with the same seed
/// share them.
std::vector<std::vector<int>> bootstrap_indices(int n_shots, int n_bootstrap, std::uint64_t seed);

/// Calibrate (C, y0[, zeta]) on one record, discard its phase, extract phi
/// from the other, bootstrap the calibration, and build leave-one-out
/// jackknife pseudo-values m phi' - (m - 1) phi'_{!=i} with their count-axis
/// Allan deviation.
PipelineResult calibrated_pipeline(
    const MeasurementRecord &cal, const MeasurementRecord &meas, const PipelineOptions &options, std::uint64_t seed);

/// 10 log10 of the variance ratio CSS / SSS from the white-noise amplitudes
/// of the two jackknife Allan curves.
double paired_ratio_db(const PipelineResult &css, const PipelineResult &sss);

struct FisherResult {
    double information = 0;
    /// |I(h) - I(h/2)| relative to I(h/2).
    double richardson_rel = 0;
    double richardson = 0;
};

/// Classical Fisher information of phi: sum over cells of
/// (d/dphi log f)^2 f, derivative by central differences (step h).
FisherResult fisher_information(
    const EllipseModel &m, double phi0, double h = 1e-4, int nodes = kDefaultThetaNodes);
/// CSS-only entry point; rejects zeta != (1, 1).
FisherResult fisher_information_css(
    const EllipseModel &m, double phi0, double h = 1e-4, int nodes = kDefaultThetaNodes);

/// zeta0 (zeta1 held) giving I_model / I_binomial = 10^(gain_db / 10) at phi0.
double zeta0_for_fisher_gain(const EllipseModel &m, double phi0, double gain_db, int nodes = kDefaultThetaNodes);

}  // namespace rydsq

#endif
