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

#ifndef RYDSQ_STABILITY_H
#define RYDSQ_STABILITY_H

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydsq/sampler.h"

namespace rydsq {

/// Uniformly sampled angular frequency differences omega_A - omega_B (rad/s).
struct FrequencySeries {
    std::vector<double> values;
    double sample_interval = 1;

    void validate() const;
};

/// d_z = p_a - p_b per shot.
std::vector<double> dz_from_record(const MeasurementRecord &r);

/// omega = 2 d_z / (C T_dark), small-angle regime.
FrequencySeries freq_series(const std::vector<double> &dz, double contrast, double t_dark, double sample_interval);

enum class AdevAxis { kTime, kCount };
enum class AdevSpacing { kOctave, kAll };

struct AllanPoint {
    int m = 1;
    double tau = 1;
    double adev = 0;
    /// Half width of the 68% chi-square interval.
    double err = 0;
    double lo = 0;
    double hi = 0;
    /// Effective degrees of freedom under white frequency noise.
    double edf = 0;
};

struct AllanCurve {
    std::vector<AllanPoint> points;
    AdevAxis axis = AdevAxis::kTime;
    double tau0 = 1;
    int n_samples = 0;

    std::string to_csv() const;
};

/// Overlapping Allan deviation of frequency-like samples y_k:
/// sigma^2(m) = sum_k (ybar_{k+m} - ybar_k)^2 / (2 (M - 2m + 1)), m <= M/3.
/// On the count axis tau = m (one shot per unit).
AllanCurve overlapping_adev(
    const std::vector<double> &y,
    double sample_interval,
    AdevAxis axis = AdevAxis::kTime,
    AdevSpacing spacing = AdevSpacing::kOctave);
AllanCurve overlapping_adev(const FrequencySeries &s, AdevAxis axis = AdevAxis::kTime);

/// Exact equivalent degrees of freedom 2 (E Q)^2 / Var Q of the overlapping
/// estimator at averaging factor m for white frequency noise.
double white_fm_edf(int n_samples, int m);

/// Covariance matrix of log(adev) across the curve's averaging factors under
/// white frequency noise.
Eigen::MatrixXd white_fm_log_covariance(int n_samples, const std::vector<int> &ms);

struct WhiteNoiseFit {
    /// sigma(tau) = amplitude / sqrt(tau / 1 unit).
    double amplitude = 0;
    double amplitude_err = 0;
    double slope = -0.5;
    double slope_err = 0;
    double chi2 = 0;
    int dof = 0;
    bool white = true;

    std::string to_json() const;
};

/// Generalized least squares of log(adev) against log(tau) using the
/// white-FM covariance of the points, after removing the log-chi-square bias.
/// `white` is false when the free slope misses -1/2 by more than
/// `slope_sigmas` standard errors.
WhiteNoiseFit fit_white_noise(const AllanCurve &curve, double slope_sigmas = 3);

struct XiPoint {
    double t = 0;
    double xi = 0;
    double err = 0;
};

struct DoubleExponentialFit {
    double a = 0;
    double b = 0;
    double gamma_a = 0;
    double gamma_b = 0;
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
    double chi2 = 0;
    double t_opt = 0;
    double xi_opt = 0;

    double operator()(double t) const;
    std::string to_json() const;
};

/// Weighted fit of a exp(-Gamma_a t) + b exp(-Gamma_b t) by a variable
/// projection grid over the rates followed by Levenberg-Marquardt, and the
/// analytic stationary point. Throws NumericalError when the fit does not
/// converge or the curve has no interior minimum.
DoubleExponentialFit fit_double_exponential(const std::vector<XiPoint> &points);

}  // namespace rydsq

#endif
