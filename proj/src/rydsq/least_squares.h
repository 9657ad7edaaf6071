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

#ifndef RYDSQ_LEAST_SQUARES_H
#define RYDSQ_LEAST_SQUARES_H

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rydsq {

/// Raised when an iterative numerical procedure fails to produce a usable
/// answer (non-convergence, singular curvature, missing optimum).
class NumericalError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Fills already-whitened residuals (model - data) / sigma.
using ResidualFn = std::function<void(const Eigen::VectorXd &params, Eigen::VectorXd &residuals)>;
/// Fills d(residual_i)/d(param_k).
using JacobianFn = std::function<void(const Eigen::VectorXd &params, Eigen::MatrixXd &jacobian)>;

struct LeastSquaresResult {
    Eigen::VectorXd params;
    /// (J^T J)^-1 at the optimum; absolute because residuals are whitened.
    Eigen::MatrixXd covariance;
    double chi2 = 0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::string status;
};

struct LeastSquaresOptions {
    double tolerance = 1e-14;
    int max_evaluations = 4000;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) on whitened residuals with an
/// analytic Jacobian.
LeastSquaresResult levenberg_marquardt(
    int n_residuals,
    const Eigen::VectorXd &initial,
    const ResidualFn &residuals,
    const JacobianFn &jacobian,
    const LeastSquaresOptions &options = {});

}  // namespace rydsq

#endif
