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

#include "rydsq/least_squares.h"

#include <cmath>

#include <unsupported/Eigen/LevenbergMarquardt>

namespace rydsq {

namespace {

struct Adapter : Eigen::DenseFunctor<double> {
    Adapter(int inputs, int values, const ResidualFn &r, const JacobianFn &j)
        : Eigen::DenseFunctor<double>(inputs, values), residuals(r), jacobian(j) {
    }
    int operator()(const Eigen::VectorXd &x, Eigen::VectorXd &fvec) const {
        residuals(x, fvec);
        return fvec.allFinite() ? 0 : -1;
    }
    int df(const Eigen::VectorXd &x, Eigen::MatrixXd &fjac) const {
        jacobian(x, fjac);
        return fjac.allFinite() ? 0 : -1;
    }
    const ResidualFn &residuals;
    const JacobianFn &jacobian;
};

const char *status_name(Eigen::LevenbergMarquardtSpace::Status s) {
    using namespace Eigen::LevenbergMarquardtSpace;
    switch (s) {
        case ImproperInputParameters:
            return "improper input parameters";
        case RelativeReductionTooSmall:
            return "relative reduction below tolerance";
        case RelativeErrorTooSmall:
            return "relative step below tolerance";
        case RelativeErrorAndReductionTooSmall:
            return "relative step and reduction below tolerance";
        case CosinusTooSmall:
            return "residual orthogonal to Jacobian";
        case TooManyFunctionEvaluation:
            return "evaluation budget exhausted";
        case FtolTooSmall:
            return "no further reduction possible";
        case XtolTooSmall:
            return "no further improvement of the parameters possible";
        case GtolTooSmall:
            return "gradient orthogonal to residual";
        case UserAsked:
            return "non-finite model evaluation";
        default:
            return "not started";
    }
}

}  // namespace

LeastSquaresResult levenberg_marquardt(
    int n_residuals,
    const Eigen::VectorXd &initial,
    const ResidualFn &residuals,
    const JacobianFn &jacobian,
    const LeastSquaresOptions &options) {
    int n = (int)initial.size();
    if (n_residuals < n) {
        throw std::invalid_argument("fewer residuals than parameters");
    }
    Adapter functor(n, n_residuals, residuals, jacobian);
    Eigen::LevenbergMarquardt<Adapter> lm(functor);
    lm.setFtol(options.tolerance);
    lm.setXtol(options.tolerance);
    lm.setMaxfev(options.max_evaluations);

    LeastSquaresResult out;
    Eigen::VectorXd x = initial;
    auto status = lm.minimize(x);
    using namespace Eigen::LevenbergMarquardtSpace;
    out.params = x;
    out.iterations = (int)lm.iterations();
    out.evaluations = (int)lm.nfev();
    out.status = status_name(status);
    out.converged = status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
                    status == RelativeErrorAndReductionTooSmall || status == CosinusTooSmall ||
                    status == FtolTooSmall || status == XtolTooSmall || status == GtolTooSmall;

    Eigen::VectorXd r(n_residuals);
    residuals(x, r);
    out.chi2 = r.squaredNorm();
    Eigen::MatrixXd jac(n_residuals, n);
    jacobian(x, jac);
    Eigen::MatrixXd normal = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    if (lu.isInvertible()) {
        out.covariance = lu.inverse();
    } else {
        out.covariance = Eigen::MatrixXd::Constant(n, n, std::nan(""));
        out.converged = false;
        out.status += " (singular normal matrix)";
    }
    return out;
}

}  // namespace rydsq
