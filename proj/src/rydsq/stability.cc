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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "json.hpp"
#include "rydsq/least_squares.h"

namespace rydsq {

void FrequencySeries::validate() const {
    if (!(sample_interval > 0)) {
        throw std::invalid_argument("sample_interval must be positive");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("frequency series contains a non-finite value");
        }
    }
}

std::vector<double> dz_from_record(const MeasurementRecord &r) {
    if (r.shots.empty()) {
        throw std::invalid_argument("record has no shots");
    }
    std::vector<double> out;
    out.reserve(r.shots.size());
    for (const auto &s : r.shots) {
        out.push_back(s.p_a - s.p_b);
    }
    return out;
}

FrequencySeries freq_series(const std::vector<double> &dz, double contrast, double t_dark, double sample_interval) {
    if (!(contrast > 0 && contrast <= 1)) {
        throw std::invalid_argument("contrast must lie in (0, 1]");
    }
    if (!(t_dark > 0)) {
        throw std::invalid_argument("t_dark must be positive");
    }
    FrequencySeries s;
    s.sample_interval = sample_interval;
    s.values.reserve(dz.size());
    for (double d : dz) {
        s.values.push_back(2 * d / (contrast * t_dark));
    }
    s.validate();
    return s;
}

namespace {

// Length of [a0, a1) intersected with [b0, b1).
long overlap(long a0, long a1, long b0, long b1) {
    return std::max(0L, std::min(a1, b1) - std::max(a0, b0));
}

// Cov(d1_0, d2_j) for unit white noise, with d_k = mean(y[k+m, k+2m)) - mean(y[k, k+m)).
double diff_cov(long m1, long m2, long j) {
    long s = overlap(m1, 2 * m1, j + m2, j + 2 * m2) - overlap(m1, 2 * m1, j, j + m2) -
             overlap(0, m1, j + m2, j + 2 * m2) + overlap(0, m1, j, j + m2);
    return (double)s / ((double)m1 * (double)m2);
}

// Cov(Q1, Q2) / 2 for Q = sum_k d_k^2 with K1, K2 terms.
double quad_cov_half(long m1, long k1, long m2, long k2) {
    double total = 0;
    for (long j = -2 * m2 + 1; j < 2 * m1; j++) {
        long pairs = std::max(0L, std::min(k1, k2 - j) - std::max(0L, -j));
        if (pairs == 0) {
            continue;
        }
        double c = diff_cov(m1, m2, j);
        total += pairs * c * c;
    }
    return total;
}

}  // namespace

double white_fm_edf(int n_samples, int m) {
    long k = (long)n_samples - 2L * m + 1;
    if (m < 1 || k < 1) {
        throw std::invalid_argument("averaging factor out of range");
    }
    double mean_q = k * diff_cov(m, m, 0);
    return mean_q * mean_q / quad_cov_half(m, k, m, k);
}

Eigen::MatrixXd white_fm_log_covariance(int n_samples, const std::vector<int> &ms) {
    int n = (int)ms.size();
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; i++) {
        long ki = (long)n_samples - 2L * ms[i] + 1;
        for (int j = 0; j <= i; j++) {
            long kj = (long)n_samples - 2L * ms[j] + 1;
            double eqi = ki * diff_cov(ms[i], ms[i], 0);
            double eqj = kj * diff_cov(ms[j], ms[j], 0);
            double c = 2 * quad_cov_half(ms[i], ki, ms[j], kj) / (4 * eqi * eqj);
            cov(i, j) = c;
            cov(j, i) = c;
        }
    }
    return cov;
}

AllanCurve overlapping_adev(const std::vector<double> &y, double sample_interval, AdevAxis axis, AdevSpacing spacing) {
    int n = (int)y.size();
    if (n < 8) {
        throw std::invalid_argument("Allan deviation needs at least 8 samples");
    }
    if (!(sample_interval > 0)) {
        throw std::invalid_argument("sample_interval must be positive");
    }
    long double mean = 0;
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("series contains a non-finite value");
        }
        mean += v;
    }
    mean /= n;
    std::vector<long double> prefix(n + 1, 0);
    for (int k = 0; k < n; k++) {
        prefix[k + 1] = prefix[k] + ((long double)y[k] - mean);
    }
    std::vector<int> ms;
    int m_max = n / 3;
    if (spacing == AdevSpacing::kAll) {
        for (int m = 1; m <= m_max; m++) {
            ms.push_back(m);
        }
    } else {
        for (int m = 1; m <= m_max; m *= 2) {
            ms.push_back(m);
        }
    }
    AllanCurve curve;
    curve.axis = axis;
    curve.tau0 = sample_interval;
    curve.n_samples = n;
    boost::math::chi_squared_distribution<double> unit(1);
    for (int m : ms) {
        long double sum = 0;
        int terms = n - 2 * m + 1;
        for (int k = 0; k < terms; k++) {
            long double d = (prefix[k + 2 * m] - 2 * prefix[k + m] + prefix[k]) / m;
            sum += d * d;
        }
        AllanPoint p;
        p.m = m;
        p.tau = axis == AdevAxis::kCount ? (double)m : m * sample_interval;
        p.adev = std::sqrt((double)(sum / (2.0L * terms)));
        p.edf = white_fm_edf(n, m);
        boost::math::chi_squared_distribution<double> chi(p.edf);
        p.lo = p.adev * std::sqrt(p.edf / boost::math::quantile(chi, 0.841344746068543));
        p.hi = p.adev * std::sqrt(p.edf / boost::math::quantile(chi, 0.158655253931457));
        p.err = 0.5 * (p.hi - p.lo);
        curve.points.push_back(p);
    }
    return curve;
}

AllanCurve overlapping_adev(const FrequencySeries &s, AdevAxis axis) {
    s.validate();
    return overlapping_adev(s.values, s.sample_interval, axis);
}

std::string AllanCurve::to_csv() const {
    std::ostringstream out;
    out.precision(12);
    out << "m,tau_s,adev,err\n";
    for (const auto &p : points) {
        out << p.m << ',' << p.m * tau0 << ',' << p.adev << ',' << p.err << '\n';
    }
    return out.str();
}

WhiteNoiseFit fit_white_noise(const AllanCurve &curve, double slope_sigmas) {
    std::vector<AllanPoint> pts;
    for (const auto &p : curve.points) {
        if (p.adev > 0) {
            pts.push_back(p);
        }
    }
    if (pts.empty()) {
        throw std::invalid_argument("white-noise fit needs a nonempty curve with nonzero deviations");
    }
    // Thin dense curves to octave spacing; neighbouring points add almost no information.
    if (pts.size() > 64) {
        std::vector<AllanPoint> thin;
        for (const auto &p : pts) {
            if ((p.m & (p.m - 1)) == 0) {
                thin.push_back(p);
            }
        }
        pts = thin;
    }
    int n = (int)pts.size();
    std::vector<int> ms;
    Eigen::VectorXd y(n), lt(n);
    for (int i = 0; i < n; i++) {
        ms.push_back(pts[i].m);
        double nu = pts[i].edf;
        double bias = 0.5 * (boost::math::digamma(nu / 2) - std::log(nu / 2));
        y[i] = std::log(pts[i].adev) - bias;
        lt[i] = std::log(pts[i].tau);
    }
    Eigen::MatrixXd cov = white_fm_log_covariance(curve.n_samples, ms);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success) {
        throw NumericalError("Allan point covariance is not positive definite");
    }

    WhiteNoiseFit fit;
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd w1 = ldlt.solve(ones);
    Eigen::VectorXd yf = y + 0.5 * lt;
    double info = ones.dot(w1);
    double log_a = w1.dot(yf) / info;
    fit.amplitude = std::exp(log_a);
    fit.amplitude_err = fit.amplitude / std::sqrt(info);
    Eigen::VectorXd resid = yf - log_a * ones;
    fit.chi2 = resid.dot(ldlt.solve(resid));
    fit.dof = n - 1;

    if (n >= 2) {
        Eigen::MatrixXd x(n, 2);
        x.col(0) = ones;
        x.col(1) = lt;
        Eigen::MatrixXd xtw = (ldlt.solve(x)).transpose();
        Eigen::Matrix2d normal = xtw * x;
        Eigen::Vector2d beta = normal.ldlt().solve(xtw * y);
        Eigen::Matrix2d bcov = normal.inverse();
        fit.slope = beta[1];
        fit.slope_err = std::sqrt(bcov(1, 1));
        fit.white = std::abs(fit.slope + 0.5) <= slope_sigmas * fit.slope_err;
    } else {
        fit.slope_err = std::numeric_limits<double>::infinity();
    }
    return fit;
}

std::string WhiteNoiseFit::to_json() const {
    nlohmann::json j;
    j["amplitude"] = amplitude;
    j["amplitude_err"] = amplitude_err;
    j["slope"] = slope;
    j["slope_err"] = std::isfinite(slope_err) ? nlohmann::json(slope_err) : nlohmann::json(nullptr);
    j["chi2"] = chi2;
    j["dof"] = dof;
    j["white"] = white;
    return j.dump(2);
}

double DoubleExponentialFit::operator()(double t) const {
    return a * std::exp(-gamma_a * t) + b * std::exp(-gamma_b * t);
}

std::string DoubleExponentialFit::to_json() const {
    nlohmann::json j;
    j["a"] = a;
    j["b"] = b;
    j["gamma_a"] = gamma_a;
    j["gamma_b"] = gamma_b;
    j["chi2"] = chi2;
    j["t_opt"] = t_opt;
    j["xi_opt"] = xi_opt;
    nlohmann::json c = nlohmann::json::array();
    for (int r = 0; r < 4; r++) {
        c.push_back({covariance(r, 0), covariance(r, 1), covariance(r, 2), covariance(r, 3)});
    }
    j["covariance"] = c;
    return j.dump(2);
}

DoubleExponentialFit fit_double_exponential(const std::vector<XiPoint> &points) {
    int n = (int)points.size();
    if (n < 5) {
        throw std::invalid_argument("double-exponential fit needs at least 5 points");
    }
    double t_min = points[0].t, t_max = points[0].t;
    for (const auto &p : points) {
        if (!(p.err > 0) || !std::isfinite(p.t) || !std::isfinite(p.xi)) {
            throw std::invalid_argument("points need finite values and positive errors");
        }
        t_min = std::min(t_min, p.t);
        t_max = std::max(t_max, p.t);
    }
    double span = t_max - t_min;
    if (!(span > 0)) {
        throw std::invalid_argument("points must span a nonzero time range");
    }

    // Variable projection: amplitudes are linear given the rates.
    std::vector<double> rates{0.0};
    for (int i = 0; i < 40; i++) {
        double g = std::pow(10.0, -1.5 + 3.0 * i / 39) / span;
        rates.push_back(g);
        rates.push_back(-g);
    }
    auto linear_fit = [&](double ga, double gb, double &a, double &b) {
        Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
        Eigen::Vector2d v = Eigen::Vector2d::Zero();
        for (const auto &p : points) {
            double w = 1 / (p.err * p.err);
            double ea = std::exp(-ga * (p.t - t_min)), eb = std::exp(-gb * (p.t - t_min));
            m(0, 0) += w * ea * ea;
            m(0, 1) += w * ea * eb;
            m(1, 1) += w * eb * eb;
            v[0] += w * ea * p.xi;
            v[1] += w * eb * p.xi;
        }
        m(1, 0) = m(0, 1);
        Eigen::Vector2d s = m.fullPivLu().solve(v);
        a = s[0];
        b = s[1];
        double chi2 = 0;
        for (const auto &p : points) {
            double r = (a * std::exp(-ga * (p.t - t_min)) + b * std::exp(-gb * (p.t - t_min)) - p.xi) / p.err;
            chi2 += r * r;
        }
        return std::isfinite(chi2) ? chi2 : std::numeric_limits<double>::infinity();
    };
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector4d start;
    for (std::size_t i = 0; i < rates.size(); i++) {
        for (std::size_t j = i + 1; j < rates.size(); j++) {
            double a, b;
            double c = linear_fit(rates[i], rates[j], a, b);
            if (c < best) {
                best = c;
                start << a, b, rates[i], rates[j];
            }
        }
    }
    if (!std::isfinite(best)) {
        throw NumericalError("double-exponential grid search found no finite fit");
    }

    // Parameters are expressed relative to t_min for conditioning.
    auto residuals = [&](const Eigen::VectorXd &q, Eigen::VectorXd &r) {
        for (int i = 0; i < n; i++) {
            double s = points[i].t - t_min;
            r[i] = (q[0] * std::exp(-q[2] * s) + q[1] * std::exp(-q[3] * s) - points[i].xi) / points[i].err;
        }
    };
    auto jacobian = [&](const Eigen::VectorXd &q, Eigen::MatrixXd &jac) {
        for (int i = 0; i < n; i++) {
            double s = points[i].t - t_min, w = 1 / points[i].err;
            double ea = std::exp(-q[2] * s), eb = std::exp(-q[3] * s);
            jac(i, 0) = w * ea;
            jac(i, 1) = w * eb;
            jac(i, 2) = -w * q[0] * s * ea;
            jac(i, 3) = -w * q[1] * s * eb;
        }
    };
    LeastSquaresResult ls = levenberg_marquardt(n, start, residuals, jacobian);
    if (!ls.converged && ls.chi2 > best) {
        throw NumericalError("double-exponential fit did not converge: " + ls.status);
    }
    Eigen::Vector4d q = ls.chi2 <= best ? Eigen::Vector4d(ls.params) : start;

    DoubleExponentialFit fit;
    fit.gamma_a = q[2];
    fit.gamma_b = q[3];
    // Shift amplitudes back to the t = 0 reference.
    fit.a = q[0] * std::exp(q[2] * t_min);
    fit.b = q[1] * std::exp(q[3] * t_min);
    Eigen::Matrix4d jt = Eigen::Matrix4d::Identity();
    jt(0, 0) = std::exp(q[2] * t_min);
    jt(0, 2) = fit.a * t_min;
    jt(1, 1) = std::exp(q[3] * t_min);
    jt(1, 3) = fit.b * t_min;
    if (ls.covariance.rows() == 4) {
        fit.covariance = jt * ls.covariance * jt.transpose();
    } else {
        fit.covariance.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    fit.chi2 = std::min(ls.chi2, best);

    // d/dt = 0:  a Ga e^{-Ga t} = -b Gb e^{-Gb t}.
    double ratio = -(fit.b * fit.gamma_b) / (fit.a * fit.gamma_a);
    if (!(fit.gamma_a != fit.gamma_b) || !(ratio > 0) || !std::isfinite(ratio)) {
        throw NumericalError("fitted curve has no interior minimum (no stationary point)");
    }
    double t_star = std::log(ratio) / (fit.gamma_b - fit.gamma_a);
    double curvature = fit.a * fit.gamma_a * fit.gamma_a * std::exp(-fit.gamma_a * t_star) +
                       fit.b * fit.gamma_b * fit.gamma_b * std::exp(-fit.gamma_b * t_star);
    if (!(curvature > 0) || t_star < t_min || t_star > t_max) {
        throw NumericalError("fitted curve has no interior minimum in the sampled range");
    }
    fit.t_opt = t_star;
    fit.xi_opt = fit(t_star);
    return fit;
}

}  // namespace rydsq
