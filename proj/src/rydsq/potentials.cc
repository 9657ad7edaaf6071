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

#include "rydsq/potentials.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rydsq/exact_diag.h"

namespace rydsq {

void DressingParams::validate() const {
    if (!(omega_r > 0) || !std::isfinite(omega_r)) {
        throw std::invalid_argument("omega_r must be positive and finite");
    }
    if (delta == 0 || !std::isfinite(delta)) {
        throw std::invalid_argument("delta must be nonzero and finite (blockade radius undefined)");
    }
    if (!std::isfinite(c6) || !std::isfinite(omega_c)) {
        throw std::invalid_argument("c6 and omega_c must be finite");
    }
}

DressingParams DressingParams::from_lab_units(double omega_r_mhz, double delta_mhz, double c6_ghz_um6) {
    DressingParams p;
    p.omega_r = kTwoPi * omega_r_mhz * 1e6;
    p.delta = kTwoPi * delta_mhz * 1e6;
    p.c6 = kTwoPi * c6_ghz_um6 * 1e9 * 1e-36;
    return p;
}

void PairOscillationData::validate() const {
    std::set<double> seen;
    for (const auto &pt : points) {
        if (!(pt.r_lat > 0) || !std::isfinite(pt.r_lat)) {
            throw std::invalid_argument("separations must be positive");
        }
        if (!(pt.err_hz > 0) || !std::isfinite(pt.err_hz)) {
            throw std::invalid_argument("frequency errors must be positive");
        }
        if (!std::isfinite(pt.freq_hz)) {
            throw std::invalid_argument("frequencies must be finite");
        }
        if (!seen.insert(pt.r_lat).second) {
            throw std::invalid_argument("separations must be distinct");
        }
    }
}

double SoftCoreFit::v0_err() const {
    return std::sqrt(covariance[0][0]);
}

double SoftCoreFit::rb_err() const {
    return std::sqrt(covariance[1][1]);
}

SoftCorePotential SoftCoreFit::potential(double lattice_constant) const {
    return {v0_hz, rb_lat * lattice_constant};
}

std::string SoftCoreFit::to_json() const {
    nlohmann::json j;
    j["v0_hz"] = v0_hz;
    j["rb_lat"] = rb_lat;
    j["v0_err_hz"] = v0_err();
    j["rb_err_lat"] = rb_err();
    j["covariance"] = {{covariance[0][0], covariance[0][1]}, {covariance[1][0], covariance[1][1]}};
    j["chi2"] = chi2;
    j["iterations"] = iterations;
    j["converged"] = converged;
    return j.dump(2);
}

SoftCorePotential weak_dressing_potential(const DressingParams &p) {
    p.validate();
    double b = p.beta();
    SoftCorePotential v;
    v.v0_hz = b * b * b * p.omega_r / kTwoPi;
    v.r_b = std::pow(std::abs(p.c6 / (2 * p.delta)), 1.0 / 6.0);
    return v;
}

double soft_core(const SoftCorePotential &v, double r) {
    double x = r / v.r_b;
    double x2 = x * x;
    return v.v0_hz / (1 + x2 * x2 * x2);
}

SoftCoreFit fit_soft_core(const PairOscillationData &data) {
    data.validate();
    if (data.points.size() < 3) {
        throw std::invalid_argument("soft-core fit needs at least 3 distinct separations");
    }
    int m = (int)data.points.size();
    std::vector<double> rs;
    double fmax = -1e300;
    for (const auto &pt : data.points) {
        rs.push_back(pt.r_lat);
        fmax = std::max(fmax, pt.freq_hz);
    }
    std::sort(rs.begin(), rs.end());
    double median = m % 2 ? rs[m / 2] : 0.5 * (rs[m / 2 - 1] + rs[m / 2]);

    // Parameters: (plateau frequency w, R in lattice units).
    auto residuals = [&](const Eigen::VectorXd &p, Eigen::VectorXd &r) {
        for (int k = 0; k < m; k++) {
            const auto &pt = data.points[k];
            double x6 = std::pow(pt.r_lat / p[1], 6);
            r[k] = (p[0] / (1 + x6) - pt.freq_hz) / pt.err_hz;
        }
    };
    auto jacobian = [&](const Eigen::VectorXd &p, Eigen::MatrixXd &j) {
        for (int k = 0; k < m; k++) {
            const auto &pt = data.points[k];
            double x6 = std::pow(pt.r_lat / p[1], 6);
            double d = 1 + x6;
            j(k, 0) = 1 / d / pt.err_hz;
            j(k, 1) = p[0] * 6 * x6 / (p[1] * d * d) / pt.err_hz;
        }
    };
    // The plateau datum is the oscillation frequency; v0 = 2 w so w starts at max(freq).
    Eigen::VectorXd x0(2);
    x0 << fmax, median;
    auto lm = levenberg_marquardt(m, x0, residuals, jacobian);
    if (!lm.converged || !(lm.params[1] > 0)) {
        std::ostringstream msg;
        msg << "soft-core fit did not converge (" << lm.status << "), final chi2 " << lm.chi2;
        throw NumericalError(msg.str());
    }
    SoftCoreFit fit;
    fit.v0_hz = 2 * lm.params[0];
    fit.rb_lat = std::abs(lm.params[1]);
    fit.covariance[0][0] = 4 * lm.covariance(0, 0);
    fit.covariance[0][1] = fit.covariance[1][0] = 2 * lm.covariance(0, 1);
    fit.covariance[1][1] = lm.covariance(1, 1);
    fit.chi2 = lm.chi2;
    fit.iterations = lm.iterations;
    fit.converged = true;
    return fit;
}

double pair_oscillation_frequency(const DressingParams &p, double r) {
    return 0.5 * dressed_pair_shift(p, r);
}

PairOscillationData parse_pair_oscillation_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    PairOscillationData data;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("r_lat", 0) == 0) {
                continue;
            }
        }
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c, ',')) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected r_lat,freq_hz,err_hz");
        }
        try {
            data.points.push_back({std::stod(a), std::stod(b), std::stod(c)});
        } catch (const std::exception &) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": non-numeric field");
        }
    }
    if (data.points.empty()) {
        throw std::invalid_argument("pair oscillation file has no data rows");
    }
    return data;
}

PairOscillationData read_pair_oscillation_csv(const std::string &path) {
    std::ifstream f(path);
    if (!f) {
        throw std::invalid_argument("cannot open " + path);
    }
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_pair_oscillation_csv(buf.str());
}

}  // namespace rydsq
