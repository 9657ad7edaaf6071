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

#include "rydsq/weak_dressing.h"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "rydsq/parallel.h"

namespace rydsq {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void check_symmetric(const Eigen::MatrixXd &m, const char *what) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument(std::string(what) + " must be square");
    }
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) + " has non-finite entries");
    }
    for (Eigen::Index i = 0; i < m.rows(); i++) {
        if (m(i, i) != 0) {
            throw std::invalid_argument(std::string(what) + " must have zero diagonal");
        }
        for (Eigen::Index j = i + 1; j < m.cols(); j++) {
            if (m(i, j) != m(j, i)) {
                throw std::invalid_argument(std::string(what) + " must be symmetric");
            }
        }
    }
}

}  // namespace

void CouplingMatrix::validate() const {
    check_symmetric(v_hz, "coupling matrix");
}

void InteractionPhases::validate() const {
    check_symmetric(phi, "phase matrix");
}

double to_db(double ratio) {
    return 10 * std::log10(ratio);
}

double SqueezingObservables::xi_db() const {
    return to_db(xi_w_sq);
}

double SqueezingObservables::var_ratio_db() const {
    return to_db(var_ratio_min);
}

CouplingMatrix couplings_from_potential(const ArrayGeometry &g, const SoftCorePotential &v) {
    if (!(v.r_b > 0)) {
        throw std::invalid_argument("blockade radius must be positive");
    }
    std::size_t n = g.size();
    CouplingMatrix c;
    c.v_hz = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = i + 1; j < n; j++) {
            if (g.labels()[i] != g.labels()[j]) {
                continue;
            }
            double e = soft_core(v, g.distance(i, j));
            c.v_hz(i, j) = c.v_hz(j, i) = e;
        }
    }
    return c;
}

InteractionPhases interaction_phases(const CouplingMatrix &c, double t_int) {
    if (!(t_int >= 0) || !std::isfinite(t_int)) {
        throw std::invalid_argument("interaction time must be non-negative");
    }
    InteractionPhases ph;
    ph.phi = kPi * t_int * c.v_hz;
    ph.t_int = t_int;
    return ph;
}

InteractionPhases uniform_phases(std::size_t n, double phi) {
    InteractionPhases ph;
    ph.phi = Eigen::MatrixXd::Constant(n, n, phi);
    ph.phi.diagonal().setZero();
    return ph;
}

double g2_correlator(const InteractionPhases &ph, double alpha, std::size_t i, std::size_t j) {
    if (i == j) {
        throw std::invalid_argument("g2 needs two distinct sites");
    }
    std::size_t n = ph.size();
    double p_minus = 0.5, p_plus = 0.5, ci = 1, cj = 1;
    for (std::size_t k = 0; k < n; k++) {
        if (k == i || k == j) {
            continue;
        }
        double a = ph.phi(k, i), b = ph.phi(k, j);
        p_minus *= std::cos(a - b);
        p_plus *= std::cos(a + b);
        ci *= std::cos(a);
        cj *= std::cos(b);
    }
    double s = std::sin(alpha), co = std::cos(alpha);
    return 0.25 * (p_minus - p_plus) * s * s + 0.25 * s * co * std::sin(ph.phi(i, j)) * (ci + cj);
}

std::array<double, 3> single_spin_bloch(const InteractionPhases &ph, std::size_t i) {
    double x = 1;
    for (std::size_t k = 0; k < ph.size(); k++) {
        if (k != i) {
            x *= std::cos(ph.phi(i, k));
        }
    }
    return {x, 0.0, 0.0};
}

double contrast(const InteractionPhases &ph) {
    std::size_t n = ph.size();
    if (n == 0) {
        return 0;
    }
    double total = 0;
    for (std::size_t i = 0; i < n; i++) {
        total += single_spin_bloch(ph, i)[0];
    }
    return total / (double)n;
}

double QuadratureCoefficients::at(double alpha) const {
    double s = std::sin(alpha);
    return 1 + a * s * s + b * s * std::cos(alpha);
}

double QuadratureCoefficients::minimum() const {
    return 1 + a / 2 - std::sqrt(a * a / 4 + b * b / 4);
}

QuadratureCoefficients quadrature_coefficients(const InteractionPhases &ph) {
    // Sum over ordered pairs i != j of 4 g2 / N, split into its sin^2 and
    // sin cos parts. Single-spin means along the measured plane vanish, so the
    // diagonal contributes exactly N/4.
    std::size_t n = ph.size();
    QuadratureCoefficients q;
    if (n < 2) {
        return q;
    }
    Eigen::MatrixXd c = ph.phi.array().cos().matrix();
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = i + 1; j < n; j++) {
            double p_minus = 0.5, p_plus = 0.5, ci = 1, cj = 1;
            for (std::size_t k = 0; k < n; k++) {
                if (k == i || k == j) {
                    continue;
                }
                double a = ph.phi(k, i), b = ph.phi(k, j);
                p_minus *= std::cos(a - b);
                p_plus *= std::cos(a + b);
                ci *= c(k, i);
                cj *= c(k, j);
            }
            q.a += 2 * (p_minus - p_plus);
            q.b += 2 * std::sin(ph.phi(i, j)) * (ci + cj);
        }
    }
    q.a /= (double)n;
    q.b /= (double)n;
    return q;
}

double variance_ratio(const InteractionPhases &ph, double alpha) {
    std::size_t n = ph.size();
    if (n == 0) {
        throw std::invalid_argument("empty ensemble");
    }
    double s = std::sin(alpha), co = std::cos(alpha);
    double var = 0;
    for (std::size_t i = 0; i < n; i++) {
        auto b = single_spin_bloch(ph, i);
        double m = co * b[2] + s * b[1];
        var += (1 - m * m) / 4;
    }
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = i + 1; j < n; j++) {
            var += 2 * g2_correlator(ph, alpha, i, j);
        }
    }
    return 4 * var / (double)n;
}

std::pair<double, double> minimize_over_alpha(
    const std::function<double(double)> &f,
    int grid_points,
    std::vector<double> *grid_alpha,
    std::vector<double> *grid_value) {
    if (grid_points < 3) {
        throw std::invalid_argument("alpha grid needs at least 3 points");
    }
    std::vector<double> values(grid_points);
    int best = 0;
    for (int k = 0; k < grid_points; k++) {
        double a = kPi * k / grid_points;
        values[k] = f(a);
        if (values[k] < values[best]) {
            best = k;
        }
        if (grid_alpha) {
            grid_alpha->push_back(a);
        }
    }
    if (grid_value) {
        *grid_value = values;
    }
    double h = kPi / grid_points;
    double lo = (best - 1) * h, hi = (best + 1) * h;
    auto r = boost::math::tools::brent_find_minima(f, lo, hi, 52);
    double alpha = r.first;
    double value = r.second;
    if (values[best] < value) {
        alpha = best * h;
        value = values[best];
    }
    alpha = std::fmod(alpha, kPi);
    if (alpha < 0) {
        alpha += kPi;
    }
    return {alpha, value};
}

SqueezingObservables wineland(const InteractionPhases &ph) {
    ph.validate();
    if (ph.size() < 2) {
        throw std::invalid_argument("Wineland parameter needs N >= 2");
    }
    SqueezingObservables obs;
    obs.contrast = contrast(ph);
    auto q = quadrature_coefficients(ph);
    auto best = minimize_over_alpha([&](double a) { return q.at(a); }, 181, &obs.alpha_grid, &obs.var_ratio_grid);
    obs.alpha_opt = best.first;
    obs.var_ratio_min = best.second;
    obs.xi_w_sq = obs.var_ratio_min / (obs.contrast * obs.contrast);
    return obs;
}

TimeOptimum optimize_time(const CouplingMatrix &c, const std::vector<double> &t_grid, bool refine) {
    if (t_grid.empty()) {
        throw std::invalid_argument("time grid is empty");
    }
    // The fast path avoids keeping alpha grids for every candidate time.
    auto xi_at = [&](double t) {
        auto ph = interaction_phases(c, t);
        double con = contrast(ph);
        auto q = quadrature_coefficients(ph);
        double v = q.minimum();
        double xi = v / (con * con);
        return std::isfinite(xi) ? xi : 1e300;
    };
    std::size_t best = 0;
    std::vector<double> xs(t_grid.size());
    for (std::size_t k = 0; k < t_grid.size(); k++) {
        xs[k] = xi_at(t_grid[k]);
        if (xs[k] < xs[best]) {
            best = k;
        }
    }
    double t_best = t_grid[best];
    if (refine && t_grid.size() >= 2) {
        double lo = t_grid[best > 0 ? best - 1 : best];
        double hi = t_grid[best + 1 < t_grid.size() ? best + 1 : best];
        if (hi > lo) {
            auto r = boost::math::tools::brent_find_minima(xi_at, lo, hi, 52);
            if (r.second < xs[best]) {
                t_best = r.first;
            }
        }
    }
    TimeOptimum out;
    out.t_int = t_best;
    auto ph = interaction_phases(c, t_best);
    if (ph.size() >= 2) {
        out.obs = wineland(ph);
    }
    return out;
}

std::vector<ScanRow> scan_xi_vs_n(
    const std::vector<std::pair<int, int>> &sizes,
    const SoftCorePotential &v,
    const std::vector<double> &t_grid,
    const ScanOptions &options) {
    if (sizes.empty() || t_grid.empty()) {
        throw std::invalid_argument("scan needs nonempty size and time grids");
    }
    std::vector<ScanRow> rows(sizes.size());
    parallel_for(sizes.size(), options.jobs, [&](std::size_t k) {
        SubarrayLayout l;
        l.rows = sizes[k].first;
        l.cols = sizes[k].second;
        l.spacing_x = options.spacing_x;
        l.spacing_y = options.spacing_y;
        l.lattice_constant = options.lattice_constant;
        auto g = build_subarrays(l);
        auto c = couplings_from_potential(g, v);
        ScanRow row;
        row.rows = l.rows;
        row.cols = l.cols;
        row.n = (int)g.size();
        if (g.size() >= 2) {
            auto opt = optimize_time(c, t_grid, options.refine);
            row.t_opt = opt.t_int;
            row.alpha_opt = opt.obs.alpha_opt;
            row.contrast = opt.obs.contrast;
            row.var_ratio_min = opt.obs.var_ratio_min;
            row.xi_w_sq = opt.obs.xi_w_sq;
        }
        rows[k] = row;
    });
    return rows;
}

std::string scan_to_csv(const std::vector<ScanRow> &rows) {
    std::ostringstream out;
    out.precision(10);
    out << "N,rows,cols,t_int_us,alpha_opt_deg,contrast,var_ratio_min,xi_db\n";
    for (const auto &r : rows) {
        out << r.n << ',' << r.rows << ',' << r.cols << ',' << r.t_opt * 1e6 << ',' << r.alpha_opt * 180 / kPi << ','
            << r.contrast << ',' << r.var_ratio_min << ',' << to_db(r.xi_w_sq) << '\n';
    }
    return out.str();
}

std::vector<G2MapEntry> g2_map(const ArrayGeometry &g, const InteractionPhases &ph, const std::vector<double> &alphas) {
    if (g.size() != ph.size()) {
        throw std::invalid_argument("geometry and phase matrix sizes differ");
    }
    std::vector<G2MapEntry> out;
    for (double alpha : alphas) {
        std::map<std::pair<int, int>, std::pair<double, int>> acc;
        for (std::size_t i = 0; i < g.size(); i++) {
            for (std::size_t j = 0; j < g.size(); j++) {
                if (i == j || g.labels()[i] != g.labels()[j]) {
                    continue;
                }
                int rx = g.sites()[j].ix - g.sites()[i].ix;
                int ry = g.sites()[j].iy - g.sites()[i].iy;
                auto &slot = acc[{rx, ry}];
                slot.first += g2_correlator(ph, alpha, i, j);
                slot.second++;
            }
        }
        for (const auto &[key, val] : acc) {
            out.push_back({key.first, key.second, alpha, val.first / val.second, val.second});
        }
    }
    return out;
}

std::string g2_map_to_csv(const std::vector<G2MapEntry> &map) {
    std::ostringstream out;
    out.precision(10);
    out << "rx,ry,alpha_deg,g2,pairs\n";
    for (const auto &e : map) {
        out << e.rx << ',' << e.ry << ',' << e.alpha * 180 / kPi << ',' << e.g2 << ',' << e.pairs << '\n';
    }
    return out.str();
}

}  // namespace rydsq
