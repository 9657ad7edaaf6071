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

#include "rydsq/ellipse.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/special_functions/chebyshev.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "json.hpp"
#include "rydsq/least_squares.h"
#include "rydsq/parallel.h"
#include "rydsq/tempered_binomial.h"

namespace rydsq {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kPenalty = 1e100;

double prob_a(const EllipseModel &m, double theta) {
    return m.contrast / 2 * std::cos(theta) + m.y0;
}

double prob_b(const EllipseModel &m, double theta) {
    return m.contrast / 2 * std::cos(theta + m.phi) + m.y0;
}

// Rows are theta nodes, columns k. Column-major so a fixed k is contiguous.
void theta_tables(const EllipseModel &m, int nodes, Eigen::MatrixXd &a, Eigen::MatrixXd &b) {
    int n = m.n_atoms;
    TemperedBinomial tb(n);
    a.resize(nodes, n + 1);
    b.resize(nodes, n + 1);
    std::vector<double> buf(n + 1);
    for (int j = 0; j < nodes; j++) {
        double theta = 2 * kPi * j / nodes;
        tb.pmf(std::clamp(prob_a(m, theta), 0.0, 1.0), 1 / m.zeta_sq(theta), buf.data());
        for (int k = 0; k <= n; k++) {
            a(j, k) = buf[k];
        }
        tb.pmf(std::clamp(prob_b(m, theta), 0.0, 1.0), 1 / m.zeta_sq(theta + m.phi), buf.data());
        for (int k = 0; k <= n; k++) {
            b(j, k) = buf[k];
        }
    }
}

double sigmoid(double u) {
    return 1 / (1 + std::exp(-u));
}

double logit(double p) {
    return std::log(p / (1 - p));
}

}  // namespace

std::vector<double> pmf_theta(const EllipseModel &m, double theta) {
    m.validate();
    int n = m.n_atoms;
    TemperedBinomial tb(n);
    auto pa = tb.pmf(std::clamp(prob_a(m, theta), 0.0, 1.0), 1 / m.zeta_sq(theta));
    auto pb = tb.pmf(std::clamp(prob_b(m, theta), 0.0, 1.0), 1 / m.zeta_sq(theta + m.phi));
    std::vector<double> out((n + 1) * (n + 1));
    double total = 0;
    for (int i = 0; i <= n; i++) {
        for (int j = 0; j <= n; j++) {
            out[i * (n + 1) + j] = pa[i] * pb[j];
            total += out[i * (n + 1) + j];
        }
    }
    for (double &x : out) {
        x /= total;
    }
    return out;
}

std::vector<double> pmf_marginal(const EllipseModel &m, int nodes) {
    m.validate();
    if (nodes < 8) {
        throw std::invalid_argument("phase quadrature needs at least 8 nodes");
    }
    Eigen::MatrixXd a, b;
    theta_tables(m, nodes, a, b);
    // Row-major (k_A, k_B) == column-major of B^T A.
    Eigen::MatrixXd joint = b.transpose() * a / nodes;
    int n = m.n_atoms;
    std::vector<double> out(joint.data(), joint.data() + (n + 1) * (n + 1));
    double total = std::accumulate(out.begin(), out.end(), 0.0);
    for (double &x : out) {
        x /= total;
    }
    return out;
}

double marginal_convergence(const EllipseModel &m, int nodes) {
    auto p1 = pmf_marginal(m, nodes);
    auto p2 = pmf_marginal(m, 2 * nodes);
    double worst = 0;
    for (std::size_t i = 0; i < p1.size(); i++) {
        worst = std::max(worst, std::abs(p1[i] - p2[i]));
    }
    return worst;
}

CountHistogram histogram_from_record(const MeasurementRecord &r) {
    if (r.shots.empty()) {
        throw std::invalid_argument("record has no shots");
    }
    CountHistogram h;
    h.n_atoms = r.shots[0].n_a;
    for (const auto &s : r.shots) {
        if (s.n_a != h.n_atoms || s.n_b != h.n_atoms) {
            throw std::invalid_argument("ellipse fitting needs equal atom numbers in every shot and ensemble");
        }
    }
    int n = h.n_atoms;
    std::map<int, int> counts;
    for (const auto &s : r.shots) {
        int ka = (int)std::lround(s.p_a * n), kb = (int)std::lround(s.p_b * n);
        int c = ka * (n + 1) + kb;
        h.shot_cell.push_back(c);
        counts[c]++;
    }
    for (auto [c, k] : counts) {
        h.cell.push_back(c);
        h.count.push_back(k);
    }
    h.n_shots = (int)r.shots.size();
    return h;
}

CountHistogram histogram_from_indices(const CountHistogram &h, const std::vector<int> &shots) {
    CountHistogram out;
    out.n_atoms = h.n_atoms;
    std::map<int, int> counts;
    for (int s : shots) {
        int c = h.shot_cell.at(s);
        out.shot_cell.push_back(c);
        counts[c]++;
    }
    for (auto [c, k] : counts) {
        out.cell.push_back(c);
        out.count.push_back(k);
    }
    out.n_shots = (int)shots.size();
    return out;
}

std::vector<double> marginal_at_cells(const EllipseModel &m, const std::vector<int> &cells, int nodes) {
    m.validate();
    Eigen::MatrixXd a, b;
    theta_tables(m, nodes, a, b);
    int n1 = m.n_atoms + 1;
    std::vector<double> out(cells.size());
    for (std::size_t i = 0; i < cells.size(); i++) {
        out[i] = a.col(cells[i] / n1).dot(b.col(cells[i] % n1)) / nodes;
    }
    return out;
}

double log_likelihood(const EllipseModel &m, const CountHistogram &h, int nodes) {
    if (m.n_atoms != h.n_atoms) {
        throw std::invalid_argument("model and data atom numbers differ");
    }
    auto f = marginal_at_cells(m, h.cell, nodes);
    double total = 0;
    for (std::size_t i = 0; i < f.size(); i++) {
        if (!(f[i] > 0)) {
            return -std::numeric_limits<double>::infinity();
        }
        total += h.count[i] * std::log(f[i]);
    }
    return total;
}

double log_likelihood(const EllipseModel &m, const MeasurementRecord &r, int nodes) {
    return log_likelihood(m, histogram_from_record(r), nodes);
}

namespace {

// Unconstrained coordinates for the free parameters.
struct Transform {
    EllipseModel base;
    ParameterMask free;

    int size() const {
        return free.count();
    }

    std::vector<double> encode(const EllipseModel &m) const {
        std::vector<double> u;
        double c = std::clamp(m.contrast, 1e-4, 1 - 1e-4);
        if (free.phi) {
            u.push_back(logit(std::clamp(m.phi / kPi, 1e-4, 1 - 1e-4)));
        }
        if (free.contrast) {
            u.push_back(logit(c));
        }
        if (free.y0) {
            double cc = free.contrast ? c : m.contrast;
            double frac = cc < 1 ? (m.y0 - cc / 2) / (1 - cc) : 0.5;
            u.push_back(logit(std::clamp(frac, 1e-4, 1 - 1e-4)));
        }
        if (free.zeta0) {
            u.push_back(std::log(m.zeta0));
        }
        if (free.zeta1) {
            u.push_back(std::log(m.zeta1));
        }
        return u;
    }

    EllipseModel decode(const double *u) const {
        EllipseModel m = base;
        int i = 0;
        if (free.phi) {
            m.phi = kPi * sigmoid(u[i++]);
        }
        if (free.contrast) {
            m.contrast = sigmoid(u[i++]);
        }
        if (free.y0) {
            m.y0 = m.contrast / 2 + (1 - m.contrast) * sigmoid(u[i++]);
        } else {
            m.y0 = std::clamp(m.y0, m.contrast / 2, 1 - m.contrast / 2);
        }
        if (free.zeta0) {
            m.zeta0 = std::exp(std::clamp(u[i++], -20.0, 20.0));
        }
        if (free.zeta1) {
            m.zeta1 = std::exp(std::clamp(u[i++], -20.0, 20.0));
        }
        return m;
    }
};

struct Objective {
    const Transform *t;
    const CountHistogram *h;
    int nodes;
    int evaluations = 0;

    double operator()(const double *u) {
        evaluations++;
        double ll = log_likelihood(t->decode(u), *h, nodes);
        return std::isfinite(ll) ? -ll : kPenalty;
    }
};

double gsl_objective(const gsl_vector *v, void *params) {
    auto *obj = static_cast<Objective *>(params);
    return (*obj)(v->data);
}

std::vector<double> nelder_mead(Objective &obj, std::vector<double> start, int max_iterations, double &value) {
    int n = (int)start.size();
    gsl_vector *x = gsl_vector_alloc(n);
    gsl_vector *step = gsl_vector_alloc(n);
    for (int i = 0; i < n; i++) {
        gsl_vector_set(x, i, start[i]);
        gsl_vector_set(step, i, 0.5);
    }
    gsl_multimin_function fn{&gsl_objective, (size_t)n, &obj};
    gsl_multimin_fminimizer *s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    for (int it = 0; it < max_iterations; it++) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) {
            break;
        }
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-7) == GSL_SUCCESS) {
            break;
        }
    }
    std::vector<double> best(s->x->data, s->x->data + n);
    value = s->fval;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(x);
    gsl_vector_free(step);
    return best;
}

// Brent minimum of f on [lo, hi] seeded by a grid.
double grid_brent(const std::function<double(double)> &f, double lo, double hi, int grid, double &value) {
    std::vector<double> xs(grid), fs(grid);
    int best = 0;
    for (int i = 0; i < grid; i++) {
        xs[i] = lo + (hi - lo) * i / (grid - 1);
        fs[i] = f(xs[i]);
        if (fs[i] < fs[best]) {
            best = i;
        }
    }
    double a = xs[std::max(0, best - 1)], b = xs[std::min(grid - 1, best + 1)];
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::brent_find_minima(f, a, b, 52, iters);
    if (r.second <= fs[best]) {
        value = r.second;
        return r.first;
    }
    value = fs[best];
    return xs[best];
}

bool is_pinned(const EllipseModel &m, const ParameterMask &free) {
    return (free.phi && (m.phi < 1e-4 || m.phi > kPi - 1e-4)) || (free.contrast && m.contrast > 1 - 1e-6) ||
           (free.zeta0 && (m.zeta0 > 1e3 || m.zeta0 < 1e-3)) || (free.zeta1 && (m.zeta1 > 1e3 || m.zeta1 < 1e-3));
}

}  // namespace

LikelihoodResult fit_mle(
    const CountHistogram &h, const EllipseModel &init, const ParameterMask &free, const FitOptions &options) {
    init.validate();
    if (init.n_atoms != h.n_atoms) {
        throw std::invalid_argument("model and data atom numbers differ");
    }
    if (free.count() == 0) {
        throw std::invalid_argument("fit needs at least one free parameter");
    }
    LikelihoodResult res;

    if (free.count() == 1 && free.phi) {
        int evals = 0;
        auto f = [&](double phi) {
            evals++;
            EllipseModel m = init;
            m.phi = phi;
            double ll = log_likelihood(m, h, options.nodes);
            return std::isfinite(ll) ? -ll : kPenalty;
        };
        double value;
        double phi = grid_brent(f, 0, kPi, 64, value);
        res.model = init;
        res.model.phi = phi;
        res.log_likelihood = -value;
        double dphi = 1e-4;
        double lo = std::max(0.0, phi - dphi), hi = std::min(kPi, phi + dphi);
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double curvature = (f(hi) - 2 * f(mid) + f(lo)) / (half * half);
        res.degenerate = h.n_shots < 2 || !(curvature > 0);
        res.evaluations = evals;
    } else {
        Transform t{init, free};
        Objective obj{&t, &h, options.nodes};
        std::vector<EllipseModel> starts{init};
        for (int k = 1; k < options.starts; k++) {
            EllipseModel s = init;
            if (free.phi) {
                s.phi = kPi * (2 * k - 1) / (2.0 * (options.starts - 1));
            }
            starts.push_back(s);
        }
        double best_value = std::numeric_limits<double>::infinity();
        std::vector<double> best_u;
        for (const auto &s : starts) {
            double value;
            auto u = nelder_mead(obj, t.encode(s), options.max_iterations, value);
            if (value < best_value) {
                best_value = value;
                best_u = u;
            }
        }
        if (options.coordinate_descent) {
            for (int sweep = 0; sweep < 6; sweep++) {
                double before = best_value;
                for (int i = 0; i < t.size(); i++) {
                    auto f = [&](double x) {
                        auto u = best_u;
                        u[i] = x;
                        return obj(u.data());
                    };
                    boost::uintmax_t iters = 100;
                    auto r = boost::math::tools::brent_find_minima(f, best_u[i] - 0.5, best_u[i] + 0.5, 40, iters);
                    if (r.second < best_value) {
                        best_value = r.second;
                        best_u[i] = r.first;
                    }
                }
                if (before - best_value < 1e-10) {
                    break;
                }
            }
        }
        res.model = t.decode(best_u.data());
        res.log_likelihood = -best_value;
        res.degenerate = h.n_shots < 2 || best_value >= kPenalty;
        if (options.hessian && !res.degenerate) {
            int n = t.size();
            double d = 1e-3;
            Eigen::MatrixXd hess(n, n);
            double f0 = best_value;
            for (int i = 0; i < n; i++) {
                for (int j = 0; j <= i; j++) {
                    auto at = [&](double si, double sj) {
                        auto u = best_u;
                        u[i] += si;
                        u[j] += sj;
                        return obj(u.data());
                    };
                    double v;
                    if (i == j) {
                        v = (at(d, 0) - 2 * f0 + at(-d, 0)) / (d * d);
                    } else {
                        v = (at(d, d) - at(d, -d) - at(-d, d) + at(-d, -d)) / (4 * d * d);
                    }
                    hess(i, j) = v;
                    hess(j, i) = v;
                }
            }
            Eigen::LLT<Eigen::MatrixXd> llt(hess);
            res.degenerate = llt.info() != Eigen::Success || !hess.allFinite();
        }
        res.evaluations = obj.evaluations;
    }
    res.phi_hat = res.model.phi;
    res.boundary_pinned = is_pinned(res.model, free);
    return res;
}

LikelihoodResult fit_mle(
    const MeasurementRecord &r, const EllipseModel &init, const ParameterMask &free, const FitOptions &options) {
    return fit_mle(histogram_from_record(r), init, free, options);
}

std::string LikelihoodResult::to_json() const {
    nlohmann::json j;
    j["phi_rad"] = phi_hat;
    j["phi_deg"] = phi_hat * 180 / kPi;
    j["contrast"] = model.contrast;
    j["y0"] = model.y0;
    j["zeta0"] = model.zeta0;
    j["zeta1"] = model.zeta1;
    j["n_atoms"] = model.n_atoms;
    j["log_likelihood"] = log_likelihood;
    j["bootstrap_spread"] = bootstrap_spread;
    j["evaluations"] = evaluations;
    j["boundary_pinned"] = boundary_pinned;
    j["degenerate"] = degenerate;
    return j.dump(2);
}

EllipseModel initial_model_from_record(const MeasurementRecord &r) {
    auto h = histogram_from_record(r);
    int n = h.n_atoms;
    double ma = 0, mb = 0;
    for (const auto &s : r.shots) {
        ma += s.p_a;
        mb += s.p_b;
    }
    double count = (double)r.shots.size();
    ma /= count;
    mb /= count;
    double va = 0, vb = 0, cab = 0;
    for (const auto &s : r.shots) {
        va += (s.p_a - ma) * (s.p_a - ma);
        vb += (s.p_b - mb) * (s.p_b - mb);
        cab += (s.p_a - ma) * (s.p_b - mb);
    }
    double denom = std::max(1.0, count - 1);
    va /= denom;
    vb /= denom;
    cab /= denom;
    EllipseModel m;
    m.n_atoms = n;
    double y0 = 0.5 * (ma + mb);
    double excess = 0.5 * (va + vb) - y0 * (1 - y0) / n;
    m.contrast = std::clamp(std::sqrt(8 * std::max(excess, 1e-4)), 0.05, 0.99);
    m.y0 = std::clamp(y0, m.contrast / 2, 1 - m.contrast / 2);
    double cosphi = std::clamp(cab / (m.contrast * m.contrast / 8), -1.0, 1.0);
    m.phi = std::clamp(std::acos(cosphi), 0.05, kPi - 0.05);
    return m;
}

double PipelineResult::total_err() const {
    return std::sqrt(stat_err * stat_err + calib_err * calib_err);
}

std::string PipelineResult::to_json() const {
    nlohmann::json j;
    j["phi_rad"] = phi_hat;
    j["phi_deg"] = phi_hat * 180 / kPi;
    j["stat_err"] = stat_err;
    j["calib_err"] = calib_err;
    j["total_err"] = total_err();
    j["stat_err_deg"] = stat_err * 180 / kPi;
    j["calib_err_deg"] = calib_err * 180 / kPi;
    j["jackknife_mean"] = jackknife_mean;
    j["calibration"] = nlohmann::json::parse(calibration.to_json());
    j["n_bootstrap"] = bootstrap_phi.size();
    j["adev_amplitude"] = adev_fit.amplitude;
    j["adev_amplitude_err"] = adev_fit.amplitude_err;
    j["adev_slope"] = adev_fit.slope;
    return j.dump(2);
}

std::vector<std::vector<int>> bootstrap_indices(int n_shots, int n_bootstrap, std::uint64_t seed) {
    std::vector<std::vector<int>> out(n_bootstrap);
    for (int b = 0; b < n_bootstrap; b++) {
        auto rng = make_stream(seed, "bootstrap", (std::uint64_t)b);
        out[b].resize(n_shots);
        for (int i = 0; i < n_shots; i++) {
            out[b][i] = std::min(n_shots - 1, (int)(uniform01(rng) * n_shots));
        }
    }
    return out;
}

namespace {

// Chebyshev series on [lo, hi] in the c0 / 2 convention.
struct Cheb {
    double lo = 0, hi = 1;
    std::vector<double> c, d1, d2;

    double x_of(double phi) const {
        return (2 * phi - lo - hi) / (hi - lo);
    }
    static std::vector<double> derivative(const std::vector<double> &c) {
        int n = (int)c.size();
        std::vector<double> d(n, 0.0);
        for (int k = n - 1; k >= 1; k--) {
            d[k - 1] = (k + 1 < n ? d[k + 1] : 0.0) + 2 * k * c[k];
        }
        return d;
    }
    void finish() {
        d1 = derivative(c);
        d2 = derivative(d1);
    }
    double value(double phi) const {
        return boost::math::chebyshev_clenshaw_recurrence(c.data(), c.size(), x_of(phi));
    }
    double slope(double phi) const {
        return boost::math::chebyshev_clenshaw_recurrence(d1.data(), d1.size(), x_of(phi)) * 2 / (hi - lo);
    }
    double curvature(double phi) const {
        double s = 2 / (hi - lo);
        return boost::math::chebyshev_clenshaw_recurrence(d2.data(), d2.size(), x_of(phi)) * s * s;
    }
};

// Maximizer of the interpolated log likelihood inside [lo, hi]; false when
// it sits on an edge that is not a boundary of [0, pi].
bool cheb_argmax(const Cheb &g, double start, double &out) {
    double x = start;
    bool ok = true;
    for (int it = 0; it < 50; it++) {
        double s = g.slope(x), c = g.curvature(x);
        if (!(c < 0)) {
            ok = false;
            break;
        }
        double nx = x - s / c;
        if (nx < g.lo || nx > g.hi) {
            ok = false;
            break;
        }
        if (std::abs(nx - x) < 1e-15) {
            x = nx;
            break;
        }
        x = nx;
    }
    if (!ok) {
        boost::uintmax_t iters = 200;
        auto r = boost::math::tools::brent_find_minima([&](double p) { return -g.value(p); }, g.lo, g.hi, 52, iters);
        x = r.first;
        double edge_tol = 1e-9 * (g.hi - g.lo);
        if ((x - g.lo < edge_tol && g.lo > 0) || (g.hi - x < edge_tol && g.hi < kPi)) {
            return false;
        }
    }
    out = x;
    return true;
}

double phi_only(const EllipseModel &cal, const CountHistogram &h, int nodes) {
    FitOptions o;
    o.nodes = nodes;
    o.hessian = false;
    return fit_mle(h, cal, ParameterMask::phi_only(), o).phi_hat;
}

}  // namespace

PipelineResult calibrated_pipeline(
    const MeasurementRecord &cal, const MeasurementRecord &meas, const PipelineOptions &options, std::uint64_t seed) {
    auto hc = histogram_from_record(cal);
    auto hm = histogram_from_record(meas);
    if (hc.n_atoms != hm.n_atoms) {
        throw std::invalid_argument("calibration and measurement atom numbers differ");
    }
    if (hm.n_shots < 8) {
        throw std::invalid_argument("measurement record needs at least 8 shots");
    }
    ParameterMask mask = options.squeezed_model ? ParameterMask::sss() : ParameterMask::css();
    FitOptions fo;
    fo.nodes = options.nodes;
    PipelineResult res;
    EllipseModel init = initial_model_from_record(cal);
    res.calibration = fit_mle(hc, init, mask, fo);
    if (res.calibration.degenerate) {
        throw NumericalError("calibration fit is degenerate");
    }
    EllipseModel model = res.calibration.model;

    // Phase on the measurement set; the calibration phase is discarded.
    double phi_b = phi_only(model, hm, options.nodes);
    auto ll_at = [&](double phi, const std::vector<int> &cells) {
        EllipseModel m = model;
        m.phi = phi;
        return marginal_at_cells(m, cells, options.nodes);
    };
    double d = 1e-4;
    auto total_ll = [&](double phi) {
        auto f = ll_at(phi, hm.cell);
        double s = 0;
        for (std::size_t i = 0; i < f.size(); i++) {
            s += hm.count[i] * std::log(f[i]);
        }
        return s;
    };
    double sigma = 0.05;
    if (phi_b > 2 * d && phi_b < kPi - 2 * d) {
        double curv = (total_ll(phi_b + d) - 2 * total_ll(phi_b) + total_ll(phi_b - d)) / (d * d);
        if (curv < 0) {
            sigma = 1 / std::sqrt(-curv);
        }
    }
    double delta = std::clamp(10 * sigma, 1e-3, 0.5);

    // Per-cell Chebyshev interpolants of log f on a window around the estimate.
    int nc = options.chebyshev_nodes, cells = (int)hm.cell.size();
    Cheb window;
    window.lo = std::max(0.0, phi_b - delta);
    window.hi = std::min(kPi, phi_b + delta);
    std::vector<std::vector<double>> samples(nc);
    for (int j = 0; j < nc; j++) {
        double x = std::cos(kPi * (j + 0.5) / nc);
        double phi = 0.5 * (window.lo + window.hi) + 0.5 * (window.hi - window.lo) * x;
        samples[j] = ll_at(phi, hm.cell);
        for (double &v : samples[j]) {
            if (!(v > 0)) {
                throw NumericalError("measurement shot has zero probability under the calibrated model");
            }
            v = std::log(v);
        }
    }
    std::vector<Cheb> per_cell(cells, window);
    Cheb full = window;
    full.c.assign(nc, 0.0);
    for (int c = 0; c < cells; c++) {
        per_cell[c].c.assign(nc, 0.0);
        for (int k = 0; k < nc; k++) {
            double s = 0;
            for (int j = 0; j < nc; j++) {
                s += samples[j][c] * std::cos(kPi * k * (j + 0.5) / nc);
            }
            per_cell[c].c[k] = 2 * s / nc;
            full.c[k] += hm.count[c] * per_cell[c].c[k];
        }
        per_cell[c].finish();
    }
    full.finish();

    double phi_full;
    if (!cheb_argmax(full, std::clamp(phi_b, window.lo, window.hi), phi_full)) {
        phi_full = phi_b;
    }
    res.phi_hat = phi_full;

    // Leave-one-out estimates depend only on the cell of the dropped shot.
    std::vector<double> loo(cells);
    for (int c = 0; c < cells; c++) {
        Cheb g = full;
        for (int k = 0; k < nc; k++) {
            g.c[k] -= per_cell[c].c[k];
        }
        g.finish();
        double x;
        if (!cheb_argmax(g, phi_full, x)) {
            std::vector<int> keep;
            bool dropped = false;
            for (int s = 0; s < hm.n_shots; s++) {
                if (!dropped && hm.shot_cell[s] == hm.cell[c]) {
                    dropped = true;
                    continue;
                }
                keep.push_back(s);
            }
            x = phi_only(model, histogram_from_indices(hm, keep), options.nodes);
        }
        loo[c] = x;
    }
    std::map<int, int> cell_slot;
    for (int c = 0; c < cells; c++) {
        cell_slot[hm.cell[c]] = c;
    }
    double m = hm.n_shots;
    res.jackknife.resize(hm.n_shots);
    double sum = 0;
    for (int s = 0; s < hm.n_shots; s++) {
        res.jackknife[s] = m * phi_full - (m - 1) * loo[cell_slot[hm.shot_cell[s]]];
        sum += res.jackknife[s];
    }
    res.jackknife_mean = sum / m;
    double var = 0;
    for (double v : res.jackknife) {
        var += (v - res.jackknife_mean) * (v - res.jackknife_mean);
    }
    res.stat_err = std::sqrt(var / (m - 1)) / std::sqrt(m);

    // Calibration bootstrap.
    auto sets = bootstrap_indices(hc.n_shots, options.n_bootstrap, seed);
    res.bootstrap_phi.assign(options.n_bootstrap, 0.0);
    std::vector<EllipseModel> boot_models(options.n_bootstrap);
    FitOptions bo;
    bo.nodes = options.nodes;
    bo.starts = 1;
    bo.coordinate_descent = false;
    bo.hessian = false;
    parallel_for((std::size_t)options.n_bootstrap, options.jobs, [&](std::size_t b) {
        auto hb = histogram_from_indices(hc, sets[b]);
        auto fit = fit_mle(hb, model, mask, bo);
        boot_models[b] = fit.model;
        res.bootstrap_phi[b] = phi_only(fit.model, hm, options.nodes);
    });
    if (options.n_bootstrap >= 2) {
        double mean = 0;
        for (double p : res.bootstrap_phi) {
            mean += p;
        }
        mean /= options.n_bootstrap;
        double v = 0;
        for (double p : res.bootstrap_phi) {
            v += (p - mean) * (p - mean);
        }
        res.calib_err = std::sqrt(v / (options.n_bootstrap - 1));
        auto spread = [&](auto get) {
            double mu = 0, s2 = 0;
            for (const auto &bm : boot_models) {
                mu += get(bm);
            }
            mu /= options.n_bootstrap;
            for (const auto &bm : boot_models) {
                s2 += (get(bm) - mu) * (get(bm) - mu);
            }
            return std::sqrt(s2 / (options.n_bootstrap - 1));
        };
        res.calibration.bootstrap_spread = {
            spread([](const EllipseModel &x) { return x.phi; }),
            spread([](const EllipseModel &x) { return x.contrast; }),
            spread([](const EllipseModel &x) { return x.y0; }),
            spread([](const EllipseModel &x) { return x.zeta0; }),
            spread([](const EllipseModel &x) { return x.zeta1; })};
    }

    res.adev = overlapping_adev(res.jackknife, meas.cycle_time, AdevAxis::kCount);
    res.adev_fit = fit_white_noise(res.adev);
    return res;
}

double paired_ratio_db(const PipelineResult &css, const PipelineResult &sss) {
    if (!(css.adev_fit.amplitude > 0) || !(sss.adev_fit.amplitude > 0)) {
        throw NumericalError("paired ratio needs positive Allan amplitudes");
    }
    return 20 * std::log10(css.adev_fit.amplitude / sss.adev_fit.amplitude);
}

FisherResult fisher_information(const EllipseModel &m, double phi0, double h, int nodes) {
    m.validate();
    if (!(h > 0)) {
        throw std::invalid_argument("finite-difference step must be positive");
    }
    auto at = [&](double phi) {
        EllipseModel x = m;
        x.phi = phi;
        return pmf_marginal(x, nodes);
    };
    auto f0 = at(phi0);
    auto info = [&](double step) {
        auto fp = at(phi0 + step), fm = at(phi0 - step);
        double total = 0;
        for (std::size_t i = 0; i < f0.size(); i++) {
            if (!(f0[i] > 0) || !(fp[i] > 0) || !(fm[i] > 0)) {
                continue;
            }
            double dlog = (std::log(fp[i]) - std::log(fm[i])) / (2 * step);
            total += dlog * dlog * f0[i];
        }
        return total;
    };
    FisherResult r;
    r.information = info(h);
    double half = info(h / 2);
    r.richardson = (4 * half - r.information) / 3;
    r.richardson_rel = half > 0 ? std::abs(r.information - half) / half : 0;
    return r;
}

FisherResult fisher_information_css(const EllipseModel &m, double phi0, double h, int nodes) {
    if (!m.is_binomial()) {
        throw std::invalid_argument("CSS Fisher information needs zeta = (1, 1)");
    }
    return fisher_information(m, phi0, h, nodes);
}

double zeta0_for_fisher_gain(const EllipseModel &m, double phi0, double gain_db, int nodes) {
    EllipseModel css = m;
    css.zeta0 = 1;
    css.zeta1 = 1;
    double base = fisher_information(css, phi0, 1e-4, nodes).information;
    auto f = [&](double z0) {
        EllipseModel s = m;
        s.zeta0 = z0;
        return 10 * std::log10(fisher_information(s, phi0, 1e-4, nodes).information / base) - gain_db;
    };
    double lo = 0.05, hi = 1.0;
    if (gain_db < 0) {
        hi = 20.0;
        lo = 1.0;
    }
    double flo = f(lo), fhi = f(hi);
    if (flo * fhi > 0) {
        throw std::invalid_argument("requested Fisher gain is out of reach");
    }
    boost::uintmax_t iters = 100;
    auto r = boost::math::tools::bisect(f, lo, hi, boost::math::tools::eps_tolerance<double>(40), iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace rydsq
