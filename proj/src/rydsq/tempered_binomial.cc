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

#include "rydsq/tempered_binomial.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

namespace rydsq {

TemperedBinomial::TemperedBinomial(int n) : n_(n) {
    if (n < 1) {
        throw std::invalid_argument("binomial needs n >= 1");
    }
    log_choose_.resize(n + 1);
    for (int k = 0; k <= n; k++) {
        log_choose_[k] = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    }
}

double TemperedBinomial::log_binomial(int k, double p) const {
    if (p <= 0) {
        return k == 0 ? 0 : -INFINITY;
    }
    if (p >= 1) {
        return k == n_ ? 0 : -INFINITY;
    }
    return log_choose_[k] + k * std::log(p) + (n_ - k) * std::log1p(-p);
}

void TemperedBinomial::pmf(double p, double exponent, double *out) const {
    if (!std::isfinite(p)) {
        throw std::invalid_argument("success probability must be finite");
    }
    if (!(exponent > 0) || !std::isfinite(exponent)) {
        throw std::invalid_argument("tempering exponent must be positive and finite (zeta -> 0 is not normalizable)");
    }
    if (p <= 0 || p >= 1) {
        std::fill(out, out + n_ + 1, 0.0);
        out[p <= 0 ? 0 : n_] = 1;
        return;
    }
    double lp = std::log(p), lq = std::log1p(-p);
    double top = -INFINITY;
    for (int k = 0; k <= n_; k++) {
        out[k] = exponent * (log_choose_[k] + k * lp + (n_ - k) * lq);
        top = std::max(top, out[k]);
    }
    double total = 0;
    for (int k = 0; k <= n_; k++) {
        out[k] = std::exp(out[k] - top);
        total += out[k];
    }
    for (int k = 0; k <= n_; k++) {
        out[k] /= total;
    }
}

std::vector<double> TemperedBinomial::pmf(double p, double exponent) const {
    std::vector<double> out(n_ + 1);
    pmf(p, exponent, out.data());
    return out;
}

void TemperedBinomial::moments(const std::vector<double> &pmf, double &mean, double &var) {
    mean = 0;
    for (std::size_t k = 0; k < pmf.size(); k++) {
        mean += k * pmf[k];
    }
    var = 0;
    for (std::size_t k = 0; k < pmf.size(); k++) {
        var += (k - mean) * (k - mean) * pmf[k];
    }
}

double zeta_for_variance_ratio(int n, double p, double ratio) {
    if (!(p > 0 && p < 1)) {
        throw std::invalid_argument("variance matching needs 0 < p < 1");
    }
    if (!(ratio > 0)) {
        throw std::invalid_argument("variance ratio must be positive");
    }
    TemperedBinomial tb(n);
    double base = n * p * (1 - p);
    auto f = [&](double zeta) {
        double mean, var;
        TemperedBinomial::moments(tb.pmf(p, 1 / (zeta * zeta)), mean, var);
        return var / base - ratio;
    };
    double lo = 1e-3, hi = 1;
    while (f(hi) < 0) {
        hi *= 2;
        if (hi > 1e3) {
            throw std::invalid_argument("requested variance ratio is out of reach");
        }
    }
    if (f(lo) > 0) {
        throw std::invalid_argument("requested variance ratio is out of reach");
    }
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::bisect(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace rydsq
