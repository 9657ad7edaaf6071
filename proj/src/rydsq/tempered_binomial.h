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

#ifndef RYDSQ_TEMPERED_BINOMIAL_H
#define RYDSQ_TEMPERED_BINOMIAL_H

#include <vector>

namespace rydsq {

/// Binomial(n, p) raised to the power `exponent` and renormalized over
/// k = 0..n. exponent = 1 is the plain binomial. For p in {0, 1} the mass is
/// a point at k = n p for every exponent.
class TemperedBinomial {
   public:
    explicit TemperedBinomial(int n);

    int n() const {
        return n_;
    }
    /// Writes n + 1 probabilities into out.
    void pmf(double p, double exponent, double *out) const;
    std::vector<double> pmf(double p, double exponent) const;

    /// Exact mean and variance of k by summation.
    static void moments(const std::vector<double> &pmf, double &mean, double &var);

    /// Unnormalized log binomial mass (includes the coefficient).
    double log_binomial(int k, double p) const;

   private:
    int n_;
    std::vector<double> log_choose_;
};

/// The zeta whose exponent 1 / zeta^2 makes the tempered variance at success
/// probability p equal `ratio` times the binomial variance (bisection).
double zeta_for_variance_ratio(int n, double p, double ratio);

}  // namespace rydsq

#endif
