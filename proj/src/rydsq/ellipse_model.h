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

#ifndef RYDSQ_ELLIPSE_MODEL_H
#define RYDSQ_ELLIPSE_MODEL_H

#include <cmath>
#include <stdexcept>

namespace rydsq {

/// Empirical two-ensemble noise model. Excitation probabilities are
/// P_A = (C/2) cos(theta) + y0 and P_B = (C/2) cos(theta + phi) + y0; the
/// binomial masses are tempered by 1 / zeta^2(theta) with
/// zeta^2(theta) = zeta0^2 sin^2(theta) + zeta1^2 cos^2(theta).
struct EllipseModel {
    double phi = 0;
    double contrast = 1;
    double y0 = 0.5;
    double zeta0 = 1;
    double zeta1 = 1;
    int n_atoms = 1;

    double zeta_sq(double theta) const {
        double s = std::sin(theta), c = std::cos(theta);
        return zeta0 * zeta0 * s * s + zeta1 * zeta1 * c * c;
    }
    bool is_binomial() const {
        return zeta0 == 1 && zeta1 == 1;
    }
    void validate() const {
        if (n_atoms < 1) {
            throw std::invalid_argument("model needs n_atoms >= 1");
        }
        if (!(contrast >= 0 && contrast <= 1)) {
            throw std::invalid_argument("contrast must lie in [0, 1]");
        }
        if (!(y0 >= contrast / 2 - 1e-12 && y0 <= 1 - contrast / 2 + 1e-12)) {
            throw std::invalid_argument("y0 must lie in [C/2, 1 - C/2] so that probabilities stay in [0, 1]");
        }
        if (!(zeta0 > 0) || !(zeta1 > 0) || !std::isfinite(zeta0) || !std::isfinite(zeta1)) {
            throw std::invalid_argument("zeta parameters must be positive and finite");
        }
        if (!std::isfinite(phi)) {
            throw std::invalid_argument("phi must be finite");
        }
    }
};

}  // namespace rydsq

#endif
