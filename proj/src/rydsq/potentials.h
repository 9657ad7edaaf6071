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

#ifndef RYDSQ_POTENTIALS_H
#define RYDSQ_POTENTIALS_H

#include <array>
#include <string>
#include <vector>

#include "rydsq/least_squares.h"

namespace rydsq {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Rydberg drive. All rates are angular (rad/s); c6 is in rad/s * m^6.
struct DressingParams {
    double omega_r = 0;
    double delta = 0;
    double c6 = 0;
    double omega_c = 0;

    double beta() const {
        return omega_r / (2 * delta);
    }
    /// Throws std::invalid_argument unless omega_r > 0 and delta != 0.
    void validate() const;

    /// Convenience constructor taking MHz for the drives and GHz um^6 for C6.
    static DressingParams from_lab_units(double omega_r_mhz, double delta_mhz, double c6_ghz_um6);
};

/// V(r) = v0 / (1 + (r / r_b)^6). v0 is in Hz (energy / h), r_b in meters.
struct SoftCorePotential {
    double v0_hz = 0;
    double r_b = 0;
};

struct PairOscillationPoint {
    double r_lat;
    double freq_hz;
    double err_hz;
};

struct PairOscillationData {
    std::vector<PairOscillationPoint> points;
    /// Separations positive and distinct, errors positive.
    void validate() const;
};

/// Fitted soft core. Covariance is over (v0_hz, rb_lat).
struct SoftCoreFit {
    double v0_hz = 0;
    double rb_lat = 0;
    std::array<std::array<double, 2>, 2> covariance{};
    double chi2 = 0;
    int iterations = 0;
    bool converged = false;

    double v0_err() const;
    double rb_err() const;
    SoftCorePotential potential(double lattice_constant) const;
    std::string to_json() const;
};

/// v0 = beta^3 * omega_r / (2 pi) [Hz], r_b = |C6 / (2 delta)|^(1/6).
SoftCorePotential weak_dressing_potential(const DressingParams &p);

/// Soft-core energy in Hz at separation r (meters).
double soft_core(const SoftCorePotential &v, double r);

/// Weighted fit of freq(r) = w / (1 + (r / R)^6) to pair oscillation data,
/// reporting v0 = 2 w. Throws std::invalid_argument on degenerate data and
/// NumericalError if the optimizer does not converge.
SoftCoreFit fit_soft_core(const PairOscillationData &data);

/// Pair oscillation frequency (Hz) from the dressed two-atom spectrum; the
/// pair interaction is twice this value.
double pair_oscillation_frequency(const DressingParams &p, double r);

/// CSV with header r_lat,freq_hz,err_hz. Lines starting with '#' are skipped.
PairOscillationData read_pair_oscillation_csv(const std::string &path);
PairOscillationData parse_pair_oscillation_csv(const std::string &text);

}  // namespace rydsq

#endif
