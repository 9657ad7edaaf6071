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

#ifndef RYDSQ_WEAK_DRESSING_H
#define RYDSQ_WEAK_DRESSING_H

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rydsq/geometry.h"
#include "rydsq/potentials.h"

namespace rydsq {

/// Symmetric pair energies V_ij in Hz with zero diagonal.
struct CouplingMatrix {
    Eigen::MatrixXd v_hz;

    std::size_t size() const {
        return (std::size_t)v_hz.rows();
    }
    void validate() const;
};

/// Interaction phases phi_ij = V_ij t / (2 hbar) = pi V_ij[Hz] t.
struct InteractionPhases {
    Eigen::MatrixXd phi;
    double t_int = 0;

    std::size_t size() const {
        return (std::size_t)phi.rows();
    }
    void validate() const;
};

/// Result of a quadrature optimization for one ensemble.
struct SqueezingObservables {
    double contrast = 1;
    double alpha_opt = 0;
    double var_ratio_min = 1;
    double xi_w_sq = 1;
    /// Variance ratio sampled on a uniform grid of alpha in [0, pi).
    std::vector<double> alpha_grid;
    std::vector<double> var_ratio_grid;

    double xi_db() const;
    double var_ratio_db() const;
};

/// Converts a linear ratio to 10 log10.
double to_db(double ratio);

CouplingMatrix couplings_from_potential(const ArrayGeometry &g, const SoftCorePotential &v);
InteractionPhases interaction_phases(const CouplingMatrix &c, double t_int);
/// Phase matrix for all-to-all uniform phase phi.
InteractionPhases uniform_phases(std::size_t n, double phi);

/// Two-particle correlator (1/4)Cov(m_i, m_j) of the measured quadrature
/// m = cos(alpha) sigma_z + sin(alpha) sigma_y, mean spin along +x.
double g2_correlator(const InteractionPhases &ph, double alpha, std::size_t i, std::size_t j);

double contrast(const InteractionPhases &ph);

/// Single-spin Bloch vector (<sx>, <sy>, <sz>) after the echo sequence.
std::array<double, 3> single_spin_bloch(const InteractionPhases &ph, std::size_t i);

/// Coefficients of variance_ratio(alpha) = 1 + a sin^2(alpha) + b sin(alpha) cos(alpha).
struct QuadratureCoefficients {
    double a = 0;
    double b = 0;
    double at(double alpha) const;
    /// Closed-form minimum over alpha.
    double minimum() const;
};
QuadratureCoefficients quadrature_coefficients(const InteractionPhases &ph);

/// 4 Var[S_m] / N for one ensemble, the differential variance of two
/// identical independent ensembles in units of projection noise.
double variance_ratio(const InteractionPhases &ph, double alpha);

/// Minimizes f over alpha in [0, pi): coarse grid then bracketed Brent refinement.
/// Returns (alpha, f(alpha)); also fills the grid samples if requested.
std::pair<double, double> minimize_over_alpha(
    const std::function<double(double)> &f,
    int grid_points = 181,
    std::vector<double> *grid_alpha = nullptr,
    std::vector<double> *grid_value = nullptr);

SqueezingObservables wineland(const InteractionPhases &ph);

struct TimeOptimum {
    double t_int = 0;
    SqueezingObservables obs;
};

/// Minimizes xi_W^2 over the supplied interaction times. With refine set, the
/// best grid point is polished by Brent search between its neighbours.
TimeOptimum optimize_time(const CouplingMatrix &c, const std::vector<double> &t_grid, bool refine = true);

struct ScanRow {
    int rows = 0;
    int cols = 0;
    int n = 0;
    double t_opt = 0;
    double alpha_opt = 0;
    double contrast = 1;
    double var_ratio_min = 1;
    double xi_w_sq = 1;
};

struct ScanOptions {
    int spacing_x = 2;
    int spacing_y = 2;
    double lattice_constant = kDefaultLatticeConstant;
    bool refine = true;
    int jobs = 1;
};

/// One weak-dressing optimum per (rows, cols) subarray.
std::vector<ScanRow> scan_xi_vs_n(
    const std::vector<std::pair<int, int>> &sizes,
    const SoftCorePotential &v,
    const std::vector<double> &t_grid,
    const ScanOptions &options = {});

std::string scan_to_csv(const std::vector<ScanRow> &rows);

/// Correlator averaged over ordered pairs sharing the displacement (rx, ry)
/// in lattice units.
struct G2MapEntry {
    int rx;
    int ry;
    double alpha;
    double g2;
    int pairs;
};
std::vector<G2MapEntry> g2_map(const ArrayGeometry &g, const InteractionPhases &ph, const std::vector<double> &alphas);
std::string g2_map_to_csv(const std::vector<G2MapEntry> &map);

}  // namespace rydsq

#endif
